#pragma once

#include "shiftlab/joint.hpp"

namespace shiftlab {

// Built-in example distributions, addressable by name from scenario
// configs ("fixture": "...") and reused across the test suites.

// Binary X/Y1/Y2. At x=0 the outcomes are strongly coupled
// (p(0,0)=p(1,1)=0.4, p(0,1)=p(1,0)=0.1); at x=1 all four cells are 0.25.
ConditionalJoint fixture_d0();

// Like d0 at x=0, but x=1 reweights the Y1-marginal to (0.3, 0.7) while
// keeping P(y2|y1) fixed, so E[Y2|Y1,X] = 0.2 + 0.6*Y1 everywhere.
ConditionalJoint fixture_affine_proxy();

// Ternary Y1 with a bent conditional mean; no single affine map of Y1
// tracks E[Y2|Y1,X], so the scaled proxy predictor stays biased.
ConditionalJoint fixture_bent_proxy();

// Three covariate cells with a strong proxy and a mildly nonlinear
// x-effect; the permutation benchmark fixture.
ConditionalJoint fixture_benchmark();

// Lookup by name; throws SchemaViolation for unknown names.
ConditionalJoint fixture_by_name(const std::string& name);

}  // namespace shiftlab

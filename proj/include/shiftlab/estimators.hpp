#pragma once

#include <vector>

#include "shiftlab/joint.hpp"

namespace shiftlab {

// Standard approach: E_{-2}[Y2 | X = x] from the old fully-labeled period.
PredictorTable tau_A(const ConditionalJoint& joint_m2);

// Proxy approach on the recent period, affinely rescaled to the target
// outcome's scale.
PredictorTable tau_B(const ConditionalJoint& joint_m1, const ProxyScaling& scaling);

// Hybrid predictor plus which x's needed the absent-cell fallback.
struct TauCResult {
    PredictorTable table;
    std::vector<bool> flagged;  // per x: a zero-support first-stage cell was substituted

    bool any_flagged() const;
};

// Hybrid approach: first-stage conditional means from the old period
// averaged under the recent period's law of Y1 given X. First-stage cells
// with zero old-period support fall back to the old period's x-level mean.
TauCResult tau_C(const ConditionalJoint& joint_m2, const ConditionalJoint& joint_m1);

}  // namespace shiftlab

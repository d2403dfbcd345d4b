#include "shiftlab/fixtures.hpp"

#include "shiftlab/errors.hpp"

namespace shiftlab {

namespace {

std::vector<OutcomeLevel> binary_levels() { return {{"0", 0.0}, {"1", 1.0}}; }

}  // namespace

ConditionalJoint fixture_d0() {
    Alphabet a({"0", "1"}, binary_levels(), binary_levels());
    return ConditionalJoint::create(std::move(a), {0.5, 0.5},
                                    {0.4, 0.1, 0.1, 0.4,  //
                                     0.25, 0.25, 0.25, 0.25});
}

ConditionalJoint fixture_affine_proxy() {
    Alphabet a({"0", "1"}, binary_levels(), binary_levels());
    return ConditionalJoint::create(std::move(a), {0.5, 0.5},
                                    {0.4, 0.1, 0.1, 0.4,  //
                                     0.24, 0.06, 0.14, 0.56});
}

ConditionalJoint fixture_bent_proxy() {
    Alphabet a({"0", "1"}, {{"0", 0.0}, {"1", 1.0}, {"2", 2.0}}, binary_levels());
    // P(y1|x) * (1 - q, q) with q = E[Y2|y1,x] bent in y1.
    return ConditionalJoint::create(std::move(a), {0.6, 0.4},
                                    {0.27, 0.03, 0.08, 0.32, 0.21, 0.09,  //
                                     0.16, 0.04, 0.03, 0.27, 0.30, 0.20});
}

ConditionalJoint fixture_benchmark() {
    Alphabet a({"0", "1", "2"}, binary_levels(), binary_levels());
    const double third = 1.0 / 3.0;
    return ConditionalJoint::create(std::move(a), {third, third, third},
                                    {0.68, 0.12, 0.05, 0.15,    //
                                     0.385, 0.115, 0.085, 0.415,  //
                                     0.15, 0.05, 0.12, 0.68});
}

ConditionalJoint fixture_by_name(const std::string& name) {
    if (name == "d0") return fixture_d0();
    if (name == "affine_proxy") return fixture_affine_proxy();
    if (name == "bent_proxy") return fixture_bent_proxy();
    if (name == "benchmark") return fixture_benchmark();
    throw validation_error("SchemaViolation", "unknown fixture '" + name + "'");
}

}  // namespace shiftlab

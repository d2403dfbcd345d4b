#include "shiftlab/estimators.hpp"

#include <algorithm>

#include "shiftlab/errors.hpp"

namespace shiftlab {

PredictorTable tau_A(const ConditionalJoint& joint_m2) { return cond_mean_y2_given_x(joint_m2); }

PredictorTable tau_B(const ConditionalJoint& joint_m1, const ProxyScaling& scaling) {
    PredictorTable out = cond_mean_y1_given_x(joint_m1);
    for (double& v : out.values) v = scaling.slope * v + scaling.intercept;
    return out;
}

bool TauCResult::any_flagged() const {
    return std::any_of(flagged.begin(), flagged.end(), [](bool b) { return b; });
}

TauCResult tau_C(const ConditionalJoint& joint_m2, const ConditionalJoint& joint_m1) {
    if (!joint_m2.same_alphabet(joint_m1)) {
        throw validation_error("DimensionMismatch",
                               "tau_C requires both periods on the same alphabet");
    }
    const Alphabet& a = joint_m2.alphabet();
    const CondMeanTable q = cond_mean_y2_given_y1_x(joint_m2);
    const PredictorTable fallback = cond_mean_y2_given_x(joint_m2);

    TauCResult out{{a.x_labels(), std::vector<double>(a.n_x(), 0.0)},
                   std::vector<bool>(a.n_x(), false)};
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        double acc = 0.0;
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            const double w = joint_m1.y1_marginal(xi, i1);
            if (w == 0.0) continue;
            const auto& cell = q.at(xi, i1);
            if (cell.has_value()) {
                acc += w * (*cell);
            } else {
                acc += w * fallback.values[xi];
                out.flagged[xi] = true;
            }
        }
        out.table.values[xi] = acc;
    }
    return out;
}

}  // namespace shiftlab

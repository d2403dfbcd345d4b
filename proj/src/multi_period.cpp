#include "shiftlab/multi_period.hpp"

#include <cmath>
#include <optional>

#include "shiftlab/errors.hpp"

namespace shiftlab {

MultiAlphabet::MultiAlphabet(std::vector<std::string> x_labels,
                             std::vector<std::vector<OutcomeLevel>> outcome_axes)
    : x_labels_(std::move(x_labels)), axes_(std::move(outcome_axes)) {
    if (x_labels_.empty() || axes_.empty()) {
        throw validation_error("EmptySupport", "multi-period alphabet needs x labels and axes");
    }
    for (const auto& axis : axes_) {
        if (axis.empty()) {
            throw validation_error("EmptySupport", "every outcome axis needs at least one level");
        }
        for (const auto& lvl : axis) {
            if (!std::isfinite(lvl.value)) {
                throw validation_error("NonFiniteValue", "outcome value must be finite");
            }
        }
    }
}

bool MultiAlphabet::operator==(const MultiAlphabet& other) const {
    if (x_labels_ != other.x_labels_ || axes_.size() != other.axes_.size()) return false;
    for (std::size_t t = 0; t < axes_.size(); ++t) {
        if (axes_[t].size() != other.axes_[t].size()) return false;
        for (std::size_t i = 0; i < axes_[t].size(); ++i) {
            if (axes_[t][i].label != other.axes_[t][i].label ||
                axes_[t][i].value != other.axes_[t][i].value) {
                return false;
            }
        }
    }
    return true;
}

PeriodJoint::PeriodJoint(MultiAlphabet alphabet, std::size_t t, std::vector<double> px,
                         std::vector<double> table)
    : alphabet_(std::move(alphabet)),
      t_(t),
      cells_(1),
      px_(std::move(px)),
      table_(std::move(table)) {
    for (std::size_t k = 1; k <= t_; ++k) cells_ *= alphabet_.axis_size(k);
}

PeriodJoint PeriodJoint::create(MultiAlphabet alphabet, std::size_t t, std::vector<double> px,
                                std::vector<double> table) {
    if (t < 1 || t > alphabet.horizon()) {
        throw validation_error("SchemaViolation", "period index outside the outcome horizon");
    }
    std::size_t cells = 1;
    for (std::size_t k = 1; k <= t; ++k) cells *= alphabet.axis_size(k);
    if (px.size() != alphabet.n_x() || table.size() != alphabet.n_x() * cells) {
        throw validation_error("DimensionMismatch", "period joint dimensions do not match");
    }
    double px_sum = 0.0;
    for (double p : px) {
        if (p < 0.0 || !std::isfinite(p)) {
            throw validation_error("NegativeProbability", "px out of range");
        }
        px_sum += p;
    }
    if (std::abs(px_sum - 1.0) >= kInputTol) {
        throw validation_error("RowSumViolation", "px sums to " + std::to_string(px_sum));
    }
    for (double& p : px) p /= px_sum;
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            const double cell = table[xi * cells + c];
            if (cell < 0.0 || !std::isfinite(cell)) {
                throw validation_error("NegativeProbability", "table cell out of range");
            }
            row_sum += cell;
        }
        if (std::abs(row_sum - 1.0) >= kInputTol) {
            throw validation_error("RowSumViolation",
                                   "row for x=" + alphabet.x_labels()[xi] + " sums to " +
                                       std::to_string(row_sum));
        }
        for (std::size_t c = 0; c < cells; ++c) table[xi * cells + c] /= row_sum;
    }
    return PeriodJoint(std::move(alphabet), t, std::move(px), std::move(table));
}

namespace {

// P(y_{t1}..y_p | x): sum out the leading axes 1..t1-1. With y_1 slowest,
// the kept suffix occupies the fastest-moving index positions.
std::vector<double> marginal_suffix(const PeriodJoint& joint, std::size_t xi, std::size_t t1) {
    const MultiAlphabet& a = joint.alphabet();
    std::size_t prefix = 1;
    for (std::size_t k = 1; k < t1; ++k) prefix *= a.axis_size(k);
    const std::size_t suffix = joint.n_cells() / prefix;
    std::vector<double> out(suffix, 0.0);
    const double* row = joint.row(xi);
    for (std::size_t pb = 0; pb < prefix; ++pb) {
        for (std::size_t s = 0; s < suffix; ++s) out[s] += row[pb * suffix + s];
    }
    return out;
}

}  // namespace

TauCResult tau_nested(const std::vector<PeriodJoint>& joints, std::size_t t1, std::size_t t2) {
    if (joints.empty()) {
        throw validation_error("EmptySupport", "tau_nested needs period joints");
    }
    const MultiAlphabet& a = joints.front().alphabet();
    if (!(t1 >= 1 && t1 < t2 && t2 <= a.horizon())) {
        throw validation_error("SchemaViolation", "need 1 <= t1 < t2 <= T");
    }
    if (joints.size() < t2) {
        throw validation_error("DimensionMismatch", "missing period joints up to -t2");
    }
    for (std::size_t k = 0; k < joints.size(); ++k) {
        if (!(joints[k].alphabet() == a) || joints[k].t() != k + 1) {
            throw validation_error("DimensionMismatch",
                                   "period joints must share one alphabet, ordered by period");
        }
    }

    const std::size_t nx = a.n_x();
    std::vector<bool> flagged(nx, false);

    // Innermost stage: h(x, y_{t1}..y_{t2-1}) = E_{-t2}[Y_{t2} | ., x].
    const std::size_t s_t2 = a.axis_size(t2);
    std::size_t v_size = 1;
    for (std::size_t k = t1; k < t2; ++k) v_size *= a.axis_size(k);

    std::vector<std::optional<double>> h(nx * v_size);
    std::vector<double> h_fallback(nx, 0.0);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const std::vector<double> m = marginal_suffix(joints[t2 - 1], xi, t1);
        double x_mean = 0.0;
        for (std::size_t v = 0; v < v_size; ++v) {
            double mass = 0.0, acc = 0.0;
            for (std::size_t y = 0; y < s_t2; ++y) {
                const double p = m[v * s_t2 + y];
                mass += p;
                acc += p * a.axis(t2)[y].value;
            }
            x_mean += acc;
            if (mass > 0.0) h[xi * v_size + v] = acc / mass;
        }
        h_fallback[xi] = x_mean;  // row marginal sums to 1
    }

    // Outer stages average under periods -t2+1 .. -t1.
    for (std::size_t p = t2 - 1; p >= t1; --p) {
        const std::size_t s_p = a.axis_size(p);
        const std::size_t new_v_size = v_size / s_p;
        std::vector<std::optional<double>> next(nx * new_v_size);
        std::vector<double> next_fallback(nx, 0.0);
        for (std::size_t xi = 0; xi < nx; ++xi) {
            const std::vector<double> m = marginal_suffix(joints[p - 1], xi, t1);
            double x_mean = 0.0;
            for (std::size_t v = 0; v < new_v_size; ++v) {
                double mass = 0.0, acc = 0.0;
                for (std::size_t y = 0; y < s_p; ++y) {
                    const double w = m[v * s_p + y];
                    if (w == 0.0) continue;
                    mass += w;
                    const auto& cell = h[xi * v_size + v * s_p + y];
                    if (cell.has_value()) {
                        acc += w * (*cell);
                    } else {
                        acc += w * h_fallback[xi];
                        flagged[xi] = true;
                    }
                }
                x_mean += acc;
                if (mass > 0.0) next[xi * new_v_size + v] = acc / mass;
            }
            next_fallback[xi] = x_mean;
        }
        h = std::move(next);
        h_fallback = std::move(next_fallback);
        v_size = new_v_size;
        if (p == t1) break;
    }

    TauCResult out{{a.x_labels(), std::vector<double>(nx, 0.0)}, std::move(flagged)};
    for (std::size_t xi = 0; xi < nx; ++xi) {
        // v_size == 1 here; the remaining cell is the predictor itself.
        out.table.values[xi] = h[xi].value_or(0.0);
    }
    return out;
}

MultiAlphabet to_multi_alphabet(const Alphabet& alphabet) {
    return MultiAlphabet(alphabet.x_labels(), {alphabet.y1_levels(), alphabet.y2_levels()});
}

PeriodJoint period_joint_from_conditional(const ConditionalJoint& joint, std::size_t t) {
    const Alphabet& a = joint.alphabet();
    MultiAlphabet ma = to_multi_alphabet(a);
    if (t == 2) {
        return PeriodJoint::create(std::move(ma), 2, joint.px_vector(), joint.table());
    }
    if (t != 1) {
        throw validation_error("SchemaViolation", "two-outcome bridge supports t in {1,2}");
    }
    std::vector<double> marg(a.n_x() * a.n_y1(), 0.0);
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            marg[xi * a.n_y1() + i1] = joint.y1_marginal(xi, i1);
        }
    }
    return PeriodJoint::create(std::move(ma), 1, joint.px_vector(), std::move(marg));
}

}  // namespace shiftlab

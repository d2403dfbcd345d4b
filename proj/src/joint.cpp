#include "shiftlab/joint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shiftlab/errors.hpp"

namespace shiftlab {

double PredictorTable::max_abs_diff(const PredictorTable& other) const {
    if (values.size() != other.values.size()) {
        throw validation_error("DimensionMismatch", "predictor tables cover different supports");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        worst = std::max(worst, std::abs(values[i] - other.values[i]));
    }
    return worst;
}

ConditionalJoint::ConditionalJoint(Alphabet alphabet, std::vector<double> px,
                                   std::vector<double> table)
    : alphabet_(std::move(alphabet)), px_(std::move(px)), table_(std::move(table)) {}

ConditionalJoint ConditionalJoint::create(Alphabet alphabet, std::vector<double> px,
                                          std::vector<double> table) {
    const std::size_t nx = alphabet.n_x();
    const std::size_t cells = alphabet.n_cells();
    if (px.size() != nx || table.size() != nx * cells) {
        throw validation_error("DimensionMismatch",
                               "px/table dimensions do not match the alphabet");
    }
    for (std::size_t xi = 0; xi < nx; ++xi) {
        if (px[xi] < 0.0 || px[xi] > 1.0 || !std::isfinite(px[xi])) {
            throw validation_error("NegativeProbability",
                                   "px out of [0,1] at x=" + alphabet.x_label(xi));
        }
    }
    double px_sum = 0.0;
    for (double p : px) px_sum += p;
    if (px_sum <= 0.0) {
        throw validation_error("EmptySupport", "px has no mass");
    }
    if (std::abs(px_sum - 1.0) >= kInputTol) {
        throw validation_error("RowSumViolation",
                               "px sums to " + std::to_string(px_sum) + ", expected 1");
    }
    for (double& p : px) p /= px_sum;

    for (std::size_t xi = 0; xi < nx; ++xi) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            const double cell = table[xi * cells + c];
            if (cell < 0.0 || !std::isfinite(cell)) {
                throw validation_error("NegativeProbability",
                                       "table cell out of range at x=" + alphabet.x_label(xi));
            }
            row_sum += cell;
        }
        if (std::abs(row_sum - 1.0) >= kInputTol) {
            throw validation_error("RowSumViolation", "row for x=" + alphabet.x_label(xi) +
                                                          " sums to " + std::to_string(row_sum));
        }
        for (std::size_t c = 0; c < cells; ++c) table[xi * cells + c] /= row_sum;
    }
    return ConditionalJoint(std::move(alphabet), std::move(px), std::move(table));
}

ConditionalJoint ConditionalJoint::from_validated(Alphabet alphabet, std::vector<double> px,
                                                  std::vector<double> table) {
    const std::size_t nx = alphabet.n_x();
    const std::size_t cells = alphabet.n_cells();
    if (px.size() != nx || table.size() != nx * cells) {
        throw validation_error("DimensionMismatch",
                               "px/table dimensions do not match the alphabet");
    }
    for (std::size_t xi = 0; xi < nx; ++xi) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            const double cell = table[xi * cells + c];
            if (cell < 0.0 || cell > 1.0 || !std::isfinite(cell)) {
                throw validation_error("NegativeProbability",
                                       "cell out of [0,1] at x=" + alphabet.x_label(xi));
            }
            row_sum += cell;
        }
        if (std::abs(row_sum - 1.0) > 1e-10) {
            throw validation_error("RowSumViolation", "pre-normalized row for x=" +
                                                          alphabet.x_label(xi) + " sums to " +
                                                          std::to_string(row_sum));
        }
    }
    return ConditionalJoint(std::move(alphabet), std::move(px), std::move(table));
}

double ConditionalJoint::y1_marginal(std::size_t xi, std::size_t i1) const {
    const std::size_t n2 = alphabet_.n_y2();
    const double* base = table_.data() + (xi * alphabet_.n_y1() + i1) * n2;
    double sum = 0.0;
    for (std::size_t i2 = 0; i2 < n2; ++i2) sum += base[i2];
    return sum;
}

double ConditionalJoint::y2_marginal(std::size_t xi, std::size_t i2) const {
    double sum = 0.0;
    for (std::size_t i1 = 0; i1 < alphabet_.n_y1(); ++i1) sum += prob(xi, i1, i2);
    return sum;
}

bool ConditionalJoint::strictly_positive() const {
    return std::all_of(table_.begin(), table_.end(), [](double p) { return p > 0.0; });
}

bool ConditionalJoint::y1_marginals_positive() const {
    for (std::size_t xi = 0; xi < n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < n_y1(); ++i1) {
            if (y1_marginal(xi, i1) <= 0.0) return false;
        }
    }
    return true;
}

PredictorTable cond_mean_y2_given_x(const ConditionalJoint& joint) {
    const Alphabet& a = joint.alphabet();
    PredictorTable out{a.x_labels(), std::vector<double>(a.n_x(), 0.0)};
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        double mean = 0.0;
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                mean += a.y2_value(i2) * joint.prob(xi, i1, i2);
            }
        }
        out.values[xi] = mean;
    }
    return out;
}

PredictorTable cond_mean_y1_given_x(const ConditionalJoint& joint) {
    const Alphabet& a = joint.alphabet();
    PredictorTable out{a.x_labels(), std::vector<double>(a.n_x(), 0.0)};
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        double mean = 0.0;
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            mean += a.y1_value(i1) * joint.y1_marginal(xi, i1);
        }
        out.values[xi] = mean;
    }
    return out;
}

CondMeanTable cond_mean_y2_given_y1_x(const ConditionalJoint& joint) {
    const Alphabet& a = joint.alphabet();
    CondMeanTable out(a.n_x(), a.n_y1());
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            const double mass = joint.y1_marginal(xi, i1);
            if (mass == 0.0) continue;  // absent, not zero
            double mean = 0.0;
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                mean += a.y2_value(i2) * (joint.prob(xi, i1, i2) / mass);
            }
            out.at(xi, i1) = mean;
        }
    }
    return out;
}

ProxyScaling fit_proxy_scaling(const ConditionalJoint& joint) {
    const PredictorTable m1 = cond_mean_y1_given_x(joint);
    const PredictorTable m2 = cond_mean_y2_given_x(joint);
    double mean1 = 0.0, mean2 = 0.0;
    for (std::size_t xi = 0; xi < joint.n_x(); ++xi) {
        mean1 += joint.px(xi) * m1.values[xi];
        mean2 += joint.px(xi) * m2.values[xi];
    }
    double var1 = 0.0, cov = 0.0;
    for (std::size_t xi = 0; xi < joint.n_x(); ++xi) {
        const double d1 = m1.values[xi] - mean1;
        const double d2 = m2.values[xi] - mean2;
        var1 += joint.px(xi) * d1 * d1;
        cov += joint.px(xi) * d1 * d2;
    }
    // Threshold separates float noise in exactly-constant means from
    // genuinely small variation.
    const double degeneracy_eps = 1e-24 * std::max(1.0, mean1 * mean1);
    if (var1 <= degeneracy_eps) {
        return {1.0, mean2 - mean1, true};
    }
    const double slope = cov / var1;
    if (slope <= 0.0) {
        return {1.0, mean2 - mean1, true};
    }
    return {slope, mean2 - slope * mean1, false};
}

double proxy_objective(const ConditionalJoint& joint, double slope, double intercept) {
    const PredictorTable m1 = cond_mean_y1_given_x(joint);
    const PredictorTable m2 = cond_mean_y2_given_x(joint);
    double obj = 0.0;
    for (std::size_t xi = 0; xi < joint.n_x(); ++xi) {
        const double r = slope * m1.values[xi] + intercept - m2.values[xi];
        obj += joint.px(xi) * r * r;
    }
    return obj;
}

NoiseTerms noise_terms_weighted(const ConditionalJoint& joint, const ProxyScaling& scaling,
                                const std::vector<double>& x_weights) {
    const Alphabet& a = joint.alphabet();
    if (x_weights.size() != a.n_x()) {
        throw validation_error("DimensionMismatch", "x weights do not cover the alphabet");
    }
    const CondMeanTable q = cond_mean_y2_given_y1_x(joint);
    const PredictorTable m2 = cond_mean_y2_given_x(joint);

    NoiseTerms out;
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        const double w = x_weights[xi];
        double mean_diff = 0.0;  // E[Y2 - Y1~ | x]
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            const double y1t = scaling.slope * a.y1_value(i1) + scaling.intercept;
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                mean_diff += (a.y2_value(i2) - y1t) * joint.prob(xi, i1, i2);
            }
        }
        double nf = 0.0, nx = 0.0, pr = 0.0;
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            const double y1t = scaling.slope * a.y1_value(i1) + scaling.intercept;
            const auto& cell_mean = q.at(xi, i1);
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                const double p = joint.prob(xi, i1, i2);
                if (p == 0.0) continue;
                const double y2 = a.y2_value(i2);
                const double dx = y2 - m2.values[xi];
                nx += p * dx * dx;
                const double df = y2 - *cell_mean;
                nf += p * df * df;
                const double dr = y2 - y1t - mean_diff;
                pr += p * dr * dr;
            }
        }
        out.noise_full += w * nf;
        out.noise_x += w * nx;
        out.proxy_bias += w * mean_diff * mean_diff;
        out.proxy_resid += w * pr;
    }
    return out;
}

NoiseTerms noise_terms(const ConditionalJoint& joint, const ProxyScaling& scaling) {
    return noise_terms_weighted(joint, scaling, joint.px_vector());
}

}  // namespace shiftlab

#pragma once

#include <optional>
#include <vector>

#include "shiftlab/alphabet.hpp"

namespace shiftlab {

// Validation tolerances: loose on user input, tight on internal identities.
inline constexpr double kInputTol = 1e-9;
inline constexpr double kInternalTol = 1e-12;

// A prediction x -> real over the full covariate alphabet.
struct PredictorTable {
    std::vector<std::string> x_labels;
    std::vector<double> values;

    double max_abs_diff(const PredictorTable& other) const;
};

// Positive affine rescaling of the proxy outcome, Y1 -> slope*Y1 + intercept.
struct ProxyScaling {
    double slope = 1.0;
    double intercept = 0.0;
    bool degenerate = false;

    static ProxyScaling identity() { return {1.0, 0.0, false}; }
};

// Discrete P(x) together with P(y1,y2|x) over a shared alphabet. Immutable
// after construction; all probabilities validated and row-normalized.
class ConditionalJoint {
public:
    // Validating constructor. `table` is indexed [x][y1][y2] flattened
    // row-major; rows whose sums deviate from 1 by less than kInputTol are
    // renormalized, larger deviations are rejected.
    static ConditionalJoint create(Alphabet alphabet, std::vector<double> px,
                                   std::vector<double> table);

    // For already-normalized tables (generator output). Checks bounds and
    // row sums at the internal tolerance but does not renormalize, so the
    // caller's cells are preserved bit for bit.
    static ConditionalJoint from_validated(Alphabet alphabet, std::vector<double> px,
                                           std::vector<double> table);

    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t n_x() const { return alphabet_.n_x(); }
    std::size_t n_y1() const { return alphabet_.n_y1(); }
    std::size_t n_y2() const { return alphabet_.n_y2(); }

    double px(std::size_t xi) const { return px_[xi]; }
    const std::vector<double>& px_vector() const { return px_; }

    double prob(std::size_t xi, std::size_t i1, std::size_t i2) const {
        return table_[(xi * alphabet_.n_y1() + i1) * alphabet_.n_y2() + i2];
    }
    const double* row(std::size_t xi) const { return table_.data() + xi * alphabet_.n_cells(); }
    const std::vector<double>& table() const { return table_; }

    // P(Y1 = i1 | X = xi).
    double y1_marginal(std::size_t xi, std::size_t i1) const;
    // P(Y2 = i2 | X = xi).
    double y2_marginal(std::size_t xi, std::size_t i2) const;

    bool strictly_positive() const;
    bool y1_marginals_positive() const;

    // Same x support and identical level structure.
    bool same_alphabet(const ConditionalJoint& other) const {
        return alphabet_ == other.alphabet();
    }

private:
    ConditionalJoint(Alphabet alphabet, std::vector<double> px, std::vector<double> table);

    Alphabet alphabet_;
    std::vector<double> px_;
    std::vector<double> table_;
};

// Conditional means E[Y2 | Y1, X]; cells with P(y1|x) = 0 are absent, not 0.
class CondMeanTable {
public:
    CondMeanTable(std::size_t n_x, std::size_t n_y1)
        : n_x_(n_x), n_y1_(n_y1), cells_(n_x * n_y1) {}

    std::optional<double>& at(std::size_t xi, std::size_t i1) { return cells_[xi * n_y1_ + i1]; }
    const std::optional<double>& at(std::size_t xi, std::size_t i1) const {
        return cells_[xi * n_y1_ + i1];
    }
    std::size_t n_x() const { return n_x_; }
    std::size_t n_y1() const { return n_y1_; }

private:
    std::size_t n_x_;
    std::size_t n_y1_;
    std::vector<std::optional<double>> cells_;
};

struct NoiseTerms {
    double noise_full = 0.0;   // E[(Y2 - E[Y2|Y1,X])^2]
    double noise_x = 0.0;      // E[(Y2 - E[Y2|X])^2]
    double proxy_bias = 0.0;   // E[(E[Y2 - Y1~|X])^2]
    double proxy_resid = 0.0;  // E[(Y2 - Y1~ - E[Y2 - Y1~|X])^2]
};

// tau^A-style table: E[Y2 | X = x] for every x.
PredictorTable cond_mean_y2_given_x(const ConditionalJoint& joint);

// E[Y1 | X = x] for every x (used by the proxy predictor).
PredictorTable cond_mean_y1_given_x(const ConditionalJoint& joint);

CondMeanTable cond_mean_y2_given_y1_x(const ConditionalJoint& joint);

// px-weighted least squares of E[Y2|X] on E[Y1|X]. Falls back to slope 1 and
// a mean-matching intercept when the design is degenerate or the fitted
// slope is not strictly positive.
ProxyScaling fit_proxy_scaling(const ConditionalJoint& joint);

NoiseTerms noise_terms(const ConditionalJoint& joint, const ProxyScaling& scaling);

// Same terms under caller-chosen x weights (defaults elsewhere to px).
NoiseTerms noise_terms_weighted(const ConditionalJoint& joint, const ProxyScaling& scaling,
                                const std::vector<double>& x_weights);

// Objective of fit_proxy_scaling at a given (slope, intercept).
double proxy_objective(const ConditionalJoint& joint, double slope, double intercept);

}  // namespace shiftlab

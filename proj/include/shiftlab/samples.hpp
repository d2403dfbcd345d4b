#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shiftlab/joint.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

// One observed unit. The observability pattern follows the period:
// period -2 rows carry y1 and y2, period -1 rows carry y1 only, and
// period 0 rows carry covariates only.
struct SampleRow {
    int period = 0;
    std::string x;
    std::optional<std::string> y1;
    std::optional<std::string> y2;
};

struct SampleSet {
    std::vector<SampleRow> rows;

    // Throws SchemaViolation naming the first offending row (1-based).
    void check_pattern() const;

    std::size_t count_period(int period) const;
};

// Inverse-CDF draw of an index from a probability row.
std::size_t draw_categorical(const double* probs, std::size_t n, RngStream& rng);

// i.i.d. rows from the joint with the period's observability pattern.
SampleSet draw_samples(const ConditionalJoint& joint, int period, std::size_t n, RngStream& rng);

void append_samples(SampleSet& out, const ConditionalJoint& joint, int period, std::size_t n,
                    RngStream& rng);

// Shift induction by permutation: per round, a uniform random subset of
// floor(fraction*n) rows swaps covariate tokens among themselves (uniform
// permutation); outcomes stay attached to their rows.
SampleSet permute_covariates(const SampleSet& samples, double fraction, std::size_t rounds,
                             RngStream& rng);

// Per-cell tallies for one period of data, bound to an alphabet. The
// plug-in estimators only ever need these counts.
class EmpiricalCounts {
public:
    explicit EmpiricalCounts(const Alphabet& alphabet);

    static EmpiricalCounts from_samples(const SampleSet& samples, int period,
                                        const Alphabet& alphabet);

    void add_full(std::size_t xi, std::size_t i1, std::size_t i2);
    void add_proxy_only(std::size_t xi, std::size_t i1);
    void add_covariate_only(std::size_t xi);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t count_x(std::size_t xi) const { return x_counts_[xi]; }
    std::size_t count_xy1(std::size_t xi, std::size_t i1) const {
        return xy1_counts_[xi * n_y1_ + i1];
    }
    std::size_t count_cell(std::size_t xi, std::size_t i1, std::size_t i2) const {
        return cell_counts_[(xi * n_y1_ + i1) * n_y2_ + i2];
    }
    // Sum of y2 values over rows in (x, y1); only maintained for full rows.
    double sum_y2(std::size_t xi, std::size_t i1) const { return y2_sums_[xi * n_y1_ + i1]; }

    std::size_t n_x() const { return n_x_; }
    std::size_t n_y1() const { return n_y1_; }

private:
    std::size_t n_x_, n_y1_, n_y2_;
    std::size_t n_rows_ = 0;
    std::vector<std::size_t> x_counts_;
    std::vector<std::size_t> xy1_counts_;
    std::vector<std::size_t> cell_counts_;
    std::vector<double> y2_sums_;
};

// Sample-proportion first stage: cell means of Y2 over the period -2 data,
// with the per-x mean as fallback for empty cells.
struct FittedFirstStage {
    std::vector<std::optional<double>> q;  // [x * n_y1 + y1]
    std::vector<double> fallback;          // per x
    std::size_t n_y1 = 0;

    const std::optional<double>& at(std::size_t xi, std::size_t i1) const {
        return q[xi * n_y1 + i1];
    }
};

FittedFirstStage fit_first_stage(const EmpiricalCounts& m2, const Alphabet& alphabet);

PredictorTable hat_tau_A(const EmpiricalCounts& m2, const Alphabet& alphabet);
PredictorTable hat_tau_B(const EmpiricalCounts& m1, const Alphabet& alphabet,
                         const ProxyScaling& scaling);

struct HatTauCResult {
    PredictorTable table;
    std::vector<bool> flagged;
};

HatTauCResult hat_tau_C(const EmpiricalCounts& m2, const EmpiricalCounts& m1,
                        const Alphabet& alphabet);

// Proxy rescaling fit on period -2 empirical conditional means, weighted by
// empirical covariate shares; mirrors the population fit's fallback rules.
ProxyScaling fit_proxy_scaling_empirical(const EmpiricalCounts& m2, const Alphabet& alphabet);

// SampleSet-level wrappers (resolve labels against the alphabet first).
PredictorTable hat_tau_A(const SampleSet& samples, const Alphabet& alphabet);
PredictorTable hat_tau_B(const SampleSet& samples, const Alphabet& alphabet,
                         const ProxyScaling& scaling);
HatTauCResult hat_tau_C(const SampleSet& samples, const Alphabet& alphabet);

// Smallest alphabet covering every token in the data. Outcome labels must
// parse as finite reals; the parsed value doubles as the level value.
Alphabet induce_alphabet(const SampleSet& samples);

}  // namespace shiftlab

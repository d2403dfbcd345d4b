#include "shiftlab/samples.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "shiftlab/errors.hpp"

namespace shiftlab {

void SampleSet::check_pattern() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SampleRow& r = rows[i];
        const std::string where = "row " + std::to_string(i + 1);
        if (r.period > 0) {
            throw validation_error("SchemaViolation", where + ": period must be <= 0");
        }
        const bool want_y1 = r.period <= -1;
        const bool want_y2 = r.period <= -2;
        if (r.y1.has_value() != want_y1) {
            throw validation_error("SchemaViolation",
                                   where + ": y1 must be " +
                                       (want_y1 ? "present" : "absent") + " in period " +
                                       std::to_string(r.period));
        }
        if (r.y2.has_value() != want_y2) {
            throw validation_error("SchemaViolation",
                                   where + ": y2 must be " +
                                       (want_y2 ? "present" : "absent") + " in period " +
                                       std::to_string(r.period));
        }
    }
}

std::size_t SampleSet::count_period(int period) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(),
                      [&](const SampleRow& r) { return r.period == period; }));
}

std::size_t draw_categorical(const double* probs, std::size_t n, RngStream& rng) {
    const double u = rng.next_halfopen01();
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < n; ++c) {
        acc += probs[c];
        if (u < acc) return c;
    }
    return n - 1;
}

void append_samples(SampleSet& out, const ConditionalJoint& joint, int period, std::size_t n,
                    RngStream& rng) {
    const Alphabet& a = joint.alphabet();
    out.rows.reserve(out.rows.size() + n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t xi = draw_categorical(joint.px_vector().data(), a.n_x(), rng);
        SampleRow row;
        row.period = period;
        row.x = a.x_label(xi);
        if (period <= -1) {
            const std::size_t cell = draw_categorical(joint.row(xi), a.n_cells(), rng);
            const std::size_t i1 = cell / a.n_y2();
            const std::size_t i2 = cell % a.n_y2();
            row.y1 = a.y1_level(i1).label;
            if (period <= -2) row.y2 = a.y2_level(i2).label;
        }
        out.rows.push_back(std::move(row));
    }
}

SampleSet draw_samples(const ConditionalJoint& joint, int period, std::size_t n, RngStream& rng) {
    SampleSet out;
    append_samples(out, joint, period, n, rng);
    return out;
}

SampleSet permute_covariates(const SampleSet& samples, double fraction, std::size_t rounds,
                             RngStream& rng) {
    if (samples.rows.empty()) {
        throw validation_error("EmptySampleSet", "cannot permute an empty sample set");
    }
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw validation_error("SchemaViolation", "fraction must lie in [0,1]");
    }
    SampleSet out = samples;
    const std::size_t n = out.rows.size();
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    for (std::size_t round = 0; round < rounds; ++round) {
        if (k < 2) continue;  // nothing can move
        std::vector<std::size_t> chosen = rng.sample_indices(n, k);
        std::vector<std::string> tokens(k);
        for (std::size_t i = 0; i < k; ++i) tokens[i] = out.rows[chosen[i]].x;
        rng.shuffle(tokens);
        for (std::size_t i = 0; i < k; ++i) out.rows[chosen[i]].x = std::move(tokens[i]);
    }
    return out;
}

EmpiricalCounts::EmpiricalCounts(const Alphabet& alphabet)
    : n_x_(alphabet.n_x()),
      n_y1_(alphabet.n_y1()),
      n_y2_(alphabet.n_y2()),
      x_counts_(n_x_, 0),
      xy1_counts_(n_x_ * n_y1_, 0),
      cell_counts_(n_x_ * n_y1_ * n_y2_, 0),
      y2_sums_(n_x_ * n_y1_, 0.0) {}

void EmpiricalCounts::add_full(std::size_t xi, std::size_t i1, std::size_t i2) {
    ++n_rows_;
    ++x_counts_[xi];
    ++xy1_counts_[xi * n_y1_ + i1];
    ++cell_counts_[(xi * n_y1_ + i1) * n_y2_ + i2];
}

void EmpiricalCounts::add_proxy_only(std::size_t xi, std::size_t i1) {
    ++n_rows_;
    ++x_counts_[xi];
    ++xy1_counts_[xi * n_y1_ + i1];
}

void EmpiricalCounts::add_covariate_only(std::size_t xi) {
    ++n_rows_;
    ++x_counts_[xi];
}

namespace {

// Labels are matched verbatim first; numeric tokens that differ only in
// spelling ("1.50" vs "1.5") resolve through their parsed value.
std::optional<std::size_t> resolve_level(const std::vector<OutcomeLevel>& levels,
                                         std::optional<std::size_t> by_label,
                                         const std::string& token) {
    if (by_label) return by_label;
    double value = 0.0;
    const char* begin = token.data();
    auto [ptr, ec] = std::from_chars(begin, begin + token.size(), value);
    if (ec != std::errc{} || ptr != begin + token.size()) return std::nullopt;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].value == value) return i;
    }
    return std::nullopt;
}

}  // namespace

EmpiricalCounts EmpiricalCounts::from_samples(const SampleSet& samples, int period,
                                              const Alphabet& alphabet) {
    EmpiricalCounts out(alphabet);
    for (const SampleRow& r : samples.rows) {
        if (r.period != period) continue;
        const auto xi = alphabet.x_index(r.x);
        if (!xi) {
            throw validation_error("SchemaViolation", "unknown covariate token '" + r.x + "'");
        }
        if (r.y1 && r.y2) {
            const auto i1 = resolve_level(alphabet.y1_levels(), alphabet.y1_index(*r.y1), *r.y1);
            const auto i2 = resolve_level(alphabet.y2_levels(), alphabet.y2_index(*r.y2), *r.y2);
            if (!i1 || !i2) {
                throw validation_error("SchemaViolation", "unknown outcome level in samples");
            }
            out.add_full(*xi, *i1, *i2);
        } else if (r.y1) {
            const auto i1 = resolve_level(alphabet.y1_levels(), alphabet.y1_index(*r.y1), *r.y1);
            if (!i1) {
                throw validation_error("SchemaViolation", "unknown outcome level in samples");
            }
            out.add_proxy_only(*xi, *i1);
        } else {
            out.add_covariate_only(*xi);
        }
    }
    // y2 sums need level values; accumulate in a second pass over cells.
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < alphabet.n_y1(); ++i1) {
            double sum = 0.0;
            for (std::size_t i2 = 0; i2 < alphabet.n_y2(); ++i2) {
                sum += static_cast<double>(out.count_cell(xi, i1, i2)) * alphabet.y2_value(i2);
            }
            out.y2_sums_[xi * alphabet.n_y1() + i1] = sum;
        }
    }
    return out;
}

FittedFirstStage fit_first_stage(const EmpiricalCounts& m2, const Alphabet& alphabet) {
    FittedFirstStage out;
    out.n_y1 = alphabet.n_y1();
    out.q.assign(alphabet.n_x() * alphabet.n_y1(), std::nullopt);
    out.fallback.assign(alphabet.n_x(), 0.0);
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        if (m2.count_x(xi) == 0) {
            throw infeasible_error("MissingCovariateCell",
                                   "no period -2 rows for x=" + alphabet.x_label(xi));
        }
        double total = 0.0;
        for (std::size_t i1 = 0; i1 < alphabet.n_y1(); ++i1) {
            const std::size_t c = m2.count_xy1(xi, i1);
            if (c > 0) {
                out.q[xi * alphabet.n_y1() + i1] = m2.sum_y2(xi, i1) / static_cast<double>(c);
            }
            total += m2.sum_y2(xi, i1);
        }
        out.fallback[xi] = total / static_cast<double>(m2.count_x(xi));
    }
    return out;
}

PredictorTable hat_tau_A(const EmpiricalCounts& m2, const Alphabet& alphabet) {
    PredictorTable out{alphabet.x_labels(), std::vector<double>(alphabet.n_x(), 0.0)};
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        if (m2.count_x(xi) == 0) {
            throw infeasible_error("MissingCovariateCell",
                                   "no period -2 rows for x=" + alphabet.x_label(xi));
        }
        double total = 0.0;
        for (std::size_t i1 = 0; i1 < alphabet.n_y1(); ++i1) total += m2.sum_y2(xi, i1);
        out.values[xi] = total / static_cast<double>(m2.count_x(xi));
    }
    return out;
}

PredictorTable hat_tau_B(const EmpiricalCounts& m1, const Alphabet& alphabet,
                         const ProxyScaling& scaling) {
    PredictorTable out{alphabet.x_labels(), std::vector<double>(alphabet.n_x(), 0.0)};
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        if (m1.count_x(xi) == 0) {
            throw infeasible_error("MissingCovariateCell",
                                   "no period -1 rows for x=" + alphabet.x_label(xi));
        }
        double sum = 0.0;
        for (std::size_t i1 = 0; i1 < alphabet.n_y1(); ++i1) {
            sum += static_cast<double>(m1.count_xy1(xi, i1)) * alphabet.y1_value(i1);
        }
        const double mean = sum / static_cast<double>(m1.count_x(xi));
        out.values[xi] = scaling.slope * mean + scaling.intercept;
    }
    return out;
}

HatTauCResult hat_tau_C(const EmpiricalCounts& m2, const EmpiricalCounts& m1,
                        const Alphabet& alphabet) {
    const FittedFirstStage stage = fit_first_stage(m2, alphabet);
    HatTauCResult out{{alphabet.x_labels(), std::vector<double>(alphabet.n_x(), 0.0)},
                      std::vector<bool>(alphabet.n_x(), false)};
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        if (m1.count_x(xi) == 0) {
            throw infeasible_error("MissingCovariateCell",
                                   "no period -1 rows for x=" + alphabet.x_label(xi));
        }
        double acc = 0.0;
        for (std::size_t i1 = 0; i1 < alphabet.n_y1(); ++i1) {
            const std::size_t c = m1.count_xy1(xi, i1);
            if (c == 0) continue;
            const auto& q = stage.at(xi, i1);
            if (q.has_value()) {
                acc += static_cast<double>(c) * (*q);
            } else {
                acc += static_cast<double>(c) * stage.fallback[xi];
                out.flagged[xi] = true;
            }
        }
        out.table.values[xi] = acc / static_cast<double>(m1.count_x(xi));
    }
    return out;
}

ProxyScaling fit_proxy_scaling_empirical(const EmpiricalCounts& m2, const Alphabet& alphabet) {
    // Empirical conditional means weighted by covariate shares.
    std::vector<double> w(alphabet.n_x()), m1v(alphabet.n_x()), m2v(alphabet.n_x());
    double total_rows = 0.0;
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        if (m2.count_x(xi) == 0) {
            throw infeasible_error("MissingCovariateCell",
                                   "no period -2 rows for x=" + alphabet.x_label(xi));
        }
        total_rows += static_cast<double>(m2.count_x(xi));
    }
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        const double nx = static_cast<double>(m2.count_x(xi));
        w[xi] = nx / total_rows;
        double y1_sum = 0.0, y2_sum = 0.0;
        for (std::size_t i1 = 0; i1 < alphabet.n_y1(); ++i1) {
            y1_sum += static_cast<double>(m2.count_xy1(xi, i1)) * alphabet.y1_value(i1);
            y2_sum += m2.sum_y2(xi, i1);
        }
        m1v[xi] = y1_sum / nx;
        m2v[xi] = y2_sum / nx;
    }
    double mean1 = 0.0, mean2 = 0.0;
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        mean1 += w[xi] * m1v[xi];
        mean2 += w[xi] * m2v[xi];
    }
    double var1 = 0.0, cov = 0.0;
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        var1 += w[xi] * (m1v[xi] - mean1) * (m1v[xi] - mean1);
        cov += w[xi] * (m1v[xi] - mean1) * (m2v[xi] - mean2);
    }
    const double degeneracy_eps = 1e-24 * std::max(1.0, mean1 * mean1);
    if (var1 <= degeneracy_eps) return {1.0, mean2 - mean1, true};
    const double slope = cov / var1;
    if (slope <= 0.0) return {1.0, mean2 - mean1, true};
    return {slope, mean2 - slope * mean1, false};
}

PredictorTable hat_tau_A(const SampleSet& samples, const Alphabet& alphabet) {
    return hat_tau_A(EmpiricalCounts::from_samples(samples, -2, alphabet), alphabet);
}

PredictorTable hat_tau_B(const SampleSet& samples, const Alphabet& alphabet,
                         const ProxyScaling& scaling) {
    return hat_tau_B(EmpiricalCounts::from_samples(samples, -1, alphabet), alphabet, scaling);
}

HatTauCResult hat_tau_C(const SampleSet& samples, const Alphabet& alphabet) {
    return hat_tau_C(EmpiricalCounts::from_samples(samples, -2, alphabet),
                     EmpiricalCounts::from_samples(samples, -1, alphabet), alphabet);
}

namespace {

double parse_level_value(const std::string& token) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw validation_error("SchemaViolation",
                               "outcome level '" + token + "' is not a finite number");
    }
    return value;
}

}  // namespace

Alphabet induce_alphabet(const SampleSet& samples) {
    if (samples.rows.empty()) {
        throw validation_error("EmptySampleSet", "cannot induce an alphabet from no rows");
    }
    std::set<std::string> xs;
    std::set<double> y1s, y2s;
    for (const SampleRow& r : samples.rows) {
        xs.insert(r.x);
        if (r.y1) y1s.insert(parse_level_value(*r.y1));
        if (r.y2) y2s.insert(parse_level_value(*r.y2));
    }
    auto to_levels = [](const std::set<double>& values) {
        std::vector<OutcomeLevel> levels;
        levels.reserve(values.size());
        for (double v : values) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            levels.push_back({buf, v});
        }
        return levels;
    };
    if (y1s.empty()) y1s.insert(0.0);
    if (y2s.empty()) y2s.insert(0.0);
    return Alphabet(std::vector<std::string>(xs.begin(), xs.end()), to_levels(y1s),
                    to_levels(y2s));
}

}  // namespace shiftlab

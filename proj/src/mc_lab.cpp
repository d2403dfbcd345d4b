#include "shiftlab/mc_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shiftlab/errors.hpp"
#include "shiftlab/estimators.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/samples.hpp"

namespace shiftlab {

std::string to_string(XWeighting w) {
    return w == XWeighting::period_m2 ? "period_m2" : "uniform";
}

XWeighting x_weighting_from_string(const std::string& s) {
    if (s == "period_m2") return XWeighting::period_m2;
    if (s == "uniform") return XWeighting::uniform;
    throw validation_error("SchemaViolation", "unknown x_weighting '" + s + "'");
}

const MethodReport& MseReport::of(Method m) const {
    for (const auto& r : methods) {
        if (r.method == m) return r;
    }
    throw validation_error("SchemaViolation", "method missing from report");
}

bool MseReport::all_pass() const {
    return ordering_pass && std::all_of(methods.begin(), methods.end(),
                                        [](const MethodReport& r) { return r.pass; });
}

namespace {

std::vector<double> resolve_weights(const ConditionalJoint& joint, XWeighting mode) {
    if (mode == XWeighting::period_m2) return joint.px_vector();
    return std::vector<double>(joint.n_x(), 1.0 / static_cast<double>(joint.n_x()));
}

double weighted_sq_error(const PredictorTable& pred, const PredictorTable& target,
                         const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t xi = 0; xi < w.size(); ++xi) {
        const double d = pred.values[xi] - target.values[xi];
        acc += w[xi] * d * d;
    }
    return acc;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    MeanSe out;
    for (double v : values) out.mean += v;
    out.mean /= n;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        ss += d * d;
    }
    out.se = n > 1.0 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return out;
}

// Fraction of consecutive batches whose batch-mean of `lhs` is <= `rhs`.
double batched_le_fraction(const std::vector<double>& lhs, const std::vector<double>& rhs,
                           std::size_t batches) {
    const std::size_t per = lhs.size() / batches;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < batches; ++b) {
        double l = 0.0, r = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
            l += lhs[i];
            r += rhs[i];
        }
        if (l <= r) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(batches);
}

void check_config(const ExperimentConfig& config) {
    if (config.n_reps < 100) {
        throw validation_error("SchemaViolation", "n_reps must be at least 100");
    }
    validate_spec(config.spec_m2);
    validate_spec(config.spec_m1);
    if (config.batch_count < 1 || config.batch_count > config.n_reps) {
        throw validation_error("SchemaViolation", "batch_count must divide the replications");
    }
}

ShiftResult draw_stage(const ConditionalJoint& from, const ShiftSpec& spec, bool marginal_only,
                       RngStream& rng) {
    if (!marginal_only) return sample_shift(from, spec, rng);
    if (spec.kind == ShiftKind::asymmetric_marginal) {
        return sample_asymmetric_shift(from, spec.strength, spec.cross_x, rng);
    }
    return sample_paired_marginal_shift(from, spec.strength, rng);
}

void check_conditional_invariant(const ConditionalJoint& base, const ConditionalJoint& shifted) {
    const Alphabet& a = base.alphabet();
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            const double mb = base.y1_marginal(xi, i1);
            const double ms = shifted.y1_marginal(xi, i1);
            if (mb <= 0.0 || ms <= 0.0) continue;
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                const double cb = base.prob(xi, i1, i2) / mb;
                const double cs = shifted.prob(xi, i1, i2) / ms;
                if (std::abs(cb - cs) > kInternalTol) {
                    throw infeasible_error(
                        "GeneratorViolatesInvariantConditional",
                        "P(y2|y1,x) moved by " + std::to_string(std::abs(cb - cs)));
                }
            }
        }
    }
}

MseReport run_two_stage_experiment(const ExperimentConfig& config, bool marginal_only,
                                   bool with_theory) {
    check_config(config);
    const ConditionalJoint& base = config.base_joint;
    const std::vector<double> w = resolve_weights(base, config.x_weighting);
    const ProxyScaling scaling =
        config.fit_scaling ? fit_proxy_scaling(base) : ProxyScaling::identity();

    Theorem1Prediction theory{};
    if (with_theory) {
        theory = theorem1_predict_weighted(base, scaling, config.spec_m2.strength,
                                           config.spec_m1.strength, w);
    }

    const PredictorTable pred_a = tau_A(base);
    const std::size_t reps = config.n_reps;
    std::vector<double> err_a(reps), err_b(reps), err_c(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream rng = RngStream::substream(config.seed, r);
        const ShiftResult stage1 = draw_stage(base, config.spec_m2, marginal_only, rng);
        const ShiftResult stage2 = draw_stage(stage1.shifted, config.spec_m1, marginal_only, rng);
        if (marginal_only) check_conditional_invariant(base, stage2.shifted);

        const PredictorTable target = cond_mean_y2_given_x(stage2.shifted);
        const PredictorTable pred_b = tau_B(stage1.shifted, scaling);
        const PredictorTable pred_c = tau_C(base, stage1.shifted).table;
        err_a[r] = weighted_sq_error(pred_a, target, w);
        err_b[r] = weighted_sq_error(pred_b, target, w);
        err_c[r] = weighted_sq_error(pred_c, target, w);
    }

    const MeanSe sa = mean_and_se(err_a);
    const MeanSe sb = mean_and_se(err_b);
    const MeanSe sc = mean_and_se(err_c);

    MseReport report;
    auto push = [&](Method m, const MeanSe& s) {
        MethodReport mr;
        mr.method = m;
        mr.empirical_mse = s.mean;
        mr.mc_se = s.se;
        if (with_theory) {
            mr.theoretical = theory.of(m);
            mr.tolerance = mr.theoretical.cross_term_bound + 4.0 * s.se;
            mr.pass = std::abs(s.mean - mr.theoretical.total()) <= mr.tolerance;
        } else {
            mr.theoretical = MseBreakdown{m, 0, 0, 0, 0, 0};
            mr.tolerance = 0.0;
            mr.pass = true;
        }
        report.methods.push_back(mr);
    };
    push(Method::A, sa);
    push(Method::B_scaled, sb);
    push(Method::C, sc);

    if (with_theory) {
        report.batch_count = config.batch_count;
        report.ordering_fraction = batched_le_fraction(err_c, err_a, config.batch_count);
        report.ordering_pass = report.ordering_fraction >= 0.99;
    } else {
        // Theorem 2: mean ordering with combined standard errors.
        report.batch_count = 1;
        const double min_other = std::min(sa.mean, sb.mean);
        const double se_other = sa.mean <= sb.mean ? sa.se : sb.se;
        const double combined = std::sqrt(sc.se * sc.se + se_other * se_other);
        report.ordering_pass = sc.mean <= min_other + 4.0 * combined;
        report.ordering_fraction = report.ordering_pass ? 1.0 : 0.0;
    }
    return report;
}

}  // namespace

MseReport run_theorem1_experiment(const ExperimentConfig& config) {
    if (config.spec_m2.kind != ShiftKind::symmetric_dirichlet ||
        config.spec_m1.kind != ShiftKind::symmetric_dirichlet) {
        throw validation_error("SchemaViolation",
                               "theorem 1 verification needs symmetric_dirichlet on both stages");
    }
    if (!config.base_joint.strictly_positive()) {
        throw infeasible_error("ZeroCellInBase", "theorem 1 base joint must be strictly positive");
    }
    return run_two_stage_experiment(config, /*marginal_only=*/false, /*with_theory=*/true);
}

MseReport run_theorem2_experiment(const ExperimentConfig& config) {
    if (config.spec_m2.kind == ShiftKind::symmetric_dirichlet ||
        config.spec_m1.kind == ShiftKind::symmetric_dirichlet) {
        throw validation_error(
            "SchemaViolation",
            "theorem 2 verification needs marginal generators with an invariant conditional");
    }
    return run_two_stage_experiment(config, /*marginal_only=*/true, /*with_theory=*/false);
}

namespace {

struct VarianceSummary {
    double variance = 0.0;
    double variance_se = 0.0;  // delta-method
    double mean = 0.0;
    double mean_se = 0.0;
};

VarianceSummary summarize_estimates(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    VarianceSummary s;
    for (double v : values) s.mean += v;
    s.mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    s.variance = m2 * n / (n - 1.0);
    s.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    s.mean_se = std::sqrt(m2 / n);
    return s;
}

}  // namespace

FiniteSampleResult run_finite_sample_experiment(const ConditionalJoint& joint,
                                                const std::string& x, std::size_t n_m2,
                                                std::size_t n_m1, std::size_t n_reps,
                                                std::uint64_t seed,
                                                std::optional<std::pair<double, double>> beta) {
    if (n_m2 < 1000 || n_m1 < 1000) {
        throw validation_error("SchemaViolation", "finite-sample regime needs n >= 1000");
    }
    if (n_reps < 100) {
        throw validation_error("SchemaViolation", "n_reps must be at least 100");
    }
    const Alphabet& a = joint.alphabet();
    const auto xi = a.x_index(x);
    if (!xi) {
        throw infeasible_error("ZeroMassCovariate", "unknown covariate '" + x + "'");
    }
    const double rho = static_cast<double>(n_m1) / static_cast<double>(n_m2);
    const PredictorTable truth = cond_mean_y2_given_x(joint);
    const ProxyScaling beta_scaling =
        beta ? ProxyScaling{beta->first, beta->second, false} : ProxyScaling::identity();

    std::vector<double> est_a(n_reps), est_c(n_reps);
    std::vector<double> est_b;
    if (beta) est_b.resize(n_reps);

    for (std::size_t r = 0; r < n_reps; ++r) {
        RngStream rng = RngStream::substream(seed, r);
        EmpiricalCounts m2(a), m1(a);
        for (std::size_t i = 0; i < n_m2; ++i) {
            const std::size_t cx = draw_categorical(joint.px_vector().data(), a.n_x(), rng);
            const std::size_t cell = draw_categorical(joint.row(cx), a.n_cells(), rng);
            m2.add_full(cx, cell / a.n_y2(), cell % a.n_y2());
        }
        for (std::size_t i = 0; i < n_m1; ++i) {
            const std::size_t cx = draw_categorical(joint.px_vector().data(), a.n_x(), rng);
            const std::size_t cell = draw_categorical(joint.row(cx), a.n_cells(), rng);
            m1.add_proxy_only(cx, cell / a.n_y2());
        }
        est_a[r] = hat_tau_A(m2, a).values[*xi];
        est_c[r] = hat_tau_C(m2, m1, a).table.values[*xi];
        if (beta) est_b[r] = hat_tau_B(m1, a, beta_scaling).values[*xi];
    }

    const double n_total = static_cast<double>(n_m2 + n_m1);
    const double tau_x = truth.values[*xi];

    FiniteSampleResult out;
    out.rho = rho;
    out.n_total = n_m2 + n_m1;
    const VarianceSummary va = summarize_estimates(est_a);
    const VarianceSummary vc = summarize_estimates(est_c);
    out.n_var_A = n_total * va.variance;
    out.n_var_A_se = n_total * va.variance_se;
    out.n_var_C = n_total * vc.variance;
    out.n_var_C_se = n_total * vc.variance_se;
    out.bias_A = va.mean - tau_x;
    out.bias_A_se = va.mean_se;
    out.bias_C = vc.mean - tau_x;
    out.bias_C_se = vc.mean_se;
    if (beta) {
        const VarianceSummary vb = summarize_estimates(est_b);
        out.n_var_B = n_total * vb.variance;
        out.n_var_B_se = n_total * vb.variance_se;
        out.bias_B = vb.mean - tau_x;
        out.bias_B_se = vb.mean_se;
    }
    out.oracle = asymptotic_variances(joint, x, rho, beta.has_value());
    return out;
}

ConditionalJoint weaken_proxy(const ConditionalJoint& joint, double strength) {
    if (!(strength >= 0.0 && strength <= 1.0)) {
        throw validation_error("SchemaViolation", "proxy strength must lie in [0,1]");
    }
    const Alphabet& a = joint.alphabet();
    std::vector<double> table(joint.table().size());
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            const double marg1 = joint.y1_marginal(xi, i1);
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                const double product = marg1 * joint.y2_marginal(xi, i2);
                table[(xi * a.n_y1() + i1) * a.n_y2() + i2] =
                    strength * joint.prob(xi, i1, i2) + (1.0 - strength) * product;
            }
        }
    }
    return ConditionalJoint::create(a, joint.px_vector(), std::move(table));
}

std::vector<BenchmarkCell> run_permutation_benchmark(const PermutationBenchmarkConfig& config) {
    if (config.n_splits < 2) {
        throw validation_error("SchemaViolation", "need at least 2 splits");
    }
    for (double f : config.shift_grid) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw validation_error("SchemaViolation", "shift grid entries must lie in [0,1]");
        }
    }
    if (config.n_total < 30) {
        throw validation_error("SchemaViolation", "n_total too small to third");
    }
    const ConditionalJoint joint = weaken_proxy(config.joint, config.proxy_strength);
    const Alphabet& a = joint.alphabet();
    const PredictorTable truth = cond_mean_y2_given_x(joint);

    struct Acc {
        std::vector<double> mse;
        std::vector<double> r2;
    };
    const std::vector<std::string> methods{"A", "B_scaled", "C", "intercept"};
    std::vector<std::vector<Acc>> acc(config.shift_grid.size(),
                                      std::vector<Acc>(methods.size()));

    const std::size_t third = config.n_total / 3;
    for (std::size_t g = 0; g < config.shift_grid.size(); ++g) {
        const double fraction = config.shift_grid[g];
        for (std::size_t s = 0; s < config.n_splits; ++s) {
            RngStream rng = RngStream::substream(config.seed, g * config.n_splits + s);
            // One pool of full rows, shuffled into thirds.
            SampleSet pool = draw_samples(joint, -2, config.n_total, rng);
            rng.shuffle(pool.rows);

            SampleSet part_m2, part_m1, part_0;
            part_m2.rows.assign(pool.rows.begin(), pool.rows.begin() + third);
            part_m1.rows.assign(pool.rows.begin() + third, pool.rows.begin() + 2 * third);
            part_0.rows.assign(pool.rows.begin() + 2 * third, pool.rows.end());

            // Stronger shift for the older period: permuted twice.
            part_m2 = permute_covariates(part_m2, fraction, 2, rng);
            part_m1 = permute_covariates(part_m1, fraction, 1, rng);

            // Rebind periods: -1 keeps the proxy only, 0 keeps covariates.
            for (auto& r : part_m1.rows) {
                r.period = -1;
                r.y2.reset();
            }
            EmpiricalCounts m2 = EmpiricalCounts::from_samples(part_m2, -2, a);
            EmpiricalCounts m1 = EmpiricalCounts::from_samples(part_m1, -1, a);

            const ProxyScaling scaling = fit_proxy_scaling_empirical(m2, a);
            const PredictorTable ta = hat_tau_A(m2, a);
            const PredictorTable tb = hat_tau_B(m1, a, scaling);
            const PredictorTable tc = hat_tau_C(m2, m1, a).table;
            double intercept_value = 0.0;
            {
                double total = 0.0;
                for (std::size_t xi2 = 0; xi2 < a.n_x(); ++xi2) {
                    for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) total += m2.sum_y2(xi2, i1);
                }
                intercept_value = total / static_cast<double>(m2.n_rows());
            }

            // Score on the present-period covariate draw against the true
            // conditional means (noiseless synthetic target).
            double target_mean = 0.0;
            std::vector<std::size_t> eval_x;
            eval_x.reserve(part_0.rows.size());
            for (const auto& r : part_0.rows) {
                const auto exi = a.x_index(r.x);
                eval_x.push_back(*exi);
                target_mean += truth.values[*exi];
            }
            target_mean /= static_cast<double>(eval_x.size());
            double target_var = 0.0;
            for (std::size_t exi : eval_x) {
                const double d = truth.values[exi] - target_mean;
                target_var += d * d;
            }
            target_var /= static_cast<double>(eval_x.size());

            auto score = [&](const PredictorTable* table, double constant, Acc& into) {
                double mse = 0.0;
                for (std::size_t exi : eval_x) {
                    const double pred = table ? table->values[exi] : constant;
                    const double d = pred - truth.values[exi];
                    mse += d * d;
                }
                mse /= static_cast<double>(eval_x.size());
                into.mse.push_back(mse);
                into.r2.push_back(target_var > 0.0 ? 1.0 - mse / target_var : 0.0);
            };
            score(&ta, 0.0, acc[g][0]);
            score(&tb, 0.0, acc[g][1]);
            score(&tc, 0.0, acc[g][2]);
            score(nullptr, intercept_value, acc[g][3]);
        }
    }

    std::vector<BenchmarkCell> cells;
    for (std::size_t g = 0; g < config.shift_grid.size(); ++g) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const MeanSe mse = mean_and_se(acc[g][m].mse);
            const MeanSe r2 = mean_and_se(acc[g][m].r2);
            cells.push_back(
                {config.shift_grid[g], methods[m], mse.mean, mse.se, r2.mean, r2.se});
        }
    }
    return cells;
}

}  // namespace shiftlab

#include "shiftlab/shift.hpp"

#include <algorithm>
#include <cmath>

#include "shiftlab/errors.hpp"

namespace shiftlab {

std::string to_string(ShiftKind kind) {
    switch (kind) {
        case ShiftKind::symmetric_dirichlet: return "symmetric_dirichlet";
        case ShiftKind::asymmetric_marginal: return "asymmetric_marginal";
        case ShiftKind::paired_perturbation: return "paired_perturbation";
    }
    return "?";
}

std::string to_string(CrossXMode mode) {
    return mode == CrossXMode::independent ? "independent" : "shared_seed";
}

ShiftKind shift_kind_from_string(const std::string& s) {
    if (s == "symmetric_dirichlet") return ShiftKind::symmetric_dirichlet;
    if (s == "asymmetric_marginal") return ShiftKind::asymmetric_marginal;
    if (s == "paired_perturbation") return ShiftKind::paired_perturbation;
    throw validation_error("SchemaViolation", "unknown shift kind '" + s + "'");
}

CrossXMode cross_x_mode_from_string(const std::string& s) {
    if (s == "independent") return CrossXMode::independent;
    if (s == "shared_seed") return CrossXMode::shared_seed;
    throw validation_error("SchemaViolation", "unknown cross_x_mode '" + s + "'");
}

void validate_spec(const ShiftSpec& spec) {
    switch (spec.kind) {
        case ShiftKind::symmetric_dirichlet:
            if (!(spec.strength > 0.0 && spec.strength < 1.0)) {
                throw validation_error("KappaOutOfRange", "kappa must lie strictly in (0,1)");
            }
            break;
        case ShiftKind::asymmetric_marginal:
            if (!(spec.strength > 0.0 && spec.strength < 1.0)) {
                throw validation_error("ScaleOutOfRange", "scale must lie strictly in (0,1)");
            }
            break;
        case ShiftKind::paired_perturbation:
            if (!(spec.strength >= 0.0) || !std::isfinite(spec.strength)) {
                throw validation_error("ScaleOutOfRange", "magnitude must be finite and >= 0");
            }
            break;
    }
}

double ShiftDraw::max_abs() const {
    double worst = 0.0;
    for (double d : delta) worst = std::max(worst, std::abs(d));
    return worst;
}

double ShiftDraw::max_row_sum_abs() const {
    double worst = 0.0;
    for (std::size_t xi = 0; xi < n_x; ++xi) {
        double s = 0.0;
        for (std::size_t c = 0; c < n_cells; ++c) s += delta[xi * n_cells + c];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

namespace {

// Uniform blocks for per-row Dirichlet draws. shared_seed reuses one block
// across all x rows, which makes the underlying Gamma draws comonotone and
// correlates the shifts across x without touching per-x marginals.
std::vector<double> draw_uniform_blocks(RngStream& rng, CrossXMode mode, std::size_t n_x,
                                        std::size_t block) {
    std::vector<double> u(n_x * block);
    if (mode == CrossXMode::shared_seed) {
        for (std::size_t c = 0; c < block; ++c) u[c] = rng.next_open01();
        for (std::size_t xi = 1; xi < n_x; ++xi) {
            std::copy(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(block),
                      u.begin() + static_cast<std::ptrdiff_t>(xi * block));
        }
    } else {
        for (double& v : u) v = rng.next_open01();
    }
    return u;
}

ShiftResult make_result(const ConditionalJoint& base, std::vector<double> new_table) {
    ConditionalJoint shifted = ConditionalJoint::from_validated(base.alphabet(), base.px_vector(),
                                                                std::move(new_table));
    const std::size_t cells = base.alphabet().n_cells();
    ShiftDraw draw{base.n_x(), cells, std::vector<double>(base.n_x() * cells)};
    for (std::size_t i = 0; i < draw.delta.size(); ++i) {
        draw.delta[i] = shifted.table()[i] - base.table()[i];
    }
    return {std::move(draw), std::move(shifted)};
}

// For generators that produce the delta itself; the shifted table is
// base + delta, so the sign-flipped pair negates exactly.
ShiftResult make_result_from_delta(const ConditionalJoint& base, std::vector<double> delta) {
    const std::size_t cells = base.alphabet().n_cells();
    std::vector<double> new_table(base.table().size());
    for (std::size_t i = 0; i < new_table.size(); ++i) {
        new_table[i] = base.table()[i] + delta[i];
    }
    ConditionalJoint shifted = ConditionalJoint::from_validated(base.alphabet(), base.px_vector(),
                                                                std::move(new_table));
    return {ShiftDraw{base.n_x(), cells, std::move(delta)}, std::move(shifted)};
}

// Largest feasible magnitude for a two-sided move at cell p: both p + m and
// p - m must stay in [0,1] after rounding.
double two_sided_step(double p, double desired) {
    double m = std::min(desired, std::min(p, 1.0 - p));
    if (m < 0.0) m = 0.0;
    while (m > 0.0 && (p + m > 1.0 || p - m < 0.0)) {
        m = std::nextafter(m, 0.0);
    }
    return m;
}

}  // namespace

ShiftResult sample_symmetric_shift(const ConditionalJoint& base, double kappa, CrossXMode mode,
                                   RngStream& rng) {
    if (!(kappa > 0.0 && kappa < 1.0)) {
        throw validation_error("KappaOutOfRange", "kappa must lie strictly in (0,1)");
    }
    const Alphabet& a = base.alphabet();
    const std::size_t cells = a.n_cells();
    for (std::size_t xi = 0; xi < base.n_x(); ++xi) {
        for (std::size_t c = 0; c < cells; ++c) {
            if (base.row(xi)[c] <= 0.0) {
                throw infeasible_error(
                    "ZeroCellInBase",
                    "Dirichlet base must be strictly positive; zero cell at x=" + a.x_label(xi));
            }
        }
    }
    const double alpha = (1.0 - kappa) / kappa;
    const std::vector<double> uniforms = draw_uniform_blocks(rng, mode, base.n_x(), cells);

    std::vector<double> new_table(base.n_x() * cells);
    std::vector<double> conc(cells), row(cells);
    for (std::size_t xi = 0; xi < base.n_x(); ++xi) {
        for (std::size_t c = 0; c < cells; ++c) conc[c] = alpha * base.row(xi)[c];
        dirichlet_from_uniforms(conc, uniforms.data() + xi * cells, row);
        std::copy(row.begin(), row.end(), new_table.begin() + static_cast<std::ptrdiff_t>(xi * cells));
    }
    return make_result(base, std::move(new_table));
}

ShiftResult sample_asymmetric_shift(const ConditionalJoint& base, double scale, CrossXMode mode,
                                    RngStream& rng) {
    if (!(scale > 0.0 && scale < 1.0)) {
        throw validation_error("ScaleOutOfRange", "scale must lie strictly in (0,1)");
    }
    const Alphabet& a = base.alphabet();
    const std::size_t n1 = a.n_y1();
    const std::size_t n2 = a.n_y2();
    for (std::size_t xi = 0; xi < base.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            if (base.y1_marginal(xi, i1) <= 0.0) {
                throw infeasible_error("ZeroMarginalCell",
                                       "P(y1|x) must be strictly positive at x=" + a.x_label(xi));
            }
        }
    }
    const double alpha = (1.0 - scale) / scale;
    const std::vector<double> uniforms = draw_uniform_blocks(rng, mode, base.n_x(), n1);

    std::vector<double> new_table(base.n_x() * a.n_cells());
    std::vector<double> conc(n1), new_marg(n1);
    for (std::size_t xi = 0; xi < base.n_x(); ++xi) {
        std::vector<double> marg(n1);
        for (std::size_t i1 = 0; i1 < n1; ++i1) marg[i1] = base.y1_marginal(xi, i1);
        for (std::size_t i1 = 0; i1 < n1; ++i1) conc[i1] = alpha * marg[i1];
        dirichlet_from_uniforms(conc, uniforms.data() + xi * n1, new_marg);
        // Recombine with the unchanged conditional P(y2|y1,x).
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                const double cond = base.prob(xi, i1, i2) / marg[i1];
                new_table[(xi * n1 + i1) * n2 + i2] = new_marg[i1] * cond;
            }
        }
    }
    return make_result(base, std::move(new_table));
}

ShiftResult sample_paired_perturbation(const ConditionalJoint& base, double magnitude,
                                       RngStream& rng, std::optional<int> forced_sign) {
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw validation_error("ScaleOutOfRange", "magnitude must be finite and >= 0");
    }
    const std::size_t cells = base.alphabet().n_cells();
    std::vector<double> delta(base.n_x() * cells, 0.0);
    std::vector<double> dir(cells);
    for (std::size_t xi = 0; xi < base.n_x(); ++xi) {
        for (std::size_t c = 0; c + 1 < cells; ++c) dir[c] = rng.next_normal();
        // Last coordinate balances the rest so the row sum of the
        // direction is exactly zero in floating point.
        double partial = 0.0;
        for (std::size_t c = 0; c + 1 < cells; ++c) partial += dir[c];
        dir[cells - 1] = -partial;

        double max_abs = 0.0;
        for (double d : dir) max_abs = std::max(max_abs, std::abs(d));
        const int sign = forced_sign ? *forced_sign : (rng.next_below(2) == 0 ? 1 : -1);
        if (max_abs == 0.0) continue;
        for (double& d : dir) d /= max_abs;

        // Largest eps <= magnitude keeping both p+eps*d and p-eps*d in [0,1].
        double eps = magnitude;
        const double* p = base.row(xi);
        for (std::size_t c = 0; c < cells; ++c) {
            if (dir[c] == 0.0) continue;
            eps = std::min(eps, std::min(p[c], 1.0 - p[c]) / std::abs(dir[c]));
        }
        for (std::size_t c = 0; c < cells; ++c) {
            const double m = two_sided_step(p[c], eps * std::abs(dir[c]));
            delta[xi * cells + c] = (dir[c] < 0.0 ? -sign : sign) * m;
        }
    }
    return make_result_from_delta(base, std::move(delta));
}

ShiftResult sample_paired_marginal_shift(const ConditionalJoint& base, double magnitude,
                                         RngStream& rng, std::optional<int> forced_sign) {
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw validation_error("ScaleOutOfRange", "magnitude must be finite and >= 0");
    }
    const Alphabet& a = base.alphabet();
    const std::size_t n1 = a.n_y1();
    const std::size_t n2 = a.n_y2();
    std::vector<double> new_table(base.n_x() * a.n_cells());
    std::vector<double> dir(n1);
    for (std::size_t xi = 0; xi < base.n_x(); ++xi) {
        std::vector<double> marg(n1);
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            marg[i1] = base.y1_marginal(xi, i1);
            if (marg[i1] <= 0.0) {
                throw infeasible_error("ZeroMarginalCell",
                                       "P(y1|x) must be strictly positive at x=" + a.x_label(xi));
            }
        }
        for (std::size_t c = 0; c + 1 < n1; ++c) dir[c] = rng.next_normal();
        double partial = 0.0;
        for (std::size_t c = 0; c + 1 < n1; ++c) partial += dir[c];
        dir[n1 - 1] = -partial;
        double max_abs = 0.0;
        for (double d : dir) max_abs = std::max(max_abs, std::abs(d));
        const int sign = forced_sign ? *forced_sign : (rng.next_below(2) == 0 ? 1 : -1);

        std::vector<double> new_marg(marg);
        if (max_abs > 0.0) {
            for (double& d : dir) d /= max_abs;
            double eps = magnitude;
            for (std::size_t c = 0; c < n1; ++c) {
                if (dir[c] == 0.0) continue;
                eps = std::min(eps, std::min(marg[c], 1.0 - marg[c]) / std::abs(dir[c]));
            }
            for (std::size_t c = 0; c < n1; ++c) {
                const double m = two_sided_step(marg[c], eps * std::abs(dir[c]));
                new_marg[c] = marg[c] + (dir[c] < 0.0 ? -sign : sign) * m;
            }
        }
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                const double cond = base.prob(xi, i1, i2) / marg[i1];
                new_table[(xi * n1 + i1) * n2 + i2] = new_marg[i1] * cond;
            }
        }
    }
    return make_result(base, std::move(new_table));
}

ShiftResult sample_shift(const ConditionalJoint& base, const ShiftSpec& spec, RngStream& rng) {
    validate_spec(spec);
    switch (spec.kind) {
        case ShiftKind::symmetric_dirichlet:
            return sample_symmetric_shift(base, spec.strength, spec.cross_x, rng);
        case ShiftKind::asymmetric_marginal:
            return sample_asymmetric_shift(base, spec.strength, spec.cross_x, rng);
        case ShiftKind::paired_perturbation:
            return sample_paired_perturbation(base, spec.strength, rng);
    }
    throw validation_error("SchemaViolation", "unreachable shift kind");
}

bool ValidationReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ValidationRow& r) { return r.pass; });
}

bool ValidationReport::all_pass(const std::string& statistic) const {
    return std::all_of(rows.begin(), rows.end(), [&](const ValidationRow& r) {
        return r.statistic != statistic || r.pass;
    });
}

bool ValidationReport::any_fail(const std::string& statistic) const {
    return std::any_of(rows.begin(), rows.end(), [&](const ValidationRow& r) {
        return r.statistic == statistic && !r.pass;
    });}

namespace {

struct MomentSummary {
    double mean = 0.0;
    double mean_se = 0.0;
    double var = 0.0;
    double var_se = 0.0;
};

MomentSummary summarize(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    MomentSummary s;
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
    s.var = m2 * n / (n - 1.0);
    s.mean_se = std::sqrt(m2 / n);
    // Delta-method SE for the sample variance.
    s.var_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    return s;
}

bool within(double empirical, double theoretical, double se) {
    if (se == 0.0) return empirical == theoretical;
    return std::abs(empirical - theoretical) <= 4.0 * se;
}

}  // namespace

ValidationReport validate_generator(const ShiftSpec& spec, const ConditionalJoint& base,
                                    std::size_t n_draws, RngStream& rng) {
    validate_spec(spec);
    if (n_draws < 1000) {
        throw validation_error("SchemaViolation", "validate_generator needs n_draws >= 1000");
    }
    const Alphabet& a = base.alphabet();
    const std::size_t cells = a.n_cells();
    const std::size_t nx = base.n_x();

    // Store all draws; two-pass moments are simpler and exact.
    std::vector<std::vector<double>> samples(nx * cells, std::vector<double>(n_draws));
    for (std::size_t d = 0; d < n_draws; ++d) {
        const ShiftResult res = sample_shift(base, spec, rng);
        for (std::size_t xi = 0; xi < nx; ++xi) {
            for (std::size_t c = 0; c < cells; ++c) {
                samples[xi * cells + c][d] = res.draw.at(xi, c);
            }
        }
    }

    auto cell_name = [&](std::size_t c) {
        const std::size_t i1 = c / a.n_y2();
        const std::size_t i2 = c % a.n_y2();
        return "(" + a.y1_level(i1).label + "," + a.y2_level(i2).label + ")";
    };

    const double kappa = spec.strength;
    ValidationReport report;
    std::vector<double> union_values(n_draws), products(n_draws);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        const double* p = base.row(xi);
        for (std::size_t c = 0; c < cells; ++c) {
            const MomentSummary s = summarize(samples[xi * cells + c]);
            report.rows.push_back({a.x_label(xi), cell_name(c), "mean", s.mean, s.mean_se, 0.0,
                                   within(s.mean, 0.0, s.mean_se)});
            const double theory_var = kappa * p[c] * (1.0 - p[c]);
            report.rows.push_back({a.x_label(xi), cell_name(c), "var", s.var, s.var_se, theory_var,
                                   within(s.var, theory_var, s.var_se)});
        }
        for (std::size_t ca = 0; ca < cells; ++ca) {
            for (std::size_t cb = ca + 1; cb < cells; ++cb) {
                const auto& sa = samples[xi * cells + ca];
                const auto& sb = samples[xi * cells + cb];
                for (std::size_t d = 0; d < n_draws; ++d) union_values[d] = sa[d] + sb[d];
                const MomentSummary su = summarize(union_values);
                const double pu = p[ca] + p[cb];
                const double theory_var = kappa * pu * (1.0 - pu);
                report.rows.push_back({a.x_label(xi), cell_name(ca) + "+" + cell_name(cb), "var",
                                       su.var, su.var_se, theory_var,
                                       within(su.var, theory_var, su.var_se)});

                double mean_a = 0.0, mean_b = 0.0;
                for (std::size_t d = 0; d < n_draws; ++d) {
                    mean_a += sa[d];
                    mean_b += sb[d];
                }
                mean_a /= static_cast<double>(n_draws);
                mean_b /= static_cast<double>(n_draws);
                for (std::size_t d = 0; d < n_draws; ++d) {
                    products[d] = (sa[d] - mean_a) * (sb[d] - mean_b);
                }
                const MomentSummary sp = summarize(products);
                const double theory_cov = -kappa * p[ca] * p[cb];
                report.rows.push_back({a.x_label(xi), cell_name(ca) + "," + cell_name(cb), "cov",
                                       sp.mean, sp.mean_se, theory_cov,
                                       within(sp.mean, theory_cov, sp.mean_se)});
            }
        }
    }
    return report;
}

}  // namespace shiftlab

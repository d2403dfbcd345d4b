#include "shiftlab/theory.hpp"

#include "shiftlab/errors.hpp"

namespace shiftlab {

std::string to_string(Method m) {
    switch (m) {
        case Method::A: return "A";
        case Method::B_scaled: return "B_scaled";
        case Method::C: return "C";
    }
    return "?";
}

const MseBreakdown& Theorem1Prediction::of(Method m) const {
    switch (m) {
        case Method::A: return a;
        case Method::B_scaled: return b_scaled;
        case Method::C: return c;
    }
    return a;
}

Theorem1Prediction theorem1_predict_weighted(const ConditionalJoint& joint_m2,
                                             const ProxyScaling& scaling, double kappa_m2,
                                             double kappa_m1,
                                             const std::vector<double>& x_weights) {
    if (!(kappa_m2 > 0.0 && kappa_m2 < 1.0) || !(kappa_m1 > 0.0 && kappa_m1 < 1.0)) {
        throw validation_error("KappaOutOfRange", "both kappas must lie strictly in (0,1)");
    }
    const NoiseTerms n = noise_terms_weighted(joint_m2, scaling, x_weights);
    const double k1 = kappa_m1 * n.noise_x;
    const double cross = n.noise_x * kappa_m1 * kappa_m2;

    Theorem1Prediction out;
    out.a = {Method::A, kappa_m2 * n.noise_x, k1, 0.0, 0.0, cross};
    out.c = {Method::C, kappa_m2 * n.noise_full, k1, 0.0, 0.0, cross};
    out.b_scaled = {Method::B_scaled, 0.0, k1, n.proxy_bias, kappa_m2 * n.proxy_resid, cross};
    return out;
}

Theorem1Prediction theorem1_predict(const ConditionalJoint& joint_m2, const ProxyScaling& scaling,
                                    double kappa_m2, double kappa_m1) {
    return theorem1_predict_weighted(joint_m2, scaling, kappa_m2, kappa_m1,
                                     joint_m2.px_vector());
}

ConditionalVarPieces conditional_var_pieces(const ConditionalJoint& joint, std::size_t xi) {
    const Alphabet& a = joint.alphabet();
    const PredictorTable m2 = cond_mean_y2_given_x(joint);
    const CondMeanTable q = cond_mean_y2_given_y1_x(joint);

    ConditionalVarPieces out;
    for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
        const auto& cell = q.at(xi, i1);
        for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
            const double p = joint.prob(xi, i1, i2);
            if (p == 0.0) continue;
            const double y2 = a.y2_value(i2);
            const double d = y2 - m2.values[xi];
            out.var_y2 += p * d * d;
            const double s = *cell - m2.values[xi];
            out.var_stage += p * s * s;
            const double r = y2 - *cell;
            out.var_resid += p * r * r;
        }
    }
    return out;
}

double AsymptoticVariances::sigma2_B_checked() const {
    if (!has_sigma2_B) {
        throw validation_error("LinearProxyNotAsserted",
                               "sigma2_B requires the linear proxy assumption to be asserted");
    }
    return sigma2_B;
}

AsymptoticVariances asymptotic_variances(const ConditionalJoint& joint, const std::string& x,
                                         double rho, bool linear_proxy) {
    if (!(rho > 0.0)) {
        throw validation_error("SchemaViolation", "rho must be strictly positive");
    }
    const auto xi = joint.alphabet().x_index(x);
    if (!xi) {
        throw validation_error("ZeroMassCovariate", "unknown covariate '" + x + "'");
    }
    const double px = joint.px(*xi);
    if (px <= 0.0) {
        throw infeasible_error("ZeroMassCovariate", "P(X=" + x + ") must be positive");
    }
    const ConditionalVarPieces v = conditional_var_pieces(joint, *xi);

    AsymptoticVariances out;
    out.rho = rho;
    out.at_x = x;
    out.sigma2_A = (1.0 + rho) * v.var_y2 / px;
    out.sigma2_C = ((1.0 + rho) / rho) * v.var_stage / px + (1.0 + rho) * v.var_resid / px;
    if (linear_proxy) {
        out.sigma2_B = ((1.0 + rho) / rho) * v.var_stage / px;
        out.has_sigma2_B = true;
    }
    return out;
}

}  // namespace shiftlab

#pragma once

#include <string>
#include <vector>

#include "shiftlab/joint.hpp"

namespace shiftlab {

enum class Method { A, B_scaled, C };

std::string to_string(Method m);

// Closed-form MSE prediction for one method under symmetric shifts:
// the kappa_{-2}-scaled sensitivity term, the common K1 term, the two
// proxy-only terms, and the documented bound on the omitted
// O(kappa_{-1} kappa_{-2}) remainder.
struct MseBreakdown {
    Method method = Method::A;
    double term_shift_m2 = 0.0;
    double term_k1 = 0.0;
    double term_proxy_bias = 0.0;
    double term_proxy_resid = 0.0;
    double cross_term_bound = 0.0;

    double total() const {
        return term_shift_m2 + term_k1 + term_proxy_bias + term_proxy_resid;
    }
};

struct Theorem1Prediction {
    MseBreakdown a;
    MseBreakdown b_scaled;
    MseBreakdown c;

    const MseBreakdown& of(Method m) const;
};

// MSE components from the noise terms of the period -2 joint:
//   MSE_A = kappa_m2 * noise_x + K1
//   MSE_C = kappa_m2 * noise_full + K1
//   MSE_B = proxy_bias + kappa_m2 * proxy_resid + K1
// with K1 = kappa_m1 * noise_x and remainder bound noise_x*kappa_m1*kappa_m2.
Theorem1Prediction theorem1_predict(const ConditionalJoint& joint_m2, const ProxyScaling& scaling,
                                    double kappa_m2, double kappa_m1);

Theorem1Prediction theorem1_predict_weighted(const ConditionalJoint& joint_m2,
                                             const ProxyScaling& scaling, double kappa_m2,
                                             double kappa_m1,
                                             const std::vector<double>& x_weights);

// Limits of n * Var(estimator at x) in the no-shift sampling regime with
// n_{-1}/n_{-2} -> rho. sigma2_B is only meaningful under an affine
// conditional mean E[Y2|Y1,X=x], which the caller must assert.
struct AsymptoticVariances {
    double rho = 1.0;
    double sigma2_A = 0.0;
    double sigma2_B = 0.0;  // valid only when linear_proxy was asserted
    double sigma2_C = 0.0;
    bool has_sigma2_B = false;
    std::string at_x;

    // Throws LinearProxyNotAsserted unless the caller vouched for an
    // affine conditional mean when computing the record.
    double sigma2_B_checked() const;
};

AsymptoticVariances asymptotic_variances(const ConditionalJoint& joint, const std::string& x,
                                         double rho, bool linear_proxy);

// Decomposition pieces shared by the variance formulas, exposed for tests:
// Var(Y2|x), Var(E[Y2|Y1,X]|x), Var(Y2 - E[Y2|Y1,X]|x).
struct ConditionalVarPieces {
    double var_y2 = 0.0;
    double var_stage = 0.0;
    double var_resid = 0.0;
};

ConditionalVarPieces conditional_var_pieces(const ConditionalJoint& joint, std::size_t xi);

}  // namespace shiftlab

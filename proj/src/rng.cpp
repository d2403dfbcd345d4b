#include "shiftlab/rng.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <cmath>

#include "shiftlab/errors.hpp"

namespace shiftlab {

std::vector<std::size_t> RngStream::sample_indices(std::size_t n, std::size_t k) {
    if (k > n) {
        throw validation_error("DimensionMismatch", "cannot sample more indices than available");
    }
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // Partial Fisher-Yates: first k entries become the sample.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

double gamma_quantile(double shape, double u) {
    const boost::math::gamma_distribution<double> dist(shape, 1.0);
    return boost::math::quantile(dist, u);
}

void dirichlet_from_uniforms(const std::vector<double>& alpha, const double* uniforms,
                             std::vector<double>& out) {
    out.resize(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = gamma_quantile(alpha[i], uniforms[i]);
        total += out[i];
    }
    if (total <= 0.0) {
        // All gammas underflowed; fall back to the concentration mean.
        double alpha_sum = 0.0;
        for (double a : alpha) alpha_sum += a;
        for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i] / alpha_sum;
        return;
    }
    for (double& v : out) v /= total;
}

}  // namespace shiftlab

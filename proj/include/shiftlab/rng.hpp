#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace shiftlab {

// Seed mixing for derived streams (Vigna's splitmix64).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seeded uniform stream. The engine is the standard-specified mt19937_64,
// but all variate transforms are done here so draws depend only on this
// code, not on library-specific distribution implementations. Replications
// that run in parallel must each own a substream; see substream().
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t s = seed;
        gen_.seed(splitmix64(s));
    }

    // Independent stream for replication `index` of a seeded experiment.
    static RngStream substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        const std::uint64_t a = splitmix64(s);
        s = a ^ (index + 0x632BE59BD9B4E019ULL);
        return RngStream(splitmix64(s));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1); safe as a quantile argument.
    double next_open01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on [0,1).
    double next_halfopen01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Marsaglia's polar method (second value cached).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_open01() - 1.0;
            v = 2.0 * next_open01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // k distinct indices from [0, n), order randomized.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Gamma(shape, 1) quantile; used to build Dirichlet draws with a fixed
// uniform-consumption pattern (one uniform per cell) so comonotone
// cross-x coupling is well defined.
double gamma_quantile(double shape, double u);

// One Dirichlet draw with concentration vector `alpha`, writing into `out`.
// Consumes exactly alpha.size() uniforms from `uniforms`.
void dirichlet_from_uniforms(const std::vector<double>& alpha, const double* uniforms,
                             std::vector<double>& out);

}  // namespace shiftlab

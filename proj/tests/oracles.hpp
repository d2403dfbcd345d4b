#pragma once

// Test-only oracles, independent of the library's computation paths:
// brute-force enumeration, plug-in information measures, and random
// fixture generators.

#include <cmath>
#include <map>
#include <vector>

#include "shiftlab/joint.hpp"
#include "shiftlab/multi_period.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/samples.hpp"

#include "shiftlab/errors.hpp"

namespace shiftlab::testing {

// Runs f and reports the kind of the shiftlab::Error it throws ("" if none).
template <class F>
std::string thrown_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    } catch (...) {
        return "<other>";
    }
    return "";
}

inline std::vector<OutcomeLevel> indexed_levels(std::size_t n, double step = 1.0) {
    std::vector<OutcomeLevel> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({std::to_string(i), step * static_cast<double>(i)});
    }
    return out;
}

inline Alphabet small_alphabet(std::size_t nx, std::size_t n1, std::size_t n2) {
    std::vector<std::string> xs;
    for (std::size_t i = 0; i < nx; ++i) xs.push_back("x" + std::to_string(i));
    return Alphabet(std::move(xs), indexed_levels(n1), indexed_levels(n2));
}

// Strictly positive random joint; cells floored away from zero.
inline ConditionalJoint random_joint(RngStream& rng, std::size_t nx, std::size_t n1,
                                     std::size_t n2, double floor = 0.05) {
    Alphabet a = small_alphabet(nx, n1, n2);
    std::vector<double> px(nx);
    double px_sum = 0.0;
    for (double& p : px) {
        p = floor + rng.next_open01();
        px_sum += p;
    }
    for (double& p : px) p /= px_sum;
    std::vector<double> table(nx * n1 * n2);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < n1 * n2; ++c) {
            table[xi * n1 * n2 + c] = floor + rng.next_open01();
            row_sum += table[xi * n1 * n2 + c];
        }
        for (std::size_t c = 0; c < n1 * n2; ++c) table[xi * n1 * n2 + c] /= row_sum;
    }
    return ConditionalJoint::create(std::move(a), std::move(px), std::move(table));
}

// Rows are products P(y1|x) * P(y2|x): Y1 and Y2 independent given X.
inline ConditionalJoint random_cond_indep_joint(RngStream& rng, std::size_t nx, std::size_t n1,
                                                std::size_t n2) {
    Alphabet a = small_alphabet(nx, n1, n2);
    std::vector<double> px(nx);
    double px_sum = 0.0;
    for (double& p : px) {
        p = 0.05 + rng.next_open01();
        px_sum += p;
    }
    for (double& p : px) p /= px_sum;
    std::vector<double> table(nx * n1 * n2);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        std::vector<double> p1(n1), p2(n2);
        double s1 = 0.0, s2 = 0.0;
        for (double& v : p1) {
            v = 0.05 + rng.next_open01();
            s1 += v;
        }
        for (double& v : p2) {
            v = 0.05 + rng.next_open01();
            s2 += v;
        }
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                table[(xi * n1 + i1) * n2 + i2] = (p1[i1] / s1) * (p2[i2] / s2);
            }
        }
    }
    return ConditionalJoint::create(std::move(a), std::move(px), std::move(table));
}

// All mass on the diagonal with matching level values: Y1 == Y2 cellwise.
inline ConditionalJoint random_diagonal_joint(RngStream& rng, std::size_t nx, std::size_t k) {
    Alphabet a = small_alphabet(nx, k, k);
    std::vector<double> px(nx);
    double px_sum = 0.0;
    for (double& p : px) {
        p = 0.05 + rng.next_open01();
        px_sum += p;
    }
    for (double& p : px) p /= px_sum;
    std::vector<double> table(nx * k * k, 0.0);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        std::vector<double> diag(k);
        double s = 0.0;
        for (double& v : diag) {
            v = 0.05 + rng.next_open01();
            s += v;
        }
        for (std::size_t i = 0; i < k; ++i) table[(xi * k + i) * k + i] = diag[i] / s;
    }
    return ConditionalJoint::create(std::move(a), std::move(px), std::move(table));
}

// Plug-in mutual information between X and (Y1, Y2) from full rows.
inline double plug_in_mi(const SampleSet& samples) {
    std::map<std::pair<std::string, std::pair<std::string, std::string>>, double> joint;
    std::map<std::string, double> mx;
    std::map<std::pair<std::string, std::string>, double> my;
    double n = 0.0;
    for (const auto& r : samples.rows) {
        if (!r.y1 || !r.y2) continue;
        joint[{r.x, {*r.y1, *r.y2}}] += 1.0;
        mx[r.x] += 1.0;
        my[{*r.y1, *r.y2}] += 1.0;
        n += 1.0;
    }
    double mi = 0.0;
    for (const auto& [key, count] : joint) {
        const double pxy = count / n;
        const double px = mx[key.first] / n;
        const double py = my[key.second] / n;
        mi += pxy * std::log(pxy / (px * py));
    }
    return mi;
}

// Exhaustive nested-summation oracle for tau^{1-3} with T = 3: inner
// conditional mean under period -3, averaged under periods -2 and -1.
// Joints are dense tensors indexed (y1, y2, y3) / (y1, y2) / (y1).
struct NestedOracleInput {
    std::vector<double> p3;  // [y1][y2][y3]
    std::vector<double> p2;  // [y1][y2]
    std::vector<double> p1;  // [y1]
    std::size_t s1, s2, s3;
    std::vector<double> y3_values;
};

inline double nested_oracle_tau13(const NestedOracleInput& in) {
    auto p3 = [&](std::size_t a, std::size_t b, std::size_t c) {
        return in.p3[(a * in.s2 + b) * in.s3 + c];
    };
    auto p2 = [&](std::size_t a, std::size_t b) { return in.p2[a * in.s2 + b]; };
    // E_{-3}[Y3 | y1, y2]
    std::vector<double> h3(in.s1 * in.s2, 0.0);
    for (std::size_t a = 0; a < in.s1; ++a) {
        for (std::size_t b = 0; b < in.s2; ++b) {
            double mass = 0.0, acc = 0.0;
            for (std::size_t c = 0; c < in.s3; ++c) {
                mass += p3(a, b, c);
                acc += p3(a, b, c) * in.y3_values[c];
            }
            h3[a * in.s2 + b] = mass > 0.0 ? acc / mass : 0.0;
        }
    }
    // E_{-2}[h3(y1, Y2) | y1]
    std::vector<double> h2(in.s1, 0.0);
    for (std::size_t a = 0; a < in.s1; ++a) {
        double mass = 0.0, acc = 0.0;
        for (std::size_t b = 0; b < in.s2; ++b) {
            mass += p2(a, b);
            acc += p2(a, b) * h3[a * in.s2 + b];
        }
        h2[a] = mass > 0.0 ? acc / mass : 0.0;
    }
    // E_{-1}[h2(Y1)]
    double out = 0.0;
    for (std::size_t a = 0; a < in.s1; ++a) out += in.p1[a] * h2[a];
    return out;
}

}  // namespace shiftlab::testing

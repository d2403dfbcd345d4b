#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shiftlab/fixtures.hpp"
#include "shiftlab/shift.hpp"

using namespace shiftlab;

TEST_SUITE("shift") {
    TEST_CASE("symmetric draw satisfies both shift constraints") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(11);
        for (int rep = 0; rep < 200; ++rep) {
            const ShiftResult res = sample_symmetric_shift(d0, 0.3, CrossXMode::independent, rng);
            CHECK(res.draw.max_row_sum_abs() < 1e-10);
            for (std::size_t xi = 0; xi < d0.n_x(); ++xi) {
                for (std::size_t c = 0; c < 4; ++c) {
                    const double shifted = d0.row(xi)[c] + res.draw.at(xi, c);
                    CHECK(shifted >= -1e-15);
                    CHECK(shifted <= 1.0 + 1e-15);
                    CHECK(std::abs(shifted - res.shifted.row(xi)[c]) < 1e-15);
                }
            }
        }
    }

    TEST_CASE("vanishing kappa yields vanishing shifts") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(12);
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const ShiftResult res =
                sample_symmetric_shift(d0, 1e-6, CrossXMode::independent, rng);
            worst = std::max(worst, res.draw.max_abs());
        }
        CHECK(worst < 0.01);
    }

    TEST_CASE("symmetric variance law at a singleton event") {
        const ConditionalJoint d0 = fixture_d0();
        const double kappa = 0.2;
        RngStream rng(13);
        const std::size_t n = 100000;
        // Event {(y1,y2)=(0,0)} at x=0 with p = 0.4.
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = sample_symmetric_shift(d0, kappa, CrossXMode::independent, rng).draw.at(0, 0);
        }
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= static_cast<double>(n);
        double m2 = 0.0, m4 = 0.0;
        for (double v : s) {
            const double d = v - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= static_cast<double>(n);
        m4 /= static_cast<double>(n);
        const double se = std::sqrt((m4 - m2 * m2) / static_cast<double>(n));
        CHECK(std::abs(m2 - kappa * 0.4 * 0.6) <= 4.0 * se);
    }

    TEST_CASE("identical seeds reproduce draws bit for bit") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream a(99), b(99);
        const ShiftResult ra = sample_symmetric_shift(d0, 0.25, CrossXMode::independent, a);
        const ShiftResult rb = sample_symmetric_shift(d0, 0.25, CrossXMode::independent, b);
        CHECK(ra.draw.delta == rb.draw.delta);
    }

    TEST_CASE("zero base cell and bad kappa are rejected") {
        Alphabet al({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const ConditionalJoint j = ConditionalJoint::create(al, {1.0}, {0.5, 0.5, 0.0, 0.0});
        RngStream rng(1);
        CHECK(testing::thrown_kind([&] {
                  sample_symmetric_shift(j, 0.2, CrossXMode::independent, rng);
              }) == "ZeroCellInBase");
        const ConditionalJoint d0 = fixture_d0();
        CHECK(testing::thrown_kind([&] {
                  sample_symmetric_shift(d0, 1.0, CrossXMode::independent, rng);
              }) == "KappaOutOfRange");
    }

    TEST_CASE("asymmetric shift keeps the conditional law of y2") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(21);
        const CondMeanTable before = cond_mean_y2_given_y1_x(d0);
        for (int rep = 0; rep < 100; ++rep) {
            const ShiftResult res = sample_asymmetric_shift(d0, 0.3, CrossXMode::independent, rng);
            const CondMeanTable after = cond_mean_y2_given_y1_x(res.shifted);
            for (std::size_t xi = 0; xi < d0.n_x(); ++xi) {
                for (std::size_t i1 = 0; i1 < d0.n_y1(); ++i1) {
                    CHECK(std::abs(*before.at(xi, i1) - *after.at(xi, i1)) < 1e-12);
                }
            }
        }
    }

    TEST_CASE("asymmetric shift preserves the marginal mean") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(22);
        const std::size_t n = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const ShiftResult res = sample_asymmetric_shift(d0, 0.3, CrossXMode::independent, rng);
            const double p = res.shifted.y1_marginal(0, 0);
            sum += p;
            sum_sq += p * p;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = sum_sq / static_cast<double>(n) - mean * mean;
        const double se = std::sqrt(var / static_cast<double>(n));
        CHECK(std::abs(mean - 0.5) <= 3.0 * se);
    }

    TEST_CASE("tiny asymmetric scale returns the input joint") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(23);
        const ShiftResult res = sample_asymmetric_shift(d0, 1e-9, CrossXMode::independent, rng);
        CHECK(res.draw.max_abs() < 1e-3);
    }

    TEST_CASE("paired perturbation with forced signs negates exactly") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream a(31), b(31);
        const ShiftResult plus = sample_paired_perturbation(d0, 0.1, a, 1);
        const ShiftResult minus = sample_paired_perturbation(d0, 0.1, b, -1);
        for (std::size_t i = 0; i < plus.draw.delta.size(); ++i) {
            CHECK(plus.draw.delta[i] == -minus.draw.delta[i]);
        }
    }

    TEST_CASE("paired perturbation is centered cellwise") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(32);
        const std::size_t n = 100000;
        std::vector<double> sum(8, 0.0), sum_sq(8, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const ShiftResult res = sample_paired_perturbation(d0, 0.08, rng);
            for (std::size_t c = 0; c < 8; ++c) {
                const double v = res.draw.delta[c];
                sum[c] += v;
                sum_sq[c] += v * v;
            }
        }
        for (std::size_t c = 0; c < 8; ++c) {
            const double mean = sum[c] / static_cast<double>(n);
            const double var = sum_sq[c] / static_cast<double>(n) - mean * mean;
            const double se = std::sqrt(var / static_cast<double>(n));
            CHECK(std::abs(mean) <= 3.0 * se);
        }
    }

    TEST_CASE("point-mass rows admit only the null paired move") {
        Alphabet al({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const ConditionalJoint j = ConditionalJoint::create(al, {1.0}, {1.0, 0.0, 0.0, 0.0});
        RngStream rng(33);
        const ShiftResult res = sample_paired_perturbation(j, 0.5, rng);
        CHECK(res.draw.max_abs() == 0.0);
    }

    TEST_CASE("two-stage composition is conditionally centered") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(34);
        const std::size_t n = 20000;
        // Regress the stage-2 shift on the stage-1 shift cell by cell.
        std::vector<double> s1(n), s2(n);
        for (std::size_t i = 0; i < n; ++i) {
            const ShiftResult first = sample_symmetric_shift(d0, 0.2, CrossXMode::independent, rng);
            const ShiftResult second =
                sample_symmetric_shift(first.shifted, 0.1, CrossXMode::independent, rng);
            s1[i] = first.draw.at(0, 0);
            s2[i] = second.draw.at(0, 0);
        }
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m1 += s1[i];
            m2 += s2[i];
        }
        m1 /= static_cast<double>(n);
        m2 /= static_cast<double>(n);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sxx += (s1[i] - m1) * (s1[i] - m1);
            sxy += (s1[i] - m1) * (s2[i] - m2);
        }
        const double slope = sxy / sxx;
        double resid_ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (s2[i] - m2) - slope * (s1[i] - m1);
            resid_ss += r * r;
        }
        const double slope_se = std::sqrt(resid_ss / static_cast<double>(n - 2) / sxx);
        CHECK(std::abs(slope) <= 4.0 * slope_se);
    }

    TEST_CASE("shared seed couples rows with identical bases") {
        Alphabet al({"0", "1"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const std::vector<double> row{0.25, 0.25, 0.25, 0.25};
        std::vector<double> table = row;
        table.insert(table.end(), row.begin(), row.end());
        const ConditionalJoint j = ConditionalJoint::create(al, {0.5, 0.5}, table);
        RngStream rng(41);
        const ShiftResult res = sample_symmetric_shift(j, 0.2, CrossXMode::shared_seed, rng);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(res.draw.at(0, c) == res.draw.at(1, c));
        }
        RngStream rng2(41);
        const ShiftResult indep = sample_symmetric_shift(j, 0.2, CrossXMode::independent, rng2);
        bool any_diff = false;
        for (std::size_t c = 0; c < 4; ++c) {
            any_diff = any_diff || indep.draw.at(0, c) != indep.draw.at(1, c);
        }
        CHECK(any_diff);
    }

    TEST_CASE("generator audit: symmetric dirichlet matches every moment") {
        RngStream rng(42);
        const ValidationReport report = validate_generator(
            {ShiftKind::symmetric_dirichlet, 0.2, CrossXMode::independent}, fixture_d0(),
            20000, rng);
        CHECK(report.all_pass());
    }

    TEST_CASE("generator audit under shared seed keeps per-x moments") {
        RngStream rng(43);
        const ValidationReport report = validate_generator(
            {ShiftKind::symmetric_dirichlet, 0.2, CrossXMode::shared_seed}, fixture_d0(),
            20000, rng);
        CHECK(report.all_pass());
    }

    TEST_CASE("generator audit: paired perturbation is centered but not symmetric") {
        RngStream rng(44);
        const ValidationReport report = validate_generator(
            {ShiftKind::paired_perturbation, 0.1, CrossXMode::independent}, fixture_d0(),
            20000, rng);
        CHECK(report.all_pass("mean"));
        CHECK(report.any_fail("var"));
    }

    TEST_CASE("variance scales linearly in kappa") {
        const ConditionalJoint d0 = fixture_d0();
        auto empirical_var = [&](double kappa, std::uint64_t seed) {
            RngStream rng(seed);
            const std::size_t n = 20000;
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v =
                    sample_symmetric_shift(d0, kappa, CrossXMode::independent, rng).draw.at(0, 0);
                sum += v;
                sum_sq += v * v;
            }
            const double mean = sum / static_cast<double>(n);
            return sum_sq / static_cast<double>(n) - mean * mean;
        };
        const double ratio = empirical_var(0.5, 45) / empirical_var(0.05, 46);
        CHECK(std::abs(ratio - 10.0) < 0.5);
    }
}

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shiftlab/errors.hpp"
#include "shiftlab/fixtures.hpp"
#include "shiftlab/joint.hpp"

using namespace shiftlab;

namespace {

ConditionalJoint product_joint_with_means(double p1a, double p2a, double p1b, double p2b) {
    // Binary Y1/Y2, independent given x, with E[Y1|x] and E[Y2|x] as given.
    Alphabet a({"a", "b"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
    auto row = [](double p1, double p2) {
        return std::vector<double>{(1 - p1) * (1 - p2), (1 - p1) * p2, p1 * (1 - p2), p1 * p2};
    };
    std::vector<double> table = row(p1a, p2a);
    const std::vector<double> second = row(p1b, p2b);
    table.insert(table.end(), second.begin(), second.end());
    return ConditionalJoint::create(std::move(a), {0.5, 0.5}, std::move(table));
}

}  // namespace

TEST_SUITE("joint") {
    TEST_CASE("d0 fixture validates with unit row sums") {
        const ConditionalJoint d0 = fixture_d0();
        CHECK(d0.n_x() == 2);
        for (std::size_t xi = 0; xi < 2; ++xi) {
            double sum = 0.0;
            for (std::size_t c = 0; c < 4; ++c) sum += d0.row(xi)[c];
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        }
        CHECK(d0.prob(0, 0, 0) == doctest::Approx(0.4));
        CHECK(d0.strictly_positive());
    }

    TEST_CASE("negative cell is rejected") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        CHECK(testing::thrown_kind([&] {
                  ConditionalJoint::create(a, {1.0}, {0.5, 0.51, -0.01, 0.0});
              }) == "NegativeProbability");
    }

    TEST_CASE("row sum violation is rejected") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        CHECK(testing::thrown_kind([&] {
                  ConditionalJoint::create(a, {1.0}, {0.4, 0.4, 0.09, 0.09});
              }) == "RowSumViolation");
    }

    TEST_CASE("near-unit rows are renormalized") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const double eps = 2e-10;
        const ConditionalJoint j =
            ConditionalJoint::create(a, {1.0}, {0.25 + eps, 0.25, 0.25, 0.25});
        double sum = 0.0;
        for (std::size_t c = 0; c < 4; ++c) sum += j.row(0)[c];
        CHECK(std::abs(sum - 1.0) < 1e-15);
    }

    TEST_CASE("conditional mean of y2 given x on d0") {
        const PredictorTable t = cond_mean_y2_given_x(fixture_d0());
        CHECK(t.values[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(t.values[1] == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("point mass sends every conditional mean to the point value") {
        Alphabet a({"0", "1"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const ConditionalJoint j =
            ConditionalJoint::create(a, {0.5, 0.5}, {0, 0, 0, 1, 0, 0, 0, 1});
        const PredictorTable t = cond_mean_y2_given_x(j);
        CHECK(t.values[0] == 1.0);
        CHECK(t.values[1] == 1.0);
    }

    TEST_CASE("conditional mean of y2 given (y1, x) on d0") {
        const CondMeanTable q = cond_mean_y2_given_y1_x(fixture_d0());
        CHECK(*q.at(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
        CHECK(*q.at(0, 1) == doctest::Approx(0.8).epsilon(1e-14));
        CHECK(*q.at(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(*q.at(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("zero-support cells are absent, not zero") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const ConditionalJoint j = ConditionalJoint::create(a, {1.0}, {0.5, 0.5, 0.0, 0.0});
        const CondMeanTable q = cond_mean_y2_given_y1_x(j);
        CHECK(q.at(0, 0).has_value());
        CHECK_FALSE(q.at(0, 1).has_value());
    }

    TEST_CASE("law of total expectation over random joints") {
        RngStream rng(7001);
        for (int rep = 0; rep < 200; ++rep) {
            const ConditionalJoint j = testing::random_joint(rng, 3, 3, 4);
            const CondMeanTable q = cond_mean_y2_given_y1_x(j);
            const PredictorTable m = cond_mean_y2_given_x(j);
            for (std::size_t xi = 0; xi < j.n_x(); ++xi) {
                double acc = 0.0;
                for (std::size_t i1 = 0; i1 < j.n_y1(); ++i1) {
                    acc += j.y1_marginal(xi, i1) * *q.at(xi, i1);
                }
                CHECK(std::abs(acc - m.values[xi]) < 1e-12);
            }
        }
    }

    TEST_CASE("proxy scaling closed form on an exactly affine design") {
        const ConditionalJoint j = product_joint_with_means(0.4, 0.5, 0.6, 0.7);
        const ProxyScaling s = fit_proxy_scaling(j);
        CHECK_FALSE(s.degenerate);
        CHECK(s.slope == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.intercept == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(proxy_objective(j, s.slope, s.intercept) < 1e-24);
    }

    TEST_CASE("proxy scaling degenerates on constant proxy means") {
        const ProxyScaling s = fit_proxy_scaling(fixture_d0());
        CHECK(s.degenerate);
        CHECK(s.slope == 1.0);
        CHECK(s.intercept == doctest::Approx(0.0));
    }

    TEST_CASE("negative unconstrained slope falls back to identity") {
        const ConditionalJoint j = product_joint_with_means(0.2, 0.8, 0.8, 0.2);
        const ProxyScaling s = fit_proxy_scaling(j);
        CHECK(s.degenerate);
        CHECK(s.slope == 1.0);
        CHECK(s.intercept == doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("fitted objective beats identity when non-degenerate") {
        RngStream rng(7002);
        for (int rep = 0; rep < 100; ++rep) {
            const ConditionalJoint j = testing::random_joint(rng, 4, 2, 3);
            const ProxyScaling s = fit_proxy_scaling(j);
            if (s.degenerate) continue;
            CHECK(proxy_objective(j, s.slope, s.intercept) <=
                  proxy_objective(j, 1.0, 0.0) + 1e-15);
        }
    }

    TEST_CASE("proxy scaling only depends on token order, not names") {
        const ConditionalJoint j = fixture_affine_proxy();
        Alphabet renamed({"left", "right"}, {{"lo", 0.0}, {"hi", 1.0}},
                         {{"lo", 0.0}, {"hi", 1.0}});
        const ConditionalJoint j2 =
            ConditionalJoint::create(renamed, j.px_vector(), j.table());
        const ProxyScaling s1 = fit_proxy_scaling(j);
        const ProxyScaling s2 = fit_proxy_scaling(j2);
        CHECK(s1.slope == s2.slope);
        CHECK(s1.intercept == s2.intercept);
    }

    TEST_CASE("noise terms on d0") {
        const NoiseTerms n = noise_terms(fixture_d0(), ProxyScaling::identity());
        CHECK(n.noise_x == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(n.noise_full == doctest::Approx(0.205).epsilon(1e-14));
    }

    TEST_CASE("deterministic y2 given (y1, x) has zero full noise") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        // y2 = y1 exactly.
        const ConditionalJoint j = ConditionalJoint::create(a, {1.0}, {0.5, 0.0, 0.0, 0.5});
        const NoiseTerms n = noise_terms(j, ProxyScaling::identity());
        CHECK(n.noise_full == doctest::Approx(0.0));
        CHECK(n.noise_x > 0.0);
    }

    TEST_CASE("conditional independence equates the noise terms") {
        RngStream rng(7003);
        for (int rep = 0; rep < 50; ++rep) {
            const ConditionalJoint j = testing::random_cond_indep_joint(rng, 3, 3, 3);
            const NoiseTerms n = noise_terms(j, ProxyScaling::identity());
            CHECK(std::abs(n.noise_full - n.noise_x) < 1e-13);
        }
    }

    TEST_CASE("noise_full is the best achievable squared error") {
        RngStream rng(7004);
        for (int rep = 0; rep < 100; ++rep) {
            const ConditionalJoint j = testing::random_joint(rng, 3, 3, 3);
            const ProxyScaling s = fit_proxy_scaling(j);
            const NoiseTerms n = noise_terms(j, s);
            CHECK(n.noise_full <= n.noise_x + 1e-15);
            CHECK(n.noise_full <= n.proxy_resid + 1e-15);
        }
    }
}

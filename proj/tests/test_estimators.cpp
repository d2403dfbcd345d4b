#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

#include "oracles.hpp"
#include "shiftlab/estimators.hpp"
#include "shiftlab/fixtures.hpp"
#include "shiftlab/samples.hpp"

using namespace shiftlab;

namespace {

SampleSet rows_from_counts(
    const std::vector<std::tuple<int, const char*, const char*, const char*>>& spec) {
    SampleSet out;
    for (const auto& [period, x, y1, y2] : spec) {
        SampleRow r;
        r.period = period;
        r.x = x;
        if (y1) r.y1 = y1;
        if (y2) r.y2 = y2;
        out.rows.push_back(r);
    }
    return out;
}

}  // namespace

TEST_SUITE("estimators") {
    TEST_CASE("tau_A on d0") {
        const PredictorTable t = tau_A(fixture_d0());
        CHECK(t.values[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(t.values[1] == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("tau_A ignores the proxy margin") {
        const ConditionalJoint j = fixture_affine_proxy();
        // Swap the y1 levels (labels and rows together): tau_A must not move.
        const Alphabet& a = j.alphabet();
        Alphabet swapped(a.x_labels(), {a.y1_level(1), a.y1_level(0)},
                         {a.y2_level(0), a.y2_level(1)});
        std::vector<double> table(j.table().size());
        for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
            for (std::size_t i1 = 0; i1 < 2; ++i1) {
                for (std::size_t i2 = 0; i2 < 2; ++i2) {
                    table[(xi * 2 + (1 - i1)) * 2 + i2] = j.prob(xi, i1, i2);
                }
            }
        }
        const ConditionalJoint j2 =
            ConditionalJoint::create(swapped, j.px_vector(), std::move(table));
        const PredictorTable t1 = tau_A(j);
        const PredictorTable t2 = tau_A(j2);
        CHECK(std::abs(t1.values[0] - t2.values[0]) < 1e-15);
        CHECK(std::abs(t1.values[1] - t2.values[1]) < 1e-15);
    }

    TEST_CASE("tau_B with identity and affine scalings on d0") {
        const ConditionalJoint d0 = fixture_d0();
        const PredictorTable identity = tau_B(d0, ProxyScaling::identity());
        CHECK(identity.values[0] == doctest::Approx(0.5).epsilon(1e-14));
        const PredictorTable scaled = tau_B(d0, {2.0, -0.5, false});
        CHECK(scaled.values[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(scaled.values[1] == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("tau_B under a point-mass proxy") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        const ConditionalJoint j = ConditionalJoint::create(a, {1.0}, {0.0, 0.0, 0.6, 0.4});
        const PredictorTable t = tau_B(j, {1.5, 0.25, false});
        CHECK(t.values[0] == doctest::Approx(1.75).epsilon(1e-14));
    }

    TEST_CASE("tau_C collapses to tau_A with identical measures") {
        const ConditionalJoint d0 = fixture_d0();
        const TauCResult res = tau_C(d0, d0);
        CHECK_FALSE(res.any_flagged());
        CHECK(res.table.max_abs_diff(tau_A(d0)) < 1e-15);
    }

    TEST_CASE("tau_C two-stage sum on a reweighted recent period") {
        // joint_m1 shifts P(y1|x=0) to 0.3 keeping the conditional of y2.
        const ConditionalJoint m2 = fixture_d0();
        Alphabet a = m2.alphabet();
        const ConditionalJoint m1 = ConditionalJoint::create(
            a, {0.5, 0.5},
            {0.24, 0.06, 0.14, 0.56,  //
             0.25, 0.25, 0.25, 0.25});
        const TauCResult res = tau_C(m2, m1);
        CHECK(res.table.values[0] == doctest::Approx(0.62).epsilon(1e-14));
        CHECK(res.table.values[1] == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("proxy-violated extreme: tau_C equals tau_A") {
        RngStream rng(8001);
        for (int rep = 0; rep < 50; ++rep) {
            const ConditionalJoint m2 = testing::random_cond_indep_joint(rng, 3, 3, 3);
            const ConditionalJoint m1 = testing::random_joint(rng, 3, 3, 3);
            const TauCResult res = tau_C(m2, m1);
            CHECK(res.table.max_abs_diff(tau_A(m2)) < 1e-12);
        }
    }

    TEST_CASE("identical-outcome extreme: tau_C equals tau_B exactly") {
        RngStream rng(8002);
        for (int rep = 0; rep < 50; ++rep) {
            const ConditionalJoint m2 = testing::random_diagonal_joint(rng, 2, 3);
            const ConditionalJoint m1 = testing::random_diagonal_joint(rng, 2, 3);
            const TauCResult c = tau_C(m2, m1);
            const PredictorTable b = tau_B(m1, ProxyScaling::identity());
            for (std::size_t xi = 0; xi < 2; ++xi) {
                CHECK(c.table.values[xi] == b.values[xi]);
            }
        }
    }

    TEST_CASE("tau_C flags absent first-stage cells and substitutes tau_A") {
        Alphabet a({"0"}, {{"0", 0.0}, {"1", 1.0}}, {{"0", 0.0}, {"1", 1.0}});
        // Old period never saw y1 = 1.
        const ConditionalJoint m2 = ConditionalJoint::create(a, {1.0}, {0.7, 0.3, 0.0, 0.0});
        const ConditionalJoint m1 = ConditionalJoint::create(a, {1.0}, {0.25, 0.25, 0.25, 0.25});
        const TauCResult res = tau_C(m2, m1);
        CHECK(res.any_flagged());
        // Half the weight takes q(x,0) = 0.3, half falls back to tau_A = 0.3.
        CHECK(res.table.values[0] == doctest::Approx(0.3).epsilon(1e-12));
    }

    TEST_CASE("first stage cell means and fallback") {
        const SampleSet s = rows_from_counts({{-2, "0", "0", "0"},
                                              {-2, "0", "0", "1"},
                                              {-2, "0", "1", "1"},
                                              {-2, "0", "1", "1"}});
        const Alphabet a = induce_alphabet(s);
        const FittedFirstStage f = fit_first_stage(EmpiricalCounts::from_samples(s, -2, a), a);
        CHECK(*f.at(0, 0) == doctest::Approx(0.5));
        CHECK(*f.at(0, 1) == doctest::Approx(1.0));
        CHECK(f.fallback[0] == doctest::Approx(0.75));
    }

    TEST_CASE("single-row cells reproduce that row's outcome") {
        const SampleSet s = rows_from_counts({{-2, "0", "0", "1"}, {-2, "0", "1", "0"}});
        const Alphabet a = induce_alphabet(s);
        const FittedFirstStage f = fit_first_stage(EmpiricalCounts::from_samples(s, -2, a), a);
        CHECK(*f.at(0, 0) == 1.0);
        CHECK(*f.at(0, 1) == 0.0);
    }

    TEST_CASE("unseen (x, y1) cells stay absent with a defined fallback") {
        const SampleSet s = rows_from_counts(
            {{-2, "0", "0", "1"}, {-2, "0", "0", "0"}, {-1, "0", "1", nullptr}});
        const Alphabet a = induce_alphabet(s);
        const FittedFirstStage f = fit_first_stage(EmpiricalCounts::from_samples(s, -2, a), a);
        CHECK(f.at(0, 0).has_value());
        CHECK_FALSE(f.at(0, 1).has_value());
        CHECK(f.fallback[0] == doctest::Approx(0.5));
    }

    TEST_CASE("missing covariate cell raises") {
        const SampleSet s = rows_from_counts({{-2, "0", "0", "1"}, {-1, "1", "0", nullptr}});
        const Alphabet a = induce_alphabet(s);
        CHECK(testing::thrown_kind([&] { hat_tau_A(s, a); }) == "MissingCovariateCell");
    }

    TEST_CASE("plug-in estimator is close at one million samples") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(8003);
        const SampleSet s = draw_samples(d0, -2, 1000000, rng);
        const PredictorTable t = hat_tau_A(s, d0.alphabet());
        CHECK(std::abs(t.values[0] - 0.5) < 0.005);
        CHECK(std::abs(t.values[1] - 0.5) < 0.005);
    }

    TEST_CASE("empirical tower identity when the recent period reuses old rows") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(8004);
        SampleSet s = draw_samples(d0, -2, 5000, rng);
        // Recent period = the same (x, y1) columns.
        const std::size_t n = s.rows.size();
        for (std::size_t i = 0; i < n; ++i) {
            SampleRow r = s.rows[i];
            r.period = -1;
            r.y2.reset();
            s.rows.push_back(std::move(r));
        }
        const Alphabet& a = d0.alphabet();
        const HatTauCResult c = hat_tau_C(s, a);
        const PredictorTable t = hat_tau_A(s, a);
        CHECK(c.table.max_abs_diff(t) < 1e-15);
    }

    TEST_CASE("proxy equals target: hat_tau_B is consistent") {
        RngStream rng(8005);
        const ConditionalJoint diag = testing::random_diagonal_joint(rng, 2, 2);
        SampleSet s = draw_samples(diag, -2, 50000, rng);
        for (auto& r : s.rows) {
            r.period = -1;
            r.y2.reset();
        }
        const PredictorTable b = hat_tau_B(s, diag.alphabet(), ProxyScaling::identity());
        const PredictorTable truth = cond_mean_y2_given_x(diag);
        CHECK(b.max_abs_diff(truth) < 0.02);
    }

    TEST_CASE("plug-ins converge at the root-n rate") {
        const ConditionalJoint d0 = fixture_d0();
        const PredictorTable truth = tau_A(d0);
        const std::vector<std::size_t> sizes{1000, 10000, 100000};
        int ok = 0;
        for (int seed = 0; seed < 100; ++seed) {
            std::vector<double> errors;
            bool within_bound = true;
            for (std::size_t n : sizes) {
                RngStream rng = RngStream::substream(8100 + seed, n);
                const SampleSet s = draw_samples(d0, -2, n, rng);
                const PredictorTable t = hat_tau_A(s, d0.alphabet());
                double err = 0.0;
                for (std::size_t xi = 0; xi < 2; ++xi) {
                    err = std::max(err, std::abs(t.values[xi] - truth.values[xi]));
                    // 5 sigma bound on the per-cell error; Var(Y2|x) = 1/4.
                    const double sd = std::sqrt(0.25 / (static_cast<double>(n) * d0.px(xi)));
                    if (std::abs(t.values[xi] - truth.values[xi]) >= 5.0 * sd) {
                        within_bound = false;
                    }
                }
                errors.push_back(err);
            }
            if (errors.front() >= errors.back() && within_bound) ++ok;
        }
        CHECK(ok >= 95);
    }

    TEST_CASE("permutation keeps marginals but erases dependence") {
        const ConditionalJoint d0 = fixture_d0();
        RngStream rng(8006);
        const SampleSet s = draw_samples(d0, -2, 1000, rng);

        const SampleSet unchanged = permute_covariates(s, 0.0, 3, rng);
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            CHECK(unchanged.rows[i].x == s.rows[i].x);
        }

        SampleSet full = permute_covariates(s, 1.0, 1, rng);
        std::map<std::string, int> before, after;
        for (const auto& r : s.rows) before[r.x]++;
        for (const auto& r : full.rows) after[r.x]++;
        CHECK(before == after);

        int decreased = 0;
        for (int seed = 0; seed < 100; ++seed) {
            RngStream prng = RngStream::substream(8200, seed);
            const SampleSet permuted = permute_covariates(s, 0.5, 1, prng);
            if (testing::plug_in_mi(permuted) < testing::plug_in_mi(s)) ++decreased;
        }
        CHECK(decreased >= 95);

        SampleSet empty;
        CHECK(testing::thrown_kind([&] { permute_covariates(empty, 0.5, 1, rng); }) ==
              "EmptySampleSet");
    }
}

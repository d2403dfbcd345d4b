#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shiftlab/estimators.hpp"
#include "shiftlab/fixtures.hpp"
#include "shiftlab/multi_period.hpp"

using namespace shiftlab;

namespace {

// Three binary outcomes over a single covariate cell, hand-checkable.
MultiAlphabet three_period_alphabet() {
    return MultiAlphabet({"0"}, {testing::indexed_levels(2), testing::indexed_levels(2),
                                 testing::indexed_levels(2)});
}

std::vector<double> random_simplex(RngStream& rng, std::size_t n) {
    std::vector<double> out(n);
    double sum = 0.0;
    for (double& v : out) {
        v = 0.05 + rng.next_open01();
        sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace

TEST_SUITE("multi_period") {
    TEST_CASE("reduces to tau_C for two periods") {
        const ConditionalJoint m2 = fixture_d0();
        const ConditionalJoint m1 = fixture_affine_proxy();
        const std::vector<PeriodJoint> joints{period_joint_from_conditional(m1, 1),
                                              period_joint_from_conditional(m2, 2)};
        const TauCResult nested = tau_nested(joints, 1, 2);
        const TauCResult direct = tau_C(m2, m1);
        CHECK(nested.table.max_abs_diff(direct.table) < 1e-14);
    }

    TEST_CASE("identical periods collapse to the last period's mean") {
        RngStream rng(9101);
        const MultiAlphabet a = three_period_alphabet();
        const std::vector<double> p3 = random_simplex(rng, 8);
        // Marginalize the same law onto the shorter observation windows.
        std::vector<double> p2(4, 0.0), p1(2, 0.0);
        for (std::size_t c = 0; c < 8; ++c) p2[c / 2] += p3[c];
        for (std::size_t c = 0; c < 4; ++c) p1[c / 2] += p2[c];
        const std::vector<PeriodJoint> joints{PeriodJoint::create(a, 1, {1.0}, p1),
                                              PeriodJoint::create(a, 2, {1.0}, p2),
                                              PeriodJoint::create(a, 3, {1.0}, p3)};
        double y3_mean = 0.0;
        for (std::size_t c = 0; c < 8; ++c) y3_mean += p3[c] * static_cast<double>(c % 2);
        const TauCResult res = tau_nested(joints, 1, 3);
        CHECK(res.table.values[0] == doctest::Approx(y3_mean).epsilon(1e-13));
    }

    TEST_CASE("matches the exhaustive oracle on random three-period fixtures") {
        RngStream rng(9102);
        const MultiAlphabet a = three_period_alphabet();
        for (int rep = 0; rep < 200; ++rep) {
            testing::NestedOracleInput in;
            in.s1 = in.s2 = in.s3 = 2;
            in.p3 = random_simplex(rng, 8);
            in.p2 = random_simplex(rng, 4);
            in.p1 = random_simplex(rng, 2);
            in.y3_values = {0.0, 1.0};
            const std::vector<PeriodJoint> joints{PeriodJoint::create(a, 1, {1.0}, in.p1),
                                                  PeriodJoint::create(a, 2, {1.0}, in.p2),
                                                  PeriodJoint::create(a, 3, {1.0}, in.p3)};
            const TauCResult res = tau_nested(joints, 1, 3);
            CHECK(res.table.values[0] ==
                  doctest::Approx(testing::nested_oracle_tau13(in)).epsilon(1e-12));
        }
    }

    TEST_CASE("agrees with tau_C on a thousand random joints") {
        RngStream rng(9103);
        for (int rep = 0; rep < 1000; ++rep) {
            const ConditionalJoint m2 = testing::random_joint(rng, 2, 2, 3);
            const ConditionalJoint m1 = testing::random_joint(rng, 2, 2, 3);
            const std::vector<PeriodJoint> joints{period_joint_from_conditional(m1, 1),
                                                  period_joint_from_conditional(m2, 2)};
            const TauCResult nested = tau_nested(joints, 1, 2);
            const TauCResult direct = tau_C(m2, m1);
            CHECK(nested.table.max_abs_diff(direct.table) < 1e-13);
        }
    }

    TEST_CASE("inner sub-window (2,3) uses only the later periods") {
        RngStream rng(9104);
        const MultiAlphabet a = three_period_alphabet();
        const std::vector<double> p3 = random_simplex(rng, 8);
        const std::vector<double> p2 = random_simplex(rng, 4);
        const std::vector<double> p1 = random_simplex(rng, 2);
        const std::vector<PeriodJoint> joints{PeriodJoint::create(a, 1, {1.0}, p1),
                                              PeriodJoint::create(a, 2, {1.0}, p2),
                                              PeriodJoint::create(a, 3, {1.0}, p3)};
        const TauCResult res = tau_nested(joints, 2, 3);
        // Direct two-stage computation on (y2, y3), marginalizing y1 out.
        std::vector<double> q(2, 0.0);
        for (std::size_t b = 0; b < 2; ++b) {
            double mass = 0.0, acc = 0.0;
            for (std::size_t y1 = 0; y1 < 2; ++y1) {
                for (std::size_t c = 0; c < 2; ++c) {
                    mass += p3[(y1 * 2 + b) * 2 + c];
                    acc += p3[(y1 * 2 + b) * 2 + c] * static_cast<double>(c);
                }
            }
            q[b] = acc / mass;
        }
        double expect = 0.0;
        std::vector<double> m2_marg(2, 0.0);
        for (std::size_t c = 0; c < 4; ++c) m2_marg[c % 2] += p2[c];
        for (std::size_t b = 0; b < 2; ++b) expect += m2_marg[b] * q[b];
        CHECK(res.table.values[0] == doctest::Approx(expect).epsilon(1e-13));
    }

    TEST_CASE("zero-support stage cells fall back and flag") {
        const MultiAlphabet a = three_period_alphabet();
        // Period -3 never observes y1 = 1; the period -1 average still
        // needs it, so the x-level mean substitutes.
        const std::vector<double> p3{0.15, 0.35, 0.15, 0.35, 0.0, 0.0, 0.0, 0.0};
        const std::vector<double> p2{0.25, 0.25, 0.25, 0.25};
        const std::vector<double> p1{0.5, 0.5};
        const std::vector<PeriodJoint> joints{PeriodJoint::create(a, 1, {1.0}, p1),
                                              PeriodJoint::create(a, 2, {1.0}, p2),
                                              PeriodJoint::create(a, 3, {1.0}, p3)};
        const TauCResult res = tau_nested(joints, 1, 3);
        CHECK(res.flagged[0]);
        CHECK(std::isfinite(res.table.values[0]));
    }

    TEST_CASE("rejects bad window bounds") {
        const ConditionalJoint m2 = fixture_d0();
        const std::vector<PeriodJoint> joints{period_joint_from_conditional(m2, 1),
                                              period_joint_from_conditional(m2, 2)};
        CHECK(testing::thrown_kind([&] { tau_nested(joints, 2, 2); }) == "SchemaViolation");
        CHECK(testing::thrown_kind([&] { tau_nested(joints, 1, 3); }) == "SchemaViolation");
    }
}

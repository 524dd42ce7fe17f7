#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lgcert/bounds.hpp"
#include "lgcert/qubit_core.hpp"
#include "test_util.hpp"

using namespace lgcert;
using doctest::Approx;

namespace {

Strategy identity_strategy(double a = 0.0, double b = 1.0) {
    Strategy s;
    s.state = BlochVector(0.0, 0.0, 0.0);
    s.u1 = UnitaryParams(0.0, 0.0, 0.0);
    s.u2 = UnitaryParams(0.0, 0.0, 0.0);
    s.povm = PovmParams(a, b);
    return s;
}

} // namespace

TEST_CASE("density matrix from Bloch vector") {
    const Mat2 mixed = density_from_bloch(BlochVector(0, 0, 0));
    CHECK(mixed.m00 == cplx(0.5, 0.0));
    CHECK(mixed.m11 == cplx(0.5, 0.0));
    CHECK(mixed.m01 == cplx(0.0, 0.0));

    const Mat2 pole = density_from_bloch(BlochVector(0, 0, 1));
    CHECK(pole.m00 == cplx(1.0, 0.0));
    CHECK(pole.m11 == cplx(0.0, 0.0));

    const Mat2 plus_x = density_from_bloch(BlochVector(1, 0, 0));
    for (cplx v : {plus_x.m00, plus_x.m01, plus_x.m10, plus_x.m11})
        CHECK(std::abs(v - cplx(0.5, 0.0)) < 1e-15);

    CHECK_THROWS_AS(BlochVector(0.8, 0.8, 0.8), std::invalid_argument);

    SplitMix64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Mat2 rho = density_from_bloch(testutil::random_strategy(rng).state);
        CHECK(rho.trace().real() == Approx(1.0).epsilon(1e-14));
        CHECK(is_psd(rho, 1e-12));
    }
}

TEST_CASE("unitary from parameters") {
    const Mat2 id = unitary_from_params(UnitaryParams(0, 0, 0));
    CHECK((id - Mat2::identity()).max_abs() < 1e-15);

    const Mat2 swap = unitary_from_params(UnitaryParams(0, 0, std::numbers::pi / 2));
    CHECK(std::abs(swap.m00) < 1e-15);
    CHECK(std::abs(swap.m01 - cplx(1, 0)) < 1e-15);
    CHECK(std::abs(swap.m10 - cplx(-1, 0)) < 1e-15);
    CHECK(std::abs(swap.m11) < 1e-15);

    const Mat2 phase = unitary_from_params(UnitaryParams(std::numbers::pi / 2, 0, 0));
    CHECK(std::abs(phase.m00 - cplx(0, 1)) < 1e-15);
    CHECK(std::abs(phase.m11 - cplx(0, -1)) < 1e-15);
    CHECK(std::abs(phase.m01) < 1e-15);

    SplitMix64 rng(12);
    for (int i = 0; i < 500; ++i) {
        const Strategy s = testutil::random_strategy(rng);
        CHECK(is_unitary(unitary_from_params(s.u1), 1e-12));
        CHECK(is_unitary(unitary_from_params(s.u2), 1e-12));
    }

    CHECK_THROWS_AS(UnitaryParams(std::nan(""), 0, 0), std::invalid_argument);
}

TEST_CASE("angles normalize to [-pi, pi]") {
    const UnitaryParams p(7.0, -9.0, 3.0 * std::numbers::pi);
    for (double v : {p.x, p.y, p.z}) {
        CHECK(v <= std::numbers::pi + 1e-15);
        CHECK(v >= -std::numbers::pi - 1e-15);
    }
    // Wrapped angles describe the same unitary.
    const Mat2 u = unitary_from_params(p);
    const Mat2 v = unitary_from_params(UnitaryParams(7.0 - 2 * std::numbers::pi,
                                                     -9.0 + 4 * std::numbers::pi,
                                                     std::numbers::pi));
    CHECK((u - v).max_abs() < 1e-12);
}

TEST_CASE("POVM elements") {
    const auto [pp, pm] = povm_elements(PovmParams(0, 1));
    CHECK(pp.m00 == cplx(1, 0));
    CHECK(pp.m11 == cplx(0, 0));
    CHECK(pm.m00 == cplx(0, 0));
    CHECK(pm.m11 == cplx(1, 0));

    const auto [tp, tm] = povm_elements(PovmParams(0, 0));
    CHECK(tp.m00 == cplx(0.5, 0));
    CHECK(tm.m11 == cplx(0.5, 0));

    const auto [mp, mm] = povm_elements(PovmParams(0.5, 0.5));
    CHECK(mp.m00 == cplx(1.0, 0));
    CHECK(mp.m11 == cplx(0.5, 0));
    CHECK(mm.m00 == cplx(0.0, 0));
    CHECK(mm.m11 == cplx(0.5, 0));

    CHECK_THROWS_AS(PovmParams(0.6, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(PovmParams(0.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(PovmParams(0.0, -0.2), std::invalid_argument);

    SplitMix64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const auto [a, b] = povm_elements(testutil::random_strategy(rng).povm);
        CHECK(is_psd(a, 1e-12));
        CHECK(is_psd(b, 1e-12));
        CHECK(((a + b) - Mat2::identity()).max_abs() == 0.0); // exact by construction
    }
}

TEST_CASE("joint probability by trace") {
    const Strategy canon = canonical_strategy(Alpha(0.5));
    CHECK(joint_prob_trace(canon, Pair::q12, +1, +1) == Approx(0.375).epsilon(1e-12));

    // b = 0, a = 0: the final measurement is trivial, so the (2,3) joints
    // collapse to the time-2 singles times 1/2.
    SplitMix64 rng(14);
    for (int i = 0; i < 50; ++i) {
        Strategy s = testutil::random_strategy(rng);
        s.povm = PovmParams(0.0, 0.0);
        for (int a : {+1, -1})
            for (int b : {+1, -1})
                CHECK(joint_prob_trace(s, Pair::q23, a, b) ==
                      Approx(0.5 * single_prob_trace(s, 2, a)).epsilon(1e-12));
    }

    Strategy det;
    det.state = BlochVector(0, 0, 1);
    det.u1 = UnitaryParams(0, 0, 0);
    det.u2 = UnitaryParams(0, 0, 0);
    det.povm = PovmParams(0, 1);
    CHECK(joint_prob_trace(det, Pair::q12, -1, +1) == Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(joint_prob_trace(det, Pair::q12, -1, -1) == Approx(0.0).scale(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(joint_prob_trace(det, Pair::q12, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(joint_prob_trace(det, Pair::q12, 1, 2), std::invalid_argument);
}

TEST_CASE("closed-form table agrees with trace oracle") {
    SplitMix64 rng(15);
    for (int i = 0; i < 2000; ++i) {
        const Strategy s = testutil::random_strategy(rng);
        const ProbabilityTable tb = probability_table(s);
        for (Pair p : all_pairs)
            for (int a : {+1, -1})
                for (int b : {+1, -1})
                    CHECK(std::abs(tb.joint_prob(p, a, b) - joint_prob_trace(s, p, a, b)) <
                          1e-12);
        for (int t = 1; t <= 3; ++t)
            for (int o : {+1, -1})
                CHECK(std::abs(tb.single_prob(t, o) - single_prob_trace(s, t, o)) < 1e-12);
    }
}

TEST_CASE("table normalization and ranges") {
    SplitMix64 rng(16);
    for (int i = 0; i < 2000; ++i) {
        const ProbabilityTable tb = probability_table(testutil::random_strategy(rng));
        for (int p = 0; p < 3; ++p) {
            double sum = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const double v = tb.joint[p][a][b];
                    CHECK(v >= -1e-12);
                    CHECK(v <= 1.0 + 1e-12);
                    sum += v;
                }
            CHECK(sum == Approx(1.0).epsilon(1e-10));
        }
        for (int t = 0; t < 3; ++t)
            CHECK(tb.singles[t][0] + tb.singles[t][1] == Approx(1.0).epsilon(1e-10));

        // Correlators are the signed sums of their blocks; the LGI closed form
        // must match their combination.
        auto corr = [&](int p) {
            return tb.joint[p][0][0] - tb.joint[p][0][1] - tb.joint[p][1][0] + tb.joint[p][1][1];
        };
        CHECK(std::abs(tb.corr12 - corr(0)) < 1e-12);
        CHECK(std::abs(tb.corr13 - corr(1)) < 1e-12);
        CHECK(std::abs(tb.corr23 - corr(2)) < 1e-12);
        CHECK(std::abs(tb.lgi - (tb.corr12 + tb.corr23 - tb.corr13)) < 1e-12);
    }
}

TEST_CASE("probability table examples") {
    const ProbabilityTable canon = probability_table(canonical_strategy(Alpha(0.5)));
    CHECK(canon.lgi == Approx(1.5).epsilon(1e-12));
    for (double v : canon.nsit) CHECK(std::abs(v) < 1e-12);

    // A trivial final measurement (b = 0) admits no violation once the
    // NSIT_1 obstruction chi is absent: with a = -1 the value is exactly
    // (1 - nz) cos 2z1 + nz, and it never exceeds 1 for any bias a.
    SplitMix64 rng(17);
    for (int i = 0; i < 100; ++i) {
        Strategy s = testutil::random_strategy(rng);
        s.state = BlochVector(0.0, 0.0, s.state.nz);
        s.povm = PovmParams(-1.0, 0.0);
        const ProbabilityTable tb = probability_table(s);
        const double c1 = std::cos(2 * s.u1.z);
        CHECK(tb.lgi == Approx((1.0 - s.state.nz) * c1 + s.state.nz).epsilon(1e-12));
        CHECK(tb.lgi <= 1.0 + 1e-12);

        Strategy u = testutil::random_strategy(rng);
        u.povm = PovmParams(0.0, 0.0);
        CHECK(probability_table(u).lgi <= 1.0 + 1e-12);
    }

    const ProbabilityTable flat = probability_table(identity_strategy());
    CHECK(flat.lgi == Approx(1.0).epsilon(1e-12));
    CHECK(flat.corr12 == Approx(1.0).epsilon(1e-12));
    CHECK(flat.corr23 == Approx(1.0).epsilon(1e-12));
    CHECK(flat.corr13 == Approx(1.0).epsilon(1e-12));
    for (double v : flat.nsit) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("derived quantities") {
    const DerivedQuantities canon = derived_quantities(canonical_strategy(Alpha(0.5)));
    CHECK(canon.gamma == Approx(-0.5).epsilon(1e-12));
    CHECK(std::abs(canon.chi) < 1e-15);
    CHECK(std::abs(canon.xi) < 1e-15);
    CHECK(std::abs(canon.t) < 1e-15);

    SplitMix64 rng(18);
    for (int i = 0; i < 100; ++i) {
        Strategy s = testutil::random_strategy(rng);
        s.u1 = UnitaryParams(s.u1.x, s.u1.y, 0.0);
        CHECK(std::abs(derived_quantities(s).chi) < 1e-15);

        Strategy c = testutil::random_strategy(rng);
        c.state = BlochVector(0, 0, 0);
        const DerivedQuantities d = derived_quantities(c);
        CHECK(std::abs(d.chi) < 1e-15);
        CHECK(std::abs(d.xi) < 1e-15);
        CHECK(std::abs(d.gamma) <= c.povm.b + 1e-12);
    }
}

TEST_CASE("later measurements never disturb earlier marginals") {
    // Summing a joint block over the second outcome recovers the single of
    // the first time exactly; this is what makes the conditional's
    // denominator unambiguous.
    SplitMix64 rng(23);
    for (int i = 0; i < 500; ++i) {
        const ProbabilityTable tb = probability_table(testutil::random_strategy(rng));
        for (Pair p : all_pairs) {
            const auto pi = static_cast<std::size_t>(p);
            const auto ft = static_cast<std::size_t>(first_time(p) - 1);
            for (int ia = 0; ia < 2; ++ia)
                CHECK(std::abs(tb.joint[pi][static_cast<std::size_t>(ia)][0] +
                               tb.joint[pi][static_cast<std::size_t>(ia)][1] -
                               tb.singles[ft][static_cast<std::size_t>(ia)]) < 1e-12);
        }
    }
}

TEST_CASE("conditional probabilities") {
    const ProbabilityTable canon = probability_table(canonical_strategy(Alpha(0.5)));
    CHECK(conditional_probability(canon, Pair::q13, +1, -1) == Approx(0.75).epsilon(1e-12));

    // NSIT-satisfying strategies have uniform first-outcome marginals, so the
    // conditional is exactly twice the joint.
    for (double a : {0.1, 0.25, 0.4, 0.5}) {
        const ProbabilityTable tb = probability_table(canonical_strategy(Alpha(a)));
        for (Pair p : all_pairs)
            for (int ai : {+1, -1})
                for (int bi : {+1, -1})
                    CHECK(conditional_probability(tb, p, ai, bi) ==
                          Approx(2.0 * tb.joint_prob(p, ai, bi)).epsilon(1e-12));
    }

    Strategy det;
    det.state = BlochVector(0, 0, 1);
    det.povm = PovmParams(0, 1);
    const ProbabilityTable dt = probability_table(det);
    CHECK(conditional_probability(dt, Pair::q12, +1, +1) == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(conditional_probability(dt, Pair::q12, -1, +1), std::domain_error);
}

TEST_CASE("LGI never exceeds the quantum ceiling (sample)") {
    SplitMix64 rng(19);
    double max_seen = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double lgi = probability_table(testutil::random_strategy(rng)).lgi;
        max_seen = std::max(max_seen, lgi);
        CHECK(lgi <= quantum_lgi_max + 1e-9);
    }
    CHECK(max_seen > 1.0); // the sample does reach violations
}

TEST_CASE("zero NSIT with violation forces chi = nz = 0") {
    SplitMix64 rng(20);
    const double pi = std::numbers::pi;

    // Family with nx = ny = 0 and t = pi/2: all three NSIT values vanish for
    // any nz, so a violation would contradict the structure property. None
    // may occur.
    for (int i = 0; i < 2000; ++i) {
        Strategy s;
        s.state = BlochVector(0, 0, rng.uniform(-1.0, 1.0));
        s.u1 = UnitaryParams(pi / 2, 0, rng.uniform(-pi, pi));
        s.u2 = UnitaryParams(0, 0, rng.uniform(-pi, pi));
        const double b = rng.uniform();
        s.povm = PovmParams(rng.uniform(-1.0, 1.0) * (1.0 - b), b);
        const ProbabilityTable tb = probability_table(s);
        for (double v : tb.nsit) REQUIRE(std::abs(v) < 1e-9);
        if (std::abs(s.state.nz) >= 1e-6) CHECK(tb.lgi <= 1.0 + 1e-6);
    }

    // Gauge-shifted canonical family: NSIT still zero, violations do occur,
    // and chi and nz indeed vanish there.
    int violations = 0;
    for (int i = 0; i < 500; ++i) {
        Strategy s = canonical_strategy(Alpha(0.05 + 0.45 * rng.uniform()));
        s.u1 = UnitaryParams(rng.uniform(-pi, pi), rng.uniform(-pi, pi), s.u1.z);
        s.u2 = UnitaryParams(rng.uniform(-pi, pi), rng.uniform(-pi, pi), s.u2.z);
        const ProbabilityTable tb = probability_table(s);
        bool nsit_zero = true;
        for (double v : tb.nsit) nsit_zero = nsit_zero && std::abs(v) < 1e-9;
        if (nsit_zero && tb.lgi > 1.0 + 1e-6) {
            ++violations;
            CHECK(std::abs(derived_quantities(s).chi) < 1e-6);
            CHECK(std::abs(s.state.nz) < 1e-6);
        }
    }
    CHECK(violations > 0);
}

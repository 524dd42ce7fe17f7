#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lgcert/mat2.hpp"

// Exact quantum model of a three-time sequential measurement on a qubit:
// projective measurements at t1, t2 (diagonal), a general two-outcome POVM
// at t3, and the unitaries evolving the system between the times. Joint
// probabilities are available both by direct matrix computation and by
// closed-form trigonometric expressions; the two routes must agree to 1e-12.

namespace lgcert {

inline constexpr double validity_tol = 1e-12;

/// Largest LGI value a qubit strategy can reach.
inline constexpr double quantum_lgi_max = 1.5;

namespace detail {
inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}
/// Wraps an angle into [-pi, pi].
inline double wrap_angle(double v) {
    return std::remainder(v, 2.0 * std::numbers::pi);
}
} // namespace detail

/// State parameters: rho = (I + n.sigma)/2 with |n| <= 1.
struct BlochVector {
    double nx = 0.0, ny = 0.0, nz = 0.0;

    BlochVector() = default;
    BlochVector(double x, double y, double z) : nx(x), ny(y), nz(z) {
        detail::require_finite(nx, "nx");
        detail::require_finite(ny, "ny");
        detail::require_finite(nz, "nz");
        if (norm2() > 1.0 + validity_tol)
            throw std::invalid_argument("Bloch vector lies outside the unit ball");
    }

    double norm2() const { return nx * nx + ny * ny + nz * nz; }
};

/// Angles (x, y, z) of one inter-measurement unitary; normalized to [-pi, pi].
struct UnitaryParams {
    double x = 0.0, y = 0.0, z = 0.0;

    UnitaryParams() = default;
    UnitaryParams(double x_, double y_, double z_) {
        detail::require_finite(x_, "x");
        detail::require_finite(y_, "y");
        detail::require_finite(z_, "z");
        x = detail::wrap_angle(x_);
        y = detail::wrap_angle(y_);
        z = detail::wrap_angle(z_);
    }
};

/// Final two-outcome measurement M+- = ((1 +- a) I +- b sigma_z) / 2,
/// taken diagonal: the rotation freedom is absorbed into the second unitary.
struct PovmParams {
    double a = 0.0; // bias
    double b = 1.0; // strength; b = 1, a = 0 is the projective limit

    PovmParams() = default;
    PovmParams(double a_, double b_) : a(a_), b(b_) {
        detail::require_finite(a, "a");
        detail::require_finite(b, "b");
        if (b < -validity_tol) throw std::invalid_argument("POVM strength b must be nonnegative");
        if (b > 1.0 + validity_tol) throw std::invalid_argument("POVM strength b exceeds 1");
        if (std::abs(a) + b > 1.0 + validity_tol)
            throw std::invalid_argument("POVM requires |a| + b <= 1");
    }
};

/// Complete description of one experimental arrangement: initial state,
/// the two unitaries, and the final POVM.
struct Strategy {
    BlochVector state;
    UnitaryParams u1;
    UnitaryParams u2;
    PovmParams povm;

    void validate() const {
        if (state.norm2() > 1.0 + validity_tol)
            throw std::invalid_argument("invalid Strategy: Bloch vector outside unit ball");
        if (povm.b < -validity_tol || povm.b > 1.0 + validity_tol ||
            std::abs(povm.a) + povm.b > 1.0 + validity_tol)
            throw std::invalid_argument("invalid Strategy: POVM parameters out of range");
        for (double v : {state.nx, state.ny, state.nz, u1.x, u1.y, u1.z,
                         u2.x, u2.y, u2.z, povm.a, povm.b})
            detail::require_finite(v, "strategy parameter");
    }
};

/// The four scalars the closed forms are built from.
struct DerivedQuantities {
    double gamma = 0.0; // b (cos2z1 cos2z2 - cos t sin2z1 sin2z2); |gamma| <= b
    double t = 0.0;     // x1 + x2 + y1 - y2, wrapped to [-pi, pi]
    double chi = 0.0;   // (nx cos(x1-y1) + ny sin(x1-y1)) sin2z1
    double xi = 0.0;    // cos t cos2z1 (nx cos(x1-y1) + ny sin(x1-y1))
                        //   + sin t (ny cos(x1-y1) - nx sin(x1-y1))
};

/// Measurement-time pairs, in the fixed order used throughout.
enum class Pair { q12 = 0, q13 = 1, q23 = 2 };
inline constexpr std::array<Pair, 3> all_pairs{Pair::q12, Pair::q13, Pair::q23};

/// Index of a +-1 outcome into probability arrays: +1 -> 0, -1 -> 1.
inline int outcome_index(int outcome) {
    if (outcome == +1) return 0;
    if (outcome == -1) return 1;
    throw std::invalid_argument("outcome must be +1 or -1");
}

inline int first_time(Pair p) { return p == Pair::q23 ? 2 : 1; }
inline int second_time(Pair p) { return p == Pair::q12 ? 2 : 3; }

/// Joint probabilities, singles, correlators, and the LGI / NSIT values of
/// a strategy. joint[pair][ia][ib] uses outcome_index ordering.
struct ProbabilityTable {
    std::array<std::array<std::array<double, 2>, 2>, 3> joint{};
    // singles[t-1][ia]: P(outcome | measurement at time t alone)
    std::array<std::array<double, 2>, 3> singles{};
    double corr12 = 0.0, corr23 = 0.0, corr13 = 0.0;
    double lgi = 0.0;
    std::array<double, 3> nsit{};

    double joint_prob(Pair p, int a, int b) const {
        return joint[static_cast<int>(p)][outcome_index(a)][outcome_index(b)];
    }
    double single_prob(int time, int outcome) const {
        if (time < 1 || time > 3) throw std::invalid_argument("time must be 1, 2 or 3");
        return singles[time - 1][outcome_index(outcome)];
    }
};

// ---------------------------------------------------------------------------
// Matrix-level model
// ---------------------------------------------------------------------------

inline Mat2 density_from_bloch(const BlochVector& n) {
    if (n.norm2() > 1.0 + validity_tol)
        throw std::invalid_argument("Bloch vector lies outside the unit ball");
    return {cplx(0.5 * (1.0 + n.nz), 0.0), cplx(0.5 * n.nx, -0.5 * n.ny),
            cplx(0.5 * n.nx, 0.5 * n.ny), cplx(0.5 * (1.0 - n.nz), 0.0)};
}

/// U = [[e^{ix} cos z, e^{iy} sin z], [-e^{-iy} sin z, e^{-ix} cos z]].
inline Mat2 unitary_from_params(const UnitaryParams& p) {
    detail::require_finite(p.x, "x");
    detail::require_finite(p.y, "y");
    detail::require_finite(p.z, "z");
    const double cz = std::cos(p.z), sz = std::sin(p.z);
    return {std::polar(cz, p.x), std::polar(sz, p.y),
            -std::polar(sz, -p.y), std::polar(cz, -p.x)};
}

/// Projector onto the +1 / -1 outcome of the t1, t2 measurements.
inline Mat2 projector(int outcome) {
    return outcome_index(outcome) == 0 ? Mat2{1.0, 0.0, 0.0, 0.0}
                                       : Mat2{0.0, 0.0, 0.0, 1.0};
}

/// M+- = ((1 +- a) I +- b sigma_z) / 2; returns {M+, M-}. M+ + M- = I exactly.
inline std::pair<Mat2, Mat2> povm_elements(const PovmParams& p) {
    if (std::abs(p.a) + p.b > 1.0 + validity_tol || p.b < -validity_tol)
        throw std::invalid_argument("POVM requires b >= 0 and |a| + b <= 1");
    Mat2 plus{cplx(0.5 * (1.0 + p.a + p.b), 0.0), 0.0, 0.0,
              cplx(0.5 * (1.0 + p.a - p.b), 0.0)};
    Mat2 minus{cplx(1.0, 0.0) - plus.m00, 0.0, 0.0, cplx(1.0, 0.0) - plus.m11};
    return {plus, minus};
}

/// Sequential-measurement probability by direct matrix products and trace.
/// This is the oracle the closed forms are checked against.
inline double joint_prob_trace(const Strategy& s, Pair pair, int a, int b) {
    s.validate();
    const Mat2 rho = density_from_bloch(s.state);
    const Mat2 u1 = unitary_from_params(s.u1);
    const Mat2 u2 = unitary_from_params(s.u2);
    const Mat2 pa = projector(a);
    const auto [mp, mm] = povm_elements(s.povm);
    const Mat2& mb = outcome_index(b) == 0 ? mp : mm;

    switch (pair) {
    case Pair::q12: {
        const Mat2 pb = projector(b);
        return (u1 * pa * rho * pa * u1.adjoint() * pb).trace().real();
    }
    case Pair::q13: {
        const Mat2 u21 = u2 * u1;
        return (u21 * pa * rho * pa * u21.adjoint() * mb).trace().real();
    }
    case Pair::q23: {
        const Mat2 evolved = u1 * rho * u1.adjoint();
        return (u2 * pa * evolved * pa * u2.adjoint() * mb).trace().real();
    }
    }
    throw std::invalid_argument("invalid measurement pair");
}

/// Probability of `outcome` when only the measurement at `time` is made.
inline double single_prob_trace(const Strategy& s, int time, int outcome) {
    s.validate();
    const Mat2 rho = density_from_bloch(s.state);
    switch (time) {
    case 1:
        return (projector(outcome) * rho).trace().real();
    case 2: {
        const Mat2 u1 = unitary_from_params(s.u1);
        return (projector(outcome) * u1 * rho * u1.adjoint()).trace().real();
    }
    case 3: {
        const Mat2 u = unitary_from_params(s.u2) * unitary_from_params(s.u1);
        const auto [mp, mm] = povm_elements(s.povm);
        const Mat2& m = outcome_index(outcome) == 0 ? mp : mm;
        return (m * u * rho * u.adjoint()).trace().real();
    }
    default:
        throw std::invalid_argument("time must be 1, 2 or 3");
    }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

inline DerivedQuantities derived_quantities(const Strategy& s) {
    DerivedQuantities d;
    const double s1 = std::sin(2.0 * s.u1.z), c1 = std::cos(2.0 * s.u1.z);
    const double s2 = std::sin(2.0 * s.u2.z), c2 = std::cos(2.0 * s.u2.z);
    d.t = detail::wrap_angle(s.u1.x + s.u2.x + s.u1.y - s.u2.y);
    const double ct = std::cos(d.t), st = std::sin(d.t);
    d.gamma = s.povm.b * (c1 * c2 - ct * s1 * s2);
    const double w = s.state.nx * std::cos(s.u1.x - s.u1.y) +
                     s.state.ny * std::sin(s.u1.x - s.u1.y);
    const double wperp = s.state.ny * std::cos(s.u1.x - s.u1.y) -
                         s.state.nx * std::sin(s.u1.x - s.u1.y);
    d.chi = w * s1;
    d.xi = ct * c1 * w + st * wperp;
    return d;
}

/// All twelve joint probabilities, the three singles pairs, correlators and
/// the LGI / NSIT values, from the closed-form expressions alone.
///
/// Note the (-,-) entry of the (1,3) block carries a 1/4 prefactor like its
/// three siblings: normalization forces the block to sum to 1.
inline ProbabilityTable probability_table(const Strategy& s) {
    s.validate();
    ProbabilityTable tb;

    const double nz = s.state.nz;
    const double a = s.povm.a, b = s.povm.b;
    const double c1 = std::cos(2.0 * s.u1.z);
    const double s1 = std::sin(2.0 * s.u1.z);
    const double c2 = std::cos(2.0 * s.u2.z);
    const double s2 = std::sin(2.0 * s.u2.z);
    const DerivedQuantities d = derived_quantities(s);
    const double ct = std::cos(d.t);

    // (1,2): projective at both times.
    tb.joint[0] = {{{0.25 * (1.0 + nz) * (1.0 + c1), 0.25 * (1.0 + nz) * (1.0 - c1)},
                    {0.25 * (1.0 - nz) * (1.0 - c1), 0.25 * (1.0 - nz) * (1.0 + c1)}}};
    // (1,3): projective then POVM.
    tb.joint[1] = {{{0.25 * (1.0 + nz) * (1.0 + a + d.gamma), 0.25 * (1.0 + nz) * (1.0 - a - d.gamma)},
                    {0.25 * (1.0 - nz) * (1.0 + a - d.gamma), 0.25 * (1.0 - nz) * (1.0 - a + d.gamma)}}};
    // (2,3): evolved projective then POVM.
    const double e2p = 1.0 + nz * c1 + d.chi;
    const double e2m = 1.0 - nz * c1 - d.chi;
    tb.joint[2] = {{{0.25 * (1.0 + a + b * c2) * e2p, 0.25 * (1.0 - a - b * c2) * e2p},
                    {0.25 * (1.0 + a - b * c2) * e2m, 0.25 * (1.0 - a + b * c2) * e2m}}};

    const double q3 = a + nz * d.gamma + b * (c2 * d.chi + s2 * d.xi);
    tb.singles[0] = {0.5 * (1.0 + nz), 0.5 * (1.0 - nz)};
    tb.singles[1] = {0.5 * e2p, 0.5 * e2m};
    tb.singles[2] = {0.5 * (1.0 + q3), 0.5 * (1.0 - q3)};

    auto correlator = [](const std::array<std::array<double, 2>, 2>& j) {
        return j[0][0] - j[0][1] - j[1][0] + j[1][1];
    };
    tb.corr12 = correlator(tb.joint[0]);
    tb.corr13 = correlator(tb.joint[1]);
    tb.corr23 = correlator(tb.joint[2]);

    // Correlator-consistent closed form; the a*chi cross-term comes from
    // <Q2Q3> and vanishes whenever NSIT_1 = 0.
    tb.lgi = (1.0 + a * nz) * c1 + b * c2 + a * d.chi - a * nz - d.gamma;
    tb.nsit = {0.5 * d.chi,
               0.5 * b * (c2 * d.chi + s2 * d.xi),
               0.5 * b * s2 * (d.xi - nz * ct * s1)};
    return tb;
}

/// P(b | a, Qi, Qj) = P(a, b | Qi, Qj) / P(a | Qi).
inline double conditional_probability(const ProbabilityTable& tb, Pair pair, int a, int b) {
    const double marginal = tb.singles[first_time(pair) - 1][outcome_index(a)];
    if (marginal < validity_tol)
        throw std::domain_error("conditioning outcome has zero probability");
    return tb.joint_prob(pair, a, b) / marginal;
}

} // namespace lgcert

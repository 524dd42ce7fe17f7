#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace lgcert {

using cplx = std::complex<double>;

/// Dense 2x2 complex matrix with explicit arithmetic. This is the only
/// linear algebra the model needs, so no external library is pulled in.
struct Mat2 {
    cplx m00{}, m01{}, m10{}, m11{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }

    cplx trace() const { return m00 + m11; }
    cplx det() const { return m00 * m11 - m01 * m10; }

    Mat2 adjoint() const {
        return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
    }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
    }
    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
    }
    friend Mat2 operator*(cplx s, const Mat2& a) {
        return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
    }

    double max_abs() const {
        return std::max(std::max(std::abs(m00), std::abs(m01)),
                        std::max(std::abs(m10), std::abs(m11)));
    }
};

inline bool is_unitary(const Mat2& u, double tol = 1e-12) {
    return (u * u.adjoint() - Mat2::identity()).max_abs() <= tol;
}

inline bool is_hermitian(const Mat2& m, double tol = 1e-12) {
    return (m - m.adjoint()).max_abs() <= tol;
}

/// Positive semidefiniteness of a Hermitian 2x2: both eigenvalues
/// (tr +- sqrt(tr^2 - 4 det)) / 2 nonnegative within tol.
inline bool is_psd(const Mat2& m, double tol = 1e-12) {
    if (!is_hermitian(m, tol)) return false;
    const double tr = m.trace().real();
    const double de = m.det().real();
    const double disc = std::max(0.0, tr * tr - 4.0 * de);
    const double lo = 0.5 * (tr - std::sqrt(disc));
    return lo >= -tol;
}

} // namespace lgcert

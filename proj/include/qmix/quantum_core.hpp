#pragma once

// 2x2 operator algebra, Bloch coordinates and entropy functionals for a
// single qubit.
//
// Pauli matrices follow the sign convention used throughout this library:
//
//     sigma1 = [[0, 1], [1, 0]]
//     sigma2 = [[0, i], [-i, 0]]
//     sigma3 = [[-1, 0], [0, 1]]
//
// sigma2 and sigma3 are the negatives of the textbook matrices. The set is
// still a right-handed Pauli triple (sigma_j sigma_k = i eps_jkl sigma_l),
// obtained from the usual one by a pi rotation about the x axis, so every
// Bloch-sphere formula keeps its textbook form in these coordinates.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "qmix/error.hpp"
#include "qmix/rng.hpp"

namespace qmix {

using cplx = std::complex<double>;

inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kPhysicsTol = 1e-9;

// Row-major 2x2 complex matrix.
struct Matrix2 {
    std::array<cplx, 4> a{};

    constexpr Matrix2() = default;
    constexpr Matrix2(cplx a00, cplx a01, cplx a10, cplx a11) : a{a00, a01, a10, a11} {}

    constexpr cplx& operator()(int r, int c) { return a[static_cast<std::size_t>(2 * r + c)]; }
    constexpr const cplx& operator()(int r, int c) const { return a[static_cast<std::size_t>(2 * r + c)]; }

    static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Matrix2 zero() { return {}; }

    constexpr cplx trace() const { return a[0] + a[3]; }
    constexpr cplx det() const { return a[0] * a[3] - a[1] * a[2]; }

    constexpr Matrix2 adjoint() const {
        return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
    }

    Matrix2& operator+=(const Matrix2& o) {
        for (std::size_t i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }
    Matrix2& operator-=(const Matrix2& o) {
        for (std::size_t i = 0; i < 4; ++i) a[i] -= o.a[i];
        return *this;
    }
    Matrix2& operator*=(cplx s) {
        for (auto& x : a) x *= s;
        return *this;
    }

    friend Matrix2 operator+(Matrix2 l, const Matrix2& r) { return l += r; }
    friend Matrix2 operator-(Matrix2 l, const Matrix2& r) { return l -= r; }
    friend Matrix2 operator-(Matrix2 m) { return m *= -1.0; }
    friend Matrix2 operator*(Matrix2 m, cplx s) { return m *= s; }
    friend Matrix2 operator*(cplx s, Matrix2 m) { return m *= s; }
    friend Matrix2 operator*(Matrix2 m, double s) { return m *= s; }
    friend Matrix2 operator*(double s, Matrix2 m) { return m *= s; }

    friend Matrix2 operator*(const Matrix2& l, const Matrix2& r) {
        return {l.a[0] * r.a[0] + l.a[1] * r.a[2], l.a[0] * r.a[1] + l.a[1] * r.a[3],
                l.a[2] * r.a[0] + l.a[3] * r.a[2], l.a[2] * r.a[1] + l.a[3] * r.a[3]};
    }

    // Largest entrywise modulus.
    double max_abs() const {
        double m = 0.0;
        for (const auto& x : a) m = std::max(m, std::abs(x));
        return m;
    }
};

inline Matrix2 commutator(const Matrix2& x, const Matrix2& y) { return x * y - y * x; }
inline Matrix2 anticommutator(const Matrix2& x, const Matrix2& y) { return x * y + y * x; }

inline double hermiticity_defect(const Matrix2& m) { return (m - m.adjoint()).max_abs(); }

namespace pauli {
inline const Matrix2 identity = Matrix2::identity();
inline const Matrix2 sigma1{0.0, 1.0, 1.0, 0.0};
inline const Matrix2 sigma2{0.0, cplx{0.0, 1.0}, cplx{0.0, -1.0}, 0.0};
inline const Matrix2 sigma3{-1.0, 0.0, 0.0, 1.0};

inline const Matrix2& sigma(int k) {
    switch (k) {
    case 0: return sigma1;
    case 1: return sigma2;
    case 2: return sigma3;
    default: throw DomainError("pauli index must be 0, 1 or 2");
    }
}
} // namespace pauli

struct BlochVector {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;

    double& operator[](int k) { return k == 0 ? x1 : (k == 1 ? x2 : x3); }
    double operator[](int k) const { return k == 0 ? x1 : (k == 1 ? x2 : x3); }

    double norm() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }
    double dot(const BlochVector& o) const { return x1 * o.x1 + x2 * o.x2 + x3 * o.x3; }

    friend BlochVector operator+(const BlochVector& l, const BlochVector& r) {
        return {l.x1 + r.x1, l.x2 + r.x2, l.x3 + r.x3};
    }
    friend BlochVector operator-(const BlochVector& l, const BlochVector& r) {
        return {l.x1 - r.x1, l.x2 - r.x2, l.x3 - r.x3};
    }
    friend BlochVector operator*(double s, const BlochVector& v) { return {s * v.x1, s * v.x2, s * v.x3}; }
    friend bool operator==(const BlochVector&, const BlochVector&) = default;
};

// h0 * I + h . sigma. Any hermitian 2x2 matrix decomposes uniquely this way.
struct PauliDecomposition {
    double h0 = 0.0;
    BlochVector h;
};

inline PauliDecomposition pauli_decompose(const Matrix2& m) {
    PauliDecomposition d;
    d.h0 = 0.5 * m.trace().real();
    for (int k = 0; k < 3; ++k) d.h[k] = 0.5 * (m * pauli::sigma(k)).trace().real();
    return d;
}

inline Matrix2 pauli_compose(double h0, const BlochVector& h) {
    return h0 * pauli::identity + h.x1 * pauli::sigma1 + h.x2 * pauli::sigma2 + h.x3 * pauli::sigma3;
}

// Closed-form spectrum of a hermitian 2x2 matrix: eigenvalues h0 -+ |h| with
// spectral projectors (I -+ u.sigma)/2, u = h/|h|. When |h| vanishes the
// axis is arbitrary and reported as e3.
struct HermitianSpectrum {
    double lo = 0.0;
    double hi = 0.0;
    BlochVector axis{0.0, 0.0, 1.0};
};

inline HermitianSpectrum hermitian_spectrum(const Matrix2& m) {
    const auto d = pauli_decompose(m);
    const double r = d.h.norm();
    HermitianSpectrum s;
    s.lo = d.h0 - r;
    s.hi = d.h0 + r;
    if (r > 0.0) s.axis = (1.0 / r) * d.h;
    return s;
}

inline void require_hermitian(const Matrix2& m, const char* what) {
    const double scale = std::max(1.0, m.max_abs());
    if (hermiticity_defect(m) > kStructuralTol * scale)
        throw DomainError(std::string(what) + ": matrix is not hermitian");
}

class DensityMatrix {
public:
    // Maximally mixed state.
    DensityMatrix() : m_(0.5 * Matrix2::identity()) {}

    explicit DensityMatrix(const Matrix2& m, double tol = kStructuralTol) : m_(m) {
        if (hermiticity_defect(m) > tol) throw DomainError("density matrix must be hermitian");
        if (std::abs(m.trace() - 1.0) > tol) throw DomainError("density matrix must have unit trace");
        if (hermitian_spectrum(m).lo < -tol) throw DomainError("density matrix must be positive");
    }

    const Matrix2& matrix() const { return m_; }
    operator const Matrix2&() const { return m_; }

    static DensityMatrix maximally_mixed() { return {}; }

private:
    Matrix2 m_;
};

inline BlochVector to_bloch(const DensityMatrix& rho) {
    const Matrix2& m = rho.matrix();
    return {(m * pauli::sigma1).trace().real(), (m * pauli::sigma2).trace().real(),
            (m * pauli::sigma3).trace().real()};
}

inline DensityMatrix from_bloch(const BlochVector& x) {
    const double r = x.norm();
    if (r > 1.0 + kPhysicsTol) throw DomainError("Bloch vector lies outside the unit ball");
    return DensityMatrix(pauli_compose(0.5, 0.5 * x), std::max(kStructuralTol, r - 1.0 + kStructuralTol));
}

inline double trace_norm(const Matrix2& a) {
    require_hermitian(a, "trace_norm");
    const auto s = hermitian_spectrum(a);
    return std::abs(s.lo) + std::abs(s.hi);
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return trace_norm(rho.matrix() - sigma.matrix());
}

// Relative entropy value in nats; `infinite` marks a support violation.
struct EntropyValue {
    double value = 0.0;
    bool infinite = false;

    static EntropyValue infinity() { return {std::numeric_limits<double>::infinity(), true}; }
    bool finite() const { return !infinite; }
};

namespace detail {
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
} // namespace detail

inline double von_neumann_entropy(const DensityMatrix& rho) {
    const auto s = hermitian_spectrum(rho.matrix());
    return -(detail::xlogx(std::max(s.lo, 0.0)) + detail::xlogx(std::max(s.hi, 0.0)));
}

// H(rho|sigma) = tr(rho log rho) - tr(rho log sigma). The second trace is
// evaluated in sigma's eigenbasis: sum_k log(mu_k) <v_k|rho|v_k>, where the
// weights are (1 -+ u.m)/2 with u sigma's axis and m rho's Bloch vector.
inline EntropyValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    const auto ss = hermitian_spectrum(sigma.matrix());
    const BlochVector m = to_bloch(rho);
    const double proj = ss.axis.dot(m);
    const std::array<double, 2> mu{ss.lo, ss.hi};
    const std::array<double, 2> weight{0.5 * (1.0 - proj), 0.5 * (1.0 + proj)};

    double cross = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        if (weight[k] <= kStructuralTol) continue;
        if (mu[k] < kStructuralTol) return EntropyValue::infinity();
        cross += weight[k] * std::log(mu[k]);
    }
    const double h = -von_neumann_entropy(rho) - cross;
    return {std::max(h, 0.0), false};
}

// Haar-random pure state (uniform on the Bloch sphere).
inline BlochVector random_unit_vector(Xoshiro256& rng) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double phi = 2.0 * M_PI * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

// Mixed state with Bloch radius uniform in [0, max_radius).
inline BlochVector random_bloch_vector(Xoshiro256& rng, double max_radius = 1.0) {
    const double r = max_radius * rng.uniform();
    return r * random_unit_vector(rng);
}

} // namespace qmix

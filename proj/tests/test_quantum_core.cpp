#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "qmix/quantum_core.hpp"

using namespace qmix;

namespace {

Eigen::Matrix2cd to_eigen2(const Matrix2& m) {
    Eigen::Matrix2cd e;
    e << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return e;
}

// Independent eigenvalue oracle (iterative solver, not the closed form).
Eigen::Vector2d oracle_eigenvalues(const Matrix2& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(to_eigen2(m));
    return es.eigenvalues();
}

bool near(const Matrix2& a, const Matrix2& b, double tol) { return (a - b).max_abs() <= tol; }

Matrix2 random_hermitian(Xoshiro256& rng) {
    const double a = rng.normal(), d = rng.normal();
    const cplx b{rng.normal(), rng.normal()};
    return {a, b, std::conj(b), d};
}

} // namespace

TEST(PauliConvention, MatricesAsPrinted) {
    EXPECT_TRUE(near(pauli::sigma2, Matrix2(0.0, cplx(0, 1), cplx(0, -1), 0.0), 0.0));
    EXPECT_TRUE(near(pauli::sigma3, Matrix2(-1.0, 0.0, 0.0, 1.0), 0.0));
}

TEST(PauliConvention, ProductTablePinned) {
    using namespace pauli;
    const cplx i{0.0, 1.0};
    // The sign-flipped pair still forms a right-handed triple.
    EXPECT_TRUE(near(sigma2 * sigma3, i * sigma1, 0.0));
    EXPECT_TRUE(near(sigma3 * sigma1, i * sigma2, 0.0));
    EXPECT_TRUE(near(sigma1 * sigma2, i * sigma3, 0.0));
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(near(sigma(k) * sigma(k), identity, 0.0));
}

TEST(Matrix2Algebra, AdjointOfProductReverses) {
    Xoshiro256 rng(7);
    for (int n = 0; n < 100; ++n) {
        Matrix2 a{cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal()),
                  cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal())};
        Matrix2 b{cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal()),
                  cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal())};
        Matrix2 c = random_hermitian(rng);
        EXPECT_TRUE(near((a * b).adjoint(), b.adjoint() * a.adjoint(), 1e-12));
        EXPECT_TRUE(near((a * b) * c, a * (b * c), 1e-12));
    }
}

TEST(ToBloch, Examples) {
    EXPECT_EQ(to_bloch(DensityMatrix::maximally_mixed()), (BlochVector{0, 0, 0}));
    const auto up = to_bloch(DensityMatrix(Matrix2(1.0, 0.0, 0.0, 0.0)));
    EXPECT_NEAR(up.x1, 0.0, 1e-15);
    EXPECT_NEAR(up.x2, 0.0, 1e-15);
    EXPECT_NEAR(up.x3, -1.0, 1e-15);
    const auto px = to_bloch(DensityMatrix(0.5 * (pauli::identity + pauli::sigma1)));
    EXPECT_NEAR(px.x1, 1.0, 1e-15);
    EXPECT_NEAR(px.x3, 0.0, 1e-15);
}

TEST(FromBloch, Examples) {
    EXPECT_TRUE(near(from_bloch({0, 0, 0}).matrix(), 0.5 * pauli::identity, 0.0));
    const Matrix2 p = from_bloch({1, 0, 0}).matrix();
    EXPECT_TRUE(near(p, 0.5 * (pauli::identity + pauli::sigma1), 1e-15));
    EXPECT_TRUE(near(p * p, p, 1e-15));
}

TEST(FromBloch, UnitVectorsArePureStates) {
    Xoshiro256 rng(11);
    for (int n = 0; n < 200; ++n) {
        const auto ev = oracle_eigenvalues(from_bloch(random_unit_vector(rng)).matrix());
        EXPECT_NEAR(ev(0), 0.0, 1e-12);
        EXPECT_NEAR(ev(1), 1.0, 1e-12);
    }
}

TEST(FromBloch, RejectsOutsideBall) {
    EXPECT_THROW(from_bloch({1.0 + 1e-8, 0, 0}), DomainError);
    EXPECT_NO_THROW(from_bloch({1.0 + 1e-10, 0, 0}));
}

TEST(FromBloch, RoundTripProperty) {
    Xoshiro256 rng(3);
    for (int n = 0; n < 1000; ++n) {
        const BlochVector x = random_bloch_vector(rng);
        const BlochVector y = to_bloch(from_bloch(x));
        EXPECT_LE((x - y).norm(), 1e-12);
    }
}

TEST(DensityMatrixInvariants, RejectsInvalid) {
    EXPECT_THROW(DensityMatrix(Matrix2(1.0, 0.0, 0.0, 1.0)), DomainError);       // trace 2
    EXPECT_THROW(DensityMatrix(Matrix2(1.5, 0.0, 0.0, -0.5)), DomainError);      // negative
    EXPECT_THROW(DensityMatrix(Matrix2(0.5, 0.1, 0.2, 0.5)), DomainError);       // not hermitian
}

TEST(TraceNorm, Examples) {
    const DensityMatrix px(0.5 * (pauli::identity + pauli::sigma1));
    EXPECT_EQ(trace_norm(px.matrix() - px.matrix()), 0.0);
    EXPECT_NEAR(trace_norm(px.matrix() - 0.5 * pauli::identity), 1.0, 1e-15);
    Xoshiro256 rng(5);
    for (int n = 0; n < 200; ++n) {
        const BlochVector m = random_bloch_vector(rng);
        EXPECT_NEAR(trace_norm(from_bloch(m).matrix() - 0.5 * pauli::identity), m.norm(), 1e-12);
    }
}

TEST(TraceNorm, MatchesEigenvalueOracle) {
    Xoshiro256 rng(9);
    for (int n = 0; n < 200; ++n) {
        const Matrix2 h = random_hermitian(rng);
        const auto ev = oracle_eigenvalues(h);
        EXPECT_NEAR(trace_norm(h), std::abs(ev(0)) + std::abs(ev(1)), 1e-12);
    }
}

TEST(TraceNorm, IsANorm) {
    Xoshiro256 rng(13);
    for (int n = 0; n < 500; ++n) {
        const Matrix2 a = random_hermitian(rng);
        const Matrix2 b = random_hermitian(rng);
        const double s = rng.normal();
        EXPECT_LE(trace_norm(a + b), trace_norm(a) + trace_norm(b) + 1e-12);
        EXPECT_NEAR(trace_norm(s * a), std::abs(s) * trace_norm(a), 1e-12 * (1 + std::abs(s)));
    }
}

TEST(TraceNorm, RejectsNonHermitian) {
    EXPECT_THROW(trace_norm(Matrix2(0.0, 1.0, 0.0, 0.0)), DomainError);
}

TEST(RelativeEntropy, Examples) {
    Xoshiro256 rng(17);
    const auto rho = from_bloch(random_bloch_vector(rng));
    EXPECT_NEAR(relative_entropy(rho, rho).value, 0.0, 1e-12);

    const double phi = M_PI / 8;
    const auto sigma = from_bloch({std::sin(2 * phi), 0, 0});
    const auto h = relative_entropy(DensityMatrix::maximally_mixed(), sigma);
    ASSERT_TRUE(h.finite());
    EXPECT_NEAR(h.value, 0.5 * std::log(2.0), 1e-12);
}

TEST(RelativeEntropy, SupportViolationIsInfinite) {
    const DensityMatrix e1(Matrix2(1.0, 0.0, 0.0, 0.0));
    for (double phi : {0.1, M_PI / 8, 0.7}) {
        const double c = std::cos(phi), s = std::sin(phi);
        const DensityMatrix e2(Matrix2(c * c, s * c, s * c, s * s));
        EXPECT_TRUE(relative_entropy(e1, e2).infinite);
        EXPECT_TRUE(relative_entropy(e2, e1).infinite);
    }
    // A pure state relative to a full-rank one is finite.
    EXPECT_TRUE(relative_entropy(e1, DensityMatrix::maximally_mixed()).finite());
    EXPECT_NEAR(relative_entropy(e1, DensityMatrix::maximally_mixed()).value, std::log(2.0), 1e-12);
}

TEST(RelativeEntropy, PinskerProperty) {
    Xoshiro256 rng(19);
    for (int n = 0; n < 5000; ++n) {
        const auto rho = from_bloch(random_bloch_vector(rng));
        const auto sigma = from_bloch(random_bloch_vector(rng));
        const auto h = relative_entropy(rho, sigma);
        ASSERT_TRUE(h.finite());
        const double d = trace_distance(rho, sigma);
        EXPECT_GE(h.value + 1e-12, 0.5 * d * d);
    }
}

TEST(VonNeumannEntropy, Examples) {
    EXPECT_NEAR(von_neumann_entropy(from_bloch({0, 1, 0})), 0.0, 1e-15);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed()), std::log(2.0), 1e-15);
    const double expected = -0.75 * std::log(0.75) - 0.25 * std::log(0.25);
    EXPECT_NEAR(von_neumann_entropy(from_bloch({0.3, 0.0, 0.4})), expected, 1e-12);
}

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "qmix/pdp.hpp"

using namespace qmix;

namespace {

const auto kN = tetrahedron_directions();

BlochVector random_point(Xoshiro256& rng) { return random_unit_vector(rng); }

} // namespace

TEST(Tetrahedron, DirectionsSumToZero) {
    BlochVector s;
    for (const auto& n : kN) {
        s = s + n;
        EXPECT_NEAR(n.norm(), 1.0, 1e-15);
    }
    EXPECT_LE(s.norm(), 1e-15);
    EXPECT_THROW(TetrahedronIFS(1.5), DomainError);
}

TEST(JumpMap, ZeroCouplingIsIdentity) {
    Xoshiro256 rng(1);
    for (int k = 0; k < 100; ++k) {
        const PureSpinState s(random_point(rng));
        for (int i = 1; i <= 4; ++i) {
            const auto out = jump_map(s, i, 0.0);
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.r[c], s.r[c], 1e-15);
        }
    }
}

TEST(JumpMap, SharpDetectorProjects) {
    Xoshiro256 rng(2);
    for (int k = 0; k < 100; ++k) {
        const PureSpinState s(random_point(rng));
        for (int i = 1; i <= 4; ++i) {
            const auto out = jump_map(s, i, 1.0);
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.r[c], kN[i - 1][c], 1e-14);
        }
    }
}

TEST(JumpMap, OwnAxisIsFixed) {
    const auto out = jump_map(PureSpinState(kN[0]), 1, 0.5);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.r[c], kN[0][c], 1e-15);
}

TEST(JumpMap, MatchesConditionedStateFromEffect) {
    // a rho a / tr(a rho a) with a = (I + alpha n.sigma)/2, computed in matrix form.
    Xoshiro256 rng(3);
    for (int k = 0; k < 50; ++k) {
        const BlochVector r = random_point(rng);
        const double alpha = rng.uniform();
        for (int i = 1; i <= 4; ++i) {
            const auto& n = kN[i - 1];
            const Matrix2 a = 0.5 * (pauli::identity + alpha * (n.x1 * pauli::sigma1 + n.x2 * pauli::sigma2 +
                                                                   n.x3 * pauli::sigma3));
            const Matrix2 m = a * from_bloch(r).matrix() * a;
            const auto expected = to_bloch(DensityMatrix((1.0 / m.trace().real()) * m, 1e-9));
            const auto out = jump_map(PureSpinState(r), i, alpha);
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.r[c], expected[c], 1e-12);
        }
    }
}

TEST(JumpMap, RejectsSingularPointAndBadIndex) {
    const BlochVector anti = -1.0 * kN[1];
    EXPECT_THROW(jump_map(PureSpinState(anti), 2, 1.0), DomainError);
    EXPECT_THROW(jump_map(PureSpinState(), 0, 0.5), DomainError);
    EXPECT_THROW(jump_map(PureSpinState(), 5, 0.5), DomainError);
    EXPECT_THROW(PureSpinState({0.5, 0.0, 0.0}), DomainError);
}

TEST(JumpProbs, Examples) {
    for (double p : jump_probs({0.0, 0.0, 1.0}, 0.0)) EXPECT_DOUBLE_EQ(p, 0.25);
    const auto p = jump_probs(kN[0], 1.0);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(p[static_cast<std::size_t>(i)], 1.0 / 6.0, 1e-15);
}

TEST(JumpProbs, SumToOne) {
    Xoshiro256 rng(4);
    for (int k = 0; k < 1000; ++k) {
        const auto p = jump_probs(random_point(rng), rng.uniform());
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        for (double v : p) EXPECT_GE(v, 0.0);
    }
}

TEST(ChooseDetector, InverseCdfOrder) {
    const std::array<double, 4> p{0.1, 0.2, 0.3, 0.4};
    EXPECT_EQ(choose_detector(p, 0.0), 1);
    EXPECT_EQ(choose_detector(p, 0.0999), 1);
    EXPECT_EQ(choose_detector(p, 0.1), 2);
    EXPECT_EQ(choose_detector(p, 0.5999), 3);
    EXPECT_EQ(choose_detector(p, 0.6000001), 4);
    EXPECT_EQ(choose_detector(p, 0.9999999), 4);
}

TEST(SamplePath, NoMotionBetweenJumpsWithoutPrecession) {
    // With omega = 0 each pre-jump state is the previous post-jump state, so
    // replaying the detectors through jump_map reproduces the path.
    const auto path = sample_path({0.0, 1.0, 0.6}, {0.0, 0.0, 1.0}, 200, 5);
    PureSpinState s({0.0, 0.0, 1.0});
    for (const auto& j : path.jumps) {
        s = jump_map(s, j.detector, 0.6);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(j.state[c], s.r[c], 1e-12);
    }
}

TEST(SamplePath, MeanWaitingTime) {
    const auto path = sample_path({0.0, 1.0, 0.7}, {0.0, 0.0, 1.0}, 10000, 6);
    EXPECT_NEAR(path.jumps.back().time / 10000.0, 1.0, 0.03);
    for (std::size_t i = 1; i < path.jumps.size(); ++i) EXPECT_GT(path.jumps[i].time, path.jumps[i - 1].time);
}

TEST(SamplePath, SharpDetectorsLandOnVertices) {
    const auto path = sample_path({0.0, 1.0, 1.0}, {0.0, 0.0, 1.0}, 2000, 7);
    for (const auto& j : path.jumps) {
        const auto& n = kN[static_cast<std::size_t>(j.detector - 1)];
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(j.state[c], n[c], 1e-14);
    }
}

TEST(SamplePath, ReproducibleFromSeed) {
    const PdpParams params{1.3, 2.0, 0.8};
    const auto a = sample_path(params, {0.0, 1.0, 0.0}, 500, 42);
    const auto b = sample_path(params, {0.0, 1.0, 0.0}, 500, 42);
    const auto c = sample_path(params, {0.0, 1.0, 0.0}, 500, 43);
    ASSERT_EQ(a.jumps.size(), b.jumps.size());
    for (std::size_t i = 0; i < a.jumps.size(); ++i) {
        EXPECT_EQ(a.jumps[i].time, b.jumps[i].time);
        EXPECT_EQ(a.jumps[i].detector, b.jumps[i].detector);
        EXPECT_EQ(a.jumps[i].state, b.jumps[i].state);
    }
    EXPECT_NE(a.jumps[10].time, c.jumps[10].time);
}

TEST(SamplePath, PrecessionRotatesCounterClockwise) {
    // alpha = 0 jumps are identities, so only the rotation acts.
    const auto path = sample_path({2.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, 20, 9);
    for (const auto& j : path.jumps) {
        EXPECT_NEAR(j.state.x1, std::cos(2.0 * j.time), 1e-9);
        EXPECT_NEAR(j.state.x2, std::sin(2.0 * j.time), 1e-9);
    }
}

TEST(SamplePath, RejectsBadParameters) {
    EXPECT_THROW(sample_path({0.0, 0.0, 0.5}, {0.0, 0.0, 1.0}, 10, 1), DomainError);
    EXPECT_THROW(sample_path({0.0, 1.0, 0.5}, {0.0, 0.0, 1.0}, 0, 1), DomainError);
    EXPECT_THROW(sample_path({0.0, 1.0, 0.5}, {0.0, 0.0, 0.9}, 10, 1), DomainError);
}

TEST(UnitNorm, MillionComposedJumpsWithoutRenormalization) {
    Xoshiro256 rng(10);
    BlochVector r{0.0, 0.0, 1.0};
    double worst = 0.0;
    for (int k = 0; k < 1000000; ++k) {
        const double alpha = rng.uniform();
        const int det = choose_detector(jump_probs(r, alpha), rng.uniform());
        r = jump_map_raw(r, kN[static_cast<std::size_t>(det - 1)], alpha);
        worst = std::max(worst, std::abs(r.norm() - 1.0));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(UnitNorm, SamplerRenormalizationDriftIsTiny) {
    const auto path = sample_path({0.5, 1.0, 0.9}, {0.0, 0.0, 1.0}, 100000, 11);
    EXPECT_LE(path.max_renormalization, 1e-12);
    for (const auto& j : path.jumps) ASSERT_NEAR(j.state.norm(), 1.0, 1e-12);
}

TEST(ChaosGame, DegenerateAndSharpLimits) {
    const auto still = chaos_game(0.0, 100, 1);
    for (const auto& p : still.points) EXPECT_EQ(p, (BlochVector{0.0, 0.0, 1.0}));

    const auto sharp = chaos_game(1.0, 1000, 1);
    ASSERT_TRUE(sharp.has_detectors());
    for (std::size_t i = 0; i < sharp.size(); ++i) {
        const auto& n = kN[sharp.detectors[i] - 1u];
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(sharp.points[i][c], n[c], 1e-14);
    }
}

TEST(ChaosGame, BurnInDiscardsLeadingJumps) {
    const auto full = sample_path({0.0, 1.0, 0.7}, {0.0, 0.0, 1.0}, 150, 12);
    const auto cloud = chaos_game(0.7, 50, 12, 100);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(cloud.points[i], full.jumps[100 + i].state);
    validate_cloud(cloud);
}

TEST(ChaosGame, SharpChainMatchesExactStationaryLaw) {
    // Chain on the four vertices with P_ij = (1 + n_i.n_j) / 4, solved exactly.
    Eigen::Matrix4d P;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) P(i, j) = (1.0 + kN[i].dot(kN[j])) / 4.0;
    Eigen::Matrix4d A = P.transpose() - Eigen::Matrix4d::Identity();
    A.row(3).setOnes();
    const Eigen::Vector4d pi = A.fullPivLu().solve(Eigen::Vector4d(0, 0, 0, 1));

    // Thinned stationary frequencies (chain correlation decays as 3^-k).
    const std::size_t n = 400000;
    const auto cloud = chaos_game(1.0, n, 13);
    std::array<double, 4> freq{};
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; i += 20, ++kept) freq[cloud.detectors[i] - 1u] += 1.0;
    double chi2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double e = pi(i) * static_cast<double>(kept);
        chi2 += (freq[static_cast<std::size_t>(i)] - e) * (freq[static_cast<std::size_t>(i)] - e) / e;
    }
    EXPECT_LT(chi2, 11.345);  // chi^2_3 at 0.01

    // Transition counts row by row.
    Eigen::Matrix4d counts = Eigen::Matrix4d::Zero();
    for (std::size_t i = 1; i < n; ++i) counts(cloud.detectors[i - 1] - 1, cloud.detectors[i] - 1) += 1.0;
    double chi2_t = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double row = counts.row(i).sum();
        for (int j = 0; j < 4; ++j) {
            const double e = row * P(i, j);
            chi2_t += (counts(i, j) - e) * (counts(i, j) - e) / e;
        }
    }
    EXPECT_LT(chi2_t, 26.217);  // chi^2_12 at 0.01
}

TEST(Ensemble, RateConventionAgainstMasterEquation) {
    const double alpha = 0.8, t = 1.0;
    const std::size_t paths = 100000;
    const BlochVector r0 = (1.0 / std::sqrt(3.0)) * BlochVector{1.0, 1.0, 1.0};
    const auto exact = to_bloch(analytic_evolve(preset::Tetrahedron{1.0, alpha, 1.0}, from_bloch(r0), t));
    const double tol = 3.0 / std::sqrt(static_cast<double>(paths));

    const auto traced = ensemble_bloch({1.0, 1.0, alpha, RateConvention::trace_lambda}, r0, t, paths, 14);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(traced[c], exact[c], tol) << "component " << c;

    const auto literal = ensemble_bloch({1.0, 1.0, alpha, RateConvention::literal}, r0, t, paths, 14);
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(literal[c] - exact[c]));
    EXPECT_GT(worst, tol);
}

TEST(Ensemble, DeterministicAcrossThreadCounts) {
    const PdpParams params{1.0, 1.0, 0.5, RateConvention::trace_lambda};
    const auto a = ensemble_bloch(params, {0.0, 0.0, 1.0}, 0.7, 5000, 3);
    setenv("QMIX_THREADS", "3", 1);
    const auto b = ensemble_bloch(params, {0.0, 0.0, 1.0}, 0.7, 5000, 3);
    unsetenv("QMIX_THREADS");
    EXPECT_EQ(a, b);
}

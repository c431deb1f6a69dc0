#include <cmath>

#include <gtest/gtest.h>

#include "qmix/exponent.hpp"

using namespace qmix;

namespace {

double zeno_curve(double omega, double kappa) {
    const double a = kappa / (4 * omega);
    return a <= 1 ? omega * a : omega / (a + std::sqrt(a * a - 1));
}

ExponentEstimate estimate(const ModelPreset& p, std::optional<DensityMatrix> ref = std::nullopt) {
    const auto model = build_model(p);
    const DensityMatrix r = ref ? *ref : stationary_state(model).state;
    return lambda_q_numeric(model, r, default_probes(), default_horizon(model));
}

} // namespace

TEST(LambdaAnalytic, Examples) {
    EXPECT_NEAR(lambda_q_analytic(preset::Tetrahedron{1.0, 0.5, 0.0}), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(lambda_q_analytic(preset::Zeno{4.0, 1.0}), 1.0, 1e-15);
    EXPECT_NEAR(lambda_q_analytic(preset::Zeno{8.0, 1.0}), 1.0 / (2.0 + std::sqrt(3.0)), 1e-15);
    EXPECT_NEAR(lambda_q_analytic(preset::Zeno{8.0, 1.0}), 0.267949, 1e-6);
    EXPECT_NEAR(lambda_q_analytic(preset::Fluorescence{3.0, 0.7}), 0.35, 1e-15);
    EXPECT_THROW(lambda_q_analytic(preset::SigmaXConjugation{}), DomainError);
}

TEST(LambdaAnalytic, ZenoCurveIsContinuousAtCriticalCoupling) {
    EXPECT_NEAR(lambda_q_analytic(preset::Zeno{4.0 * (1 - 1e-9), 1.0}),
                lambda_q_analytic(preset::Zeno{4.0 * (1 + 1e-9), 1.0}), 1e-4);
}

TEST(LambdaAnalytic, ZenoCurvePeaksAtCriticalCoupling) {
    double prev = 0.0;
    for (double k = 0.5; k <= 4.0; k += 0.5) {
        const double v = lambda_q_analytic(preset::Zeno{k, 1.0});
        EXPECT_GT(v, prev);
        prev = v;
    }
    for (double k = 4.5; k <= 64.0; k *= 1.5) {
        const double v = lambda_q_analytic(preset::Zeno{k, 1.0});
        EXPECT_LT(v, prev);
        prev = v;
    }
    // Large-coupling tail falls off like 1/kappa: omega/(2a) = 2 omega^2/kappa.
    EXPECT_NEAR(lambda_q_analytic(preset::Zeno{4000.0, 1.0}) * 4000.0, 2.0, 1e-3);
}

TEST(DefaultProbes, Layout) {
    const auto ps = default_probes(3);
    ASSERT_EQ(ps.states.size(), 18u);
    EXPECT_NEAR(to_bloch(ps.states[0]).x1, 1.0, 1e-15);
    EXPECT_NEAR(to_bloch(ps.states[5]).x3, -1.0, 1e-15);
    for (std::size_t i = 6; i < 16; ++i) EXPECT_NEAR(to_bloch(ps.states[i]).norm(), 1.0, 1e-12);
    for (std::size_t i = 16; i < 18; ++i) EXPECT_LT(to_bloch(ps.states[i]).norm(), 0.9);
    const auto again = default_probes(3);
    EXPECT_EQ(to_bloch(again.states[10]), to_bloch(ps.states[10]));
}

TEST(LambdaNumeric, TetrahedronSharp) {
    const auto est = estimate(preset::Tetrahedron{1.0, 1.0, 0.0});
    EXPECT_EQ(est.outcome, MixingOutcome::exponentially_mixing);
    EXPECT_NEAR(est.lambda, 4.0 / 3.0, 0.01 * 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(est.t_hi, 15.0);
    EXPECT_DOUBLE_EQ(est.t_lo, 7.5);
}

TEST(LambdaNumeric, TetrahedronSlopesIndependentOfProbe) {
    const auto est = estimate(preset::Tetrahedron{1.0, 0.6, 0.8});
    const double target = lambda_q_analytic(preset::Tetrahedron{1.0, 0.6, 0.8});
    for (const auto& p : est.probes) EXPECT_NEAR(p.slope, target, 0.01 * target);
}

TEST(LambdaNumeric, Fluorescence) {
    const auto est = estimate(preset::Fluorescence{2.0, 1.0});
    EXPECT_NEAR(est.lambda, 0.5, 0.005);
}

TEST(LambdaNumeric, SigmaXIsNotCompletelyMixing) {
    const auto model = build_model(preset::SigmaXConjugation{});
    const DensityMatrix e1(Matrix2(1.0, 0.0, 0.0, 0.0));
    const double phi = M_PI / 8, c = std::cos(phi), s = std::sin(phi);
    ProbeSet probes{{DensityMatrix(Matrix2(c * c, s * c, s * c, s * s))}};
    const auto est = lambda_q_numeric(model, e1, probes, default_horizon(model));
    EXPECT_EQ(est.outcome, MixingOutcome::not_completely_mixing);
    EXPECT_NEAR(est.lambda, 0.0, 1e-6);
    EXPECT_NE(est.diagnostic.find("not completely mixing"), std::string::npos);
}

TEST(LambdaNumeric, CouplingOffIsNotMixing) {
    const auto model = build_model(preset::Tetrahedron{1.0, 0.0, 1.0});
    const auto est = lambda_q_numeric(model, DensityMatrix{}, default_probes(), default_horizon(model));
    EXPECT_EQ(est.outcome, MixingOutcome::not_completely_mixing);
    EXPECT_NEAR(est.lambda, 0.0, 1e-9);
}

TEST(LambdaNumeric, ZenoCurve) {
    for (double kappa : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const auto est = estimate(preset::Zeno{kappa, 1.0});
        const double expected = zeno_curve(1.0, kappa);
        EXPECT_NEAR(est.lambda, expected, 0.02 * expected) << "kappa=" << kappa;
    }
}

TEST(LambdaNumeric, CriticalZenoUsesPolynomialPrefactor) {
    const auto est = estimate(preset::Zeno{4.0, 1.0});
    EXPECT_EQ(est.probes[est.argmin].prefactor_order, 1);
    EXPECT_NEAR(est.lambda, 1.0, 0.02);
}

TEST(LambdaNumeric, IndependentOfReferenceState) {
    Xoshiro256 rng(8);
    for (const ModelPreset& p : {ModelPreset{preset::Fluorescence{1.0, 1.0}}, ModelPreset{preset::Zeno{2.0, 1.0}},
                                 ModelPreset{preset::Tetrahedron{1.0, 0.7, 0.5}}}) {
        const double from_stationary = estimate(p).lambda;
        const double from_random = estimate(p, from_bloch(random_bloch_vector(rng, 0.8))).lambda;
        EXPECT_NEAR(from_random, from_stationary, 0.02 * from_stationary) << preset_name(p);
    }
}

TEST(LambdaNumeric, IntegratorRouteAgreesWithClosedForm) {
    const auto model = build_model(preset::Zeno{8.0, 1.0});
    const auto ref = stationary_state(model).state;
    ProbeSet probes{{from_bloch({0.3, 0.4, 0.5}), from_bloch({0, 1, 0})}};
    ExponentOptions opt;
    opt.samples = 40;
    const auto closed = lambda_q_numeric(model, ref, probes, default_horizon(model), opt);
    opt.force_integrator = true;
    const auto rk4 = lambda_q_numeric(model, ref, probes, default_horizon(model), opt);
    EXPECT_NEAR(rk4.lambda, closed.lambda, 1e-6);
}

TEST(LambdaNumeric, FastProbeShrinksWindow) {
    // At kappa = 16 the x3 mode decays 60x faster than the slowest mode and
    // underflows long before t_max / 2.
    const auto model = build_model(preset::Zeno{16.0, 1.0});
    ProbeSet probes{{from_bloch({0, 0, 1}), from_bloch({1, 0, 0})}};
    const auto est = lambda_q_numeric(model, DensityMatrix{}, probes, default_horizon(model));
    EXPECT_LT(est.probes[0].t_hi, default_horizon(model));
    EXPECT_NEAR(est.probes[0].slope, 8.0, 0.08);
    EXPECT_EQ(est.argmin, 1u);
    EXPECT_FALSE(est.diagnostic.empty());
}

TEST(LambdaNumeric, RejectsProbeEqualToReference) {
    const auto model = build_model(preset::Tetrahedron{});
    ProbeSet probes{{DensityMatrix{}}};
    EXPECT_THROW(lambda_q_numeric(model, DensityMatrix{}, probes, 10.0), DomainError);
}

TEST(ClassifyMixing, Presets) {
    const auto probes = default_probes();
    auto classify = [&](const ModelPreset& p) {
        const auto model = build_model(p);
        return classify_mixing(model, probes, default_horizon(model));
    };
    const auto tet = classify(preset::Tetrahedron{1.0, 0.8, 0.5});
    EXPECT_TRUE(tet.completely_mixing);
    EXPECT_TRUE(tet.exact);

    const auto sx = classify(preset::SigmaXConjugation{});
    EXPECT_FALSE(sx.completely_mixing);
    EXPECT_FALSE(sx.exact);

    const auto fl = classify(preset::Fluorescence{1.0, 1.0});
    EXPECT_TRUE(fl.completely_mixing);
    EXPECT_FALSE(fl.exact);
    EXPECT_LT(fl.min_entropy, std::log(2.0) - 0.1);
}

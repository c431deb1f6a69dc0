#pragma once

// Acceptance recipes 1-10. Each check returns a verdict plus a one-line
// summary of the measured values; tolerances are fixed below.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qmix/classical.hpp"
#include "qmix/commands.hpp"
#include "qmix/exponent.hpp"
#include "qmix/fractal.hpp"
#include "qmix/lindblad.hpp"
#include "qmix/pdp.hpp"
#include "qmix/rng.hpp"

namespace qmix::repro {

namespace tol {
inline constexpr double tetra_rel = 0.01;
inline constexpr double tetra_seconds = 10.0;
inline constexpr double decay_abs = 1e-6;
inline constexpr double zeno_rel = 0.02;
inline constexpr double zeno_seconds = 60.0;
inline constexpr double fluor_rel = 0.01;
inline constexpr double fluor_residual = 1e-12;
inline constexpr double counterexample_abs = 1e-6;
inline constexpr double pinsker_slack = 1e-12;
inline constexpr double ensemble_abs = 0.01;
inline constexpr double ensemble_seconds = 120.0;
inline constexpr double fractal_band = 0.15;
inline constexpr double fractal_seconds = 300.0;
inline constexpr double classical_rel = 0.02;
inline constexpr double fourier_abs = 1e-10;
} // namespace tol

struct Options {
    std::uint64_t seed = 42;
    std::filesystem::path scratch;  // criterion 10 work area; empty = system temp
};

struct Verdict {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string summary;
    std::vector<std::string> notes;
    double seconds = 0.0;
};

inline Verdict titled(int id, std::string title) {
    Verdict v;
    v.id = id;
    v.title = std::move(title);
    return v;
}

namespace detail {

inline std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string g6(double x) { return fmt("%.6g", x); }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline ExponentEstimate exponent_at_stationary(const ModelPreset& p, std::uint64_t seed) {
    const auto model = build_model(p);
    return lambda_q_numeric(model, stationary_state(model).state, default_probes(seed), default_horizon(model));
}

} // namespace detail

inline Verdict tetrahedron_exponent(const Options& o) {
    Verdict v = titled(1, "tetrahedron exponent 4/3 kappa alpha^2");
    v.pass = true;
    for (auto [kappa, alpha] : {std::pair{1.0, 1.0}, {1.0, 0.5}, {2.0, 0.8}}) {
        detail::Stopwatch sw;
        const double lam = detail::exponent_at_stationary(preset::Tetrahedron{kappa, alpha, 0.0}, o.seed).lambda;
        const double secs = sw.seconds();
        const double target = 4.0 / 3.0 * kappa * alpha * alpha;
        const double rel = std::abs(lam - target) / target;
        v.pass = v.pass && rel <= tol::tetra_rel && secs < tol::tetra_seconds;
        v.summary += "(k=" + detail::g6(kappa) + ",a=" + detail::g6(alpha) + ") " + detail::g6(lam) + " vs " +
                     detail::g6(target) + " rel " + detail::fmt("%.2e", rel) + "; ";
        v.notes.push_back("case (" + detail::g6(kappa) + ", " + detail::g6(alpha) + ") took " +
                          detail::fmt("%.2f", secs) + " s");
    }
    return v;
}

inline Verdict tetrahedron_decay(const Options&) {
    Verdict v = titled(2, "tetrahedron decay law exp(-4/3 t) on [0, 5]");
    double worst = 0.0;
    for (double omega : {0.0, 1.0}) {
        const auto model = build_model(preset::Tetrahedron{1.0, 1.0, omega});
        for (const BlochVector& r0 : {BlochVector{0, 0, 1}, BlochVector{1, 0, 0}}) {
            const auto traj = evolve(model, from_bloch(r0), 5.0);
            for (std::size_t i = 0; i < traj.times.size(); ++i) {
                const double d = trace_distance(traj.states[i], DensityMatrix::maximally_mixed());
                worst = std::max(worst, std::abs(d - std::exp(-4.0 / 3.0 * traj.times[i])));
            }
        }
    }
    v.pass = worst <= tol::decay_abs;
    v.summary = "max |d(t) - exp(-4t/3)| = " + detail::fmt("%.3e", worst) + " over omega in {0, 1}";
    return v;
}

inline Verdict zeno_curve(const Options& o) {
    Verdict v = titled(3, "Zeno curve at omega = 1");
    detail::Stopwatch sw;
    bool ok = true;
    const double omega = 1.0;
    for (double a : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double target = a <= 1.0 ? omega * a : omega / (a + std::sqrt(a * a - 1.0));
        const double lam = detail::exponent_at_stationary(preset::Zeno{4.0 * a, omega}, o.seed).lambda;
        const double rel = std::abs(lam - target) / target;
        ok = ok && rel <= tol::zeno_rel;
        v.summary += "a=" + detail::g6(a) + ": " + detail::g6(lam) + " vs " + detail::g6(target) + "; ";
    }
    const double secs = sw.seconds();
    v.pass = ok && secs < tol::zeno_seconds;
    v.notes.push_back("total " + detail::fmt("%.2f", secs) + " s");
    return v;
}

inline Verdict fluorescence(const Options& o) {
    Verdict v = titled(4, "fluorescence exponent gamma/2 and stationary state");
    v.pass = true;
    for (auto [Om, g] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {1.0, 4.0}}) {
        const auto model = build_model(preset::Fluorescence{Om, g});
        const auto st = stationary_state(model);
        const double residual = trace_norm(generator_apply(model, st.state.matrix()));
        const double lam = detail::exponent_at_stationary(preset::Fluorescence{Om, g}, o.seed).lambda;
        const double rel = std::abs(lam - g / 2) / (g / 2);
        v.pass = v.pass && st.unique && residual <= tol::fluor_residual && rel <= tol::fluor_rel;
        v.summary += "(W=" + detail::g6(Om) + ",g=" + detail::g6(g) + ") " + detail::g6(lam) + " |L(rho0)| " +
                     detail::fmt("%.1e", residual) + "; ";

        const auto n = to_bloch(st.state);
        const double printed_n2 = 2 * Om * g / (4 * Om * Om + g * g), printed_n3 = -g * g / (4 * Om * Om + g * g);
        v.notes.push_back("(Omega=" + detail::g6(Om) + ", gamma=" + detail::g6(g) + ") kernel n2=" + detail::g6(n.x2) +
                          " n3=" + detail::g6(n.x3) + "; printed n2=2 Omega gamma/(4 Omega^2+gamma^2)=" +
                          detail::g6(printed_n2) + " n3=-gamma^2/(4 Omega^2+gamma^2)=" + detail::g6(printed_n3) +
                          "; kernel equals n2=2 Omega gamma/(gamma^2+2 Omega^2), n3=+gamma^2/(gamma^2+2 Omega^2)");
    }
    v.notes.push_back("convention: H=-(Omega/2) sigma1 with sigma3=diag(-1,1); the printed denominators fit "
                      "H=-Omega sigma1 and the printed n3 sign fits sigma3=diag(1,-1); the kernel solve is used");
    return v;
}

inline Verdict sigma_x_counterexample(const Options&) {
    Verdict v = titled(5, "sigma_x conjugation: relative entropy -log cos 2phi at t = 20");
    const auto model = build_model(preset::SigmaXConjugation{});
    const DensityMatrix e1(Matrix2(1.0, 0.0, 0.0, 0.0));
    const auto e1_late = evolve(model, e1, 20.0).states.back();
    double worst = 0.0;
    ProbeSet probes{{e1}};
    for (double phi : {M_PI / 16, M_PI / 8, 3 * M_PI / 16}) {
        const double c = std::cos(phi), s = std::sin(phi);
        const DensityMatrix e2(Matrix2(c * c, s * c, s * c, s * s));
        probes.states.push_back(e2);
        const auto h = relative_entropy(e1_late, evolve(model, e2, 20.0).states.back());
        const double target = -std::log(std::cos(2 * phi));
        worst = std::max(worst, h.infinite ? INFINITY : std::abs(h.value - target));
        v.summary += "phi=" + detail::g6(phi) + ": " + detail::g6(h.value) + " vs " + detail::g6(target) + "; ";
    }
    const auto mix = classify_mixing(model, probes, 20.0);
    v.pass = worst <= tol::counterexample_abs && !mix.completely_mixing;
    v.summary += "max error " + detail::fmt("%.2e", worst) + "; classified " +
                 (mix.completely_mixing ? "completely mixing" : "not completely mixing");
    return v;
}

inline Verdict pinsker(const Options& o) {
    Verdict v = titled(6, "Pinsker inequality on 1e4 random pairs");
    Xoshiro256 rng(o.seed);
    int violations = 0;
    double tightest = INFINITY;
    for (int i = 0; i < 10000; ++i) {
        const auto rho = from_bloch(random_bloch_vector(rng));
        const auto sigma = from_bloch(random_bloch_vector(rng));
        const auto h = relative_entropy(rho, sigma);
        const double d = trace_distance(rho, sigma);
        const double gap = (h.infinite ? INFINITY : h.value) - 0.5 * d * d;
        tightest = std::min(tightest, gap);
        if (gap < -tol::pinsker_slack) ++violations;
    }
    v.pass = violations == 0;
    v.summary = std::to_string(violations) + " violations; smallest S - d^2/2 = " + detail::fmt("%.3e", tightest);
    return v;
}

inline Verdict pdp_ensemble(const Options& o) {
    Verdict v = titled(7, "jump-process ensemble vs master equation at t = 1");
    detail::Stopwatch sw;
    const double alpha = 0.8, kappa = 1.0, omega = 1.0, t = 1.0;
    const BlochVector r0 = (1.0 / std::sqrt(3.0)) * BlochVector{1.0, 1.0, 1.0};
    const auto exact = to_bloch(evolve(build_model(preset::Tetrahedron{kappa, alpha, omega}), from_bloch(r0), t).states.back());
    double worst_traced = 0.0;
    for (auto rate : {RateConvention::trace_lambda, RateConvention::literal}) {
        const auto m = ensemble_bloch({omega, kappa, alpha, rate}, r0, t, 100000, o.seed);
        double worst = 0.0;
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(m[c] - exact[c]));
        if (rate == RateConvention::trace_lambda) worst_traced = worst;
        v.notes.push_back(std::string(to_string(rate)) + " rate: mean (" + detail::g6(m.x1) + ", " + detail::g6(m.x2) +
                          ", " + detail::g6(m.x3) + "), max deviation " + detail::g6(worst));
    }
    const double secs = sw.seconds();
    v.pass = worst_traced <= tol::ensemble_abs && secs < tol::ensemble_seconds;
    v.summary = "master equation (" + detail::g6(exact.x1) + ", " + detail::g6(exact.x2) + ", " + detail::g6(exact.x3) +
                "); trace_lambda rate max deviation " + detail::g6(worst_traced);
    v.notes.push_back("both conventions took " + detail::fmt("%.2f", secs) + " s");
    return v;
}

inline Verdict fractal_dimensions(const Options& o) {
    Verdict v = titled(8, "box-counting dimension of chaos-game clouds");
    detail::Stopwatch sw;
    std::vector<double> dims;
    const std::vector<double> alphas{0.75, 0.80, 0.85, 0.90, 0.95};
    for (double a : alphas) {
        const auto r = box_count(chaos_game(a, 1000000, o.seed), 16);
        dims.push_back(r.fit ? r.fit->slope : NAN);
        v.summary += "a=" + detail::fmt("%.2f", a) + ": " + detail::fmt("%.3f", dims.back()) + "; ";
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dims.size(); ++i) monotone = monotone && dims[i] <= dims[i - 1];
    const bool at75 = std::abs(dims.front() - 1.44) <= tol::fractal_band;
    const bool at95 = std::abs(dims.back() - 0.49) <= tol::fractal_band;
    const double secs = sw.seconds();
    v.pass = at75 && at95 && monotone && secs < tol::fractal_seconds;
    v.summary += std::string("alpha 0.75 ") + (at75 ? "in" : "outside") + " 1.44+-0.15, alpha 0.95 " +
                 (at95 ? "in" : "outside") + " 0.49+-0.15, sweep " + (monotone ? "non-increasing" : "not monotone");
    v.notes.push_back("total " + detail::fmt("%.2f", secs) + " s");
    return v;
}

inline Verdict classical_exactness(const Options& o) {
    Verdict v = titled(9, "classical r-adic map: exact decay, lambda = log r, Fourier identity");
    bool exact = true;
    CircleDensity f = CircleDensity::affine({{0.0, 0.0, 2.0}});
    for (int n = 1; n <= 10; ++n) {
        f = pf_apply(f, RadicMap(2));
        exact = exact && l1_distance(f, CircleDensity::uniform()) == 1.0 / (2.0 * std::ldexp(1.0, n));
    }
    std::vector<CircleDensity> probes;
    for (int k = 1; k <= 5; ++k) probes.push_back(linear_probe(k));
    bool lambda_ok = true;
    std::string lam_text;
    for (int r : {2, 3}) {
        const double lam = lambda_classical(CircleDensity::uniform(), probes, RadicMap(r), 20).lambda;
        lambda_ok = lambda_ok && std::abs(lam - std::log(r)) <= tol::classical_rel * std::log(r);
        lam_text += "r=" + std::to_string(r) + " " + detail::g6(lam) + " vs " + detail::g6(std::log(r)) + "; ";
    }

    // Random trigonometric polynomials 1 + sum a_k cos 2pi k u + b_k sin 2pi k u, k <= 12.
    Xoshiro256 rng(o.seed);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> a(12), b(12);
        for (int k = 0; k < 12; ++k) {
            a[k] = (rng.uniform() - 0.5) * 0.075;
            b[k] = (rng.uniform() - 0.5) * 0.075;
        }
        const auto hat = [&](long long k) -> std::complex<double> {
            if (k < 1 || k > 12) return 0.0;
            return {0.5 * a[k - 1], -0.5 * b[k - 1]};
        };
        for (int r : {2, 3}) {
            const std::size_t m = r == 2 ? 4096 : 12288;
            std::vector<double> vals(m);
            for (std::size_t i = 0; i < m; ++i) {
                const double x = 2 * M_PI * static_cast<double>(i) / static_cast<double>(m);
                vals[i] = 1.0;
                for (int k = 0; k < 12; ++k) vals[i] += a[k] * std::cos((k + 1) * x) + b[k] * std::sin((k + 1) * x);
            }
            const auto g = CircleDensity::grid(std::move(vals), 1e-12);
            const int n = r == 2 ? 2 : 1;
            for (long long k : {1LL, 2LL, 3LL}) {
                const auto [lhs, rhs] = fourier_check(g, RadicMap(r), k, n);
                const long long rn = r == 2 ? 4 : 3;
                worst = std::max({worst, std::abs(lhs - rhs), std::abs(lhs - hat(k * rn))});
            }
        }
    }
    const bool fourier_ok = worst <= tol::fourier_abs;
    v.pass = exact && lambda_ok && fourier_ok;
    v.summary = std::string("|P^n 2x - 1| = 2^-n/2 ") + (exact ? "exact" : "NOT exact") + " for n <= 10; " + lam_text +
                "Fourier max error " + detail::fmt("%.2e", worst);
    return v;
}

inline Verdict cli_determinism(const Options& o) {
    namespace fs = std::filesystem;
    Verdict v = titled(10, "CLI recipes reproduce byte-identical files");
    const fs::path root =
        (o.scratch.empty() ? fs::temp_directory_path() : o.scratch) / ("qmix-repro-" + std::to_string(o.seed));
    fs::remove_all(root);
    const auto find = [](const std::string& name) -> const commands::Command& {
        for (const auto& c : commands::registry())
            if (c.name == name) return c;
        throw DomainError("no command " + name);
    };
    const fs::path cloud = root / "a" / "pdp.csv", log = root / "a" / "pdp.jsonl";
    const std::vector<std::pair<std::string, std::vector<std::string>>> recipes{
        {"pdp", {"alpha=0.7", "n_points=1000000", "seed=" + std::to_string(o.seed)}},
        {"evolve", {"model.preset=\"fluorescence\"", "t_end=10"}},
        {"exponent", {"model.preset=\"zeno\"", "sweep={\"parameter\":\"kappa\",\"values\":[1,2,4,8,16]}"}},
        {"fractal", {"cloud=\"" + cloud.string() + "\""}},
        {"classical", {"r=3"}},
        {"render", {"cloud=\"" + cloud.string() + "\"", "path_log=\"" + log.string() + "\"", "format=\"ppm\"",
                    "zoom={\"center\":[0,0,1],\"radius_deg\":45}"}},
    };
    std::ostringstream sink;
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto& [name, sets] : recipes) {
        const auto& cmd = find(name);
        const auto cfg = config::resolve(cmd.defaults(), nullptr, sets);
        const auto a = cmd.run(cfg, {root / "a", name}, sink);
        const auto b = cmd.run(cfg, {root / "b", name}, sink);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ++compared;
            if (i >= b.size() || read_file(a[i]) != read_file(b[i])) differing.push_back(a[i].filename().string());
        }
    }
    fs::remove_all(root);
    v.pass = differing.empty() && compared > 0;
    v.summary = std::to_string(compared) + " files compared, " + std::to_string(differing.size()) + " differ";
    for (const auto& d : differing) v.summary += " " + d;
    return v;
}

using Check = std::function<Verdict(const Options&)>;

inline const std::vector<Check>& checks() {
    static const std::vector<Check> all{tetrahedron_exponent, tetrahedron_decay,  zeno_curve,    fluorescence,
                                        sigma_x_counterexample, pinsker,         pdp_ensemble,  fractal_dimensions,
                                        classical_exactness,  cli_determinism};
    return all;
}

// Runs one criterion (1-based), turning exceptions into a FAIL verdict.
inline Verdict run_one(int id, const Options& o) {
    if (id < 1 || id > static_cast<int>(checks().size())) throw DomainError("criterion must lie in 1..10");
    detail::Stopwatch sw;
    Verdict v;
    try {
        v = checks()[static_cast<std::size_t>(id - 1)](o);
    } catch (const std::exception& e) {
        v = titled(id, "criterion " + std::to_string(id));
        v.summary = std::string("error: ") + e.what();
    }
    v.seconds = sw.seconds();
    return v;
}

inline std::string verdict_line(const Verdict& v) {
    return "criterion " + std::to_string(v.id) + (v.id < 10 ? "  " : " ") + (v.pass ? "PASS" : "FAIL") + "  " +
           v.title + ": " + v.summary + " [" + detail::fmt("%.1f", v.seconds) + " s]";
}

} // namespace qmix::repro

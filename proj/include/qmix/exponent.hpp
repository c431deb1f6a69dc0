#pragma once

// Quantum characteristic exponent: closed forms for the presets and a
// numerical estimator built from decaying trace distances, plus the
// completely-mixing / exact classification.
//
// The estimator realizes the infimum over comparison states as a minimum
// over a finite probe set, so it is a protocol for a lower-bound-style
// estimate rather than a true infimum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qmix/fit.hpp"
#include "qmix/lindblad.hpp"
#include "qmix/parallel.hpp"

namespace qmix {

// Throws DomainError for SigmaXConjugation, which is not completely mixing.
inline double lambda_q_analytic(const ModelPreset& p) {
    validate_preset(p);
    if (const auto* t = std::get_if<preset::Tetrahedron>(&p)) return 4.0 / 3.0 * t->kappa * t->alpha * t->alpha;
    if (const auto* z = std::get_if<preset::Zeno>(&p)) {
        if (z->omega == 0.0) return 0.0;  // x1 is conserved
        const double a = z->kappa / (4.0 * z->omega);
        return a <= 1.0 ? z->omega * a : z->omega / (a + std::sqrt(a * a - 1.0));
    }
    if (const auto* f = std::get_if<preset::Fluorescence>(&p)) return 0.5 * f->gamma;
    throw DomainError("sigma_x conjugation is not completely mixing; its exponent is undefined");
}

struct ProbeSet {
    std::vector<DensityMatrix> states;
};

// The six Bloch-axis pure states, then 10 random pure and 2 random mixed states.
inline ProbeSet default_probes(std::uint64_t seed = 1, int random_pure = 10, int random_mixed = 2) {
    ProbeSet ps;
    for (int k = 0; k < 3; ++k)
        for (double s : {1.0, -1.0}) {
            BlochVector v;
            v[k] = s;
            ps.states.push_back(from_bloch(v));
        }
    Xoshiro256 rng(seed);
    for (int i = 0; i < random_pure; ++i) ps.states.push_back(from_bloch(random_unit_vector(rng)));
    for (int i = 0; i < random_mixed; ++i) ps.states.push_back(from_bloch(random_bloch_vector(rng, 0.9)));
    return ps;
}

// Longest decay time scale the exponent fit has to resolve, used to pick the
// default horizon 20 / rate.
inline double characteristic_rate(const LindbladModel& model) {
    if (model.origin && !std::holds_alternative<preset::SigmaXConjugation>(*model.origin)) {
        const double lam = lambda_q_analytic(*model.origin);
        if (lam > 0.0) return lam;
    }
    const double r = model.max_rate();
    return r > 0.0 ? r : 1.0;
}

inline double default_horizon(const LindbladModel& model) { return 20.0 / characteristic_rate(model); }

// States T_t(rho0) at the requested increasing times. Uses the closed-form
// route when the model came from a preset, the RK4 integrator otherwise.
inline std::vector<DensityMatrix> propagate(const LindbladModel& model, const DensityMatrix& rho0,
                                            const std::vector<double>& times, bool force_integrator = false) {
    std::vector<DensityMatrix> out;
    out.reserve(times.size());
    if (model.origin && !force_integrator) {
        for (double t : times) out.push_back(analytic_evolve(*model.origin, rho0, t));
        return out;
    }
    DensityMatrix state = rho0;
    double now = 0.0;
    const double dt = default_time_step(model);
    for (double t : times) {
        if (t > now) {
            state = evolve(model, state, t - now, dt, std::numeric_limits<std::size_t>::max()).states.back();
            now = t;
        }
        out.push_back(state);
    }
    return out;
}

enum class MixingOutcome { exponentially_mixing, not_completely_mixing };

inline const char* to_string(MixingOutcome o) {
    return o == MixingOutcome::exponentially_mixing ? "exponentially_mixing" : "not_completely_mixing";
}

struct ProbeSlope {
    double slope = 0.0;
    int prefactor_order = 0;     // k in d(t) ~ (t - c)^k exp(-slope t)
    double residual = 0.0;       // RMS residual of the chosen fit
    double t_lo = 0.0;
    double t_hi = 0.0;
    double distance_at_t_hi = 0.0;
    std::size_t samples = 0;
};

struct ExponentEstimate {
    double lambda = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double regression_residual = 0.0;  // of the probe attaining the minimum
    std::size_t argmin = 0;
    std::vector<ProbeSlope> probes;
    MixingOutcome outcome = MixingOutcome::exponentially_mixing;
    std::string diagnostic;
};

struct ExponentOptions {
    std::size_t samples = 200;
    bool force_integrator = false;
    double decay_threshold = 1e-2;   // distance at t_max must fall below this
    double distance_floor = 1e-12;   // samples below are excluded from the fit
    double underflow = 1e-13;        // window start below this shrinks the window
};

namespace detail {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// Fits d(t) ~ (t - c)^k exp(-lambda t) with k = 0 and k = 1, i.e. a plain
// exponential or one carrying the linear prefactor of a 2x2 Jordan block in
// the Bloch generator. For k = 1 the shift c < t_lo is found by a geometric
// scan; that model is kept only when it at least halves the k = 0 residual.
inline ProbeSlope fit_decay(const std::vector<double>& t, const std::vector<double>& d) {
    std::vector<double> y(t.size()), shifted(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = -std::log(d[i]);
    const auto plain = least_squares(t, y);

    ProbeSlope s;
    s.slope = plain.slope;
    s.residual = plain.rms_residual;
    s.samples = t.size();
    s.t_lo = t.front();
    s.t_hi = t.back();

    const double width = t.back() - t.front();
    const double g_min = 1e-3 * width, g_max = 1e3 * t.back();
    constexpr int kScan = 400;
    LinearFit best;
    best.rms_residual = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kScan; ++j) {
        const double c = t.front() - g_min * std::pow(g_max / g_min, j / double(kScan - 1));
        for (std::size_t i = 0; i < t.size(); ++i) shifted[i] = y[i] + std::log(t[i] - c);
        const auto f = least_squares(t, shifted);
        if (f.rms_residual < best.rms_residual) best = f;
    }
    if (best.rms_residual < 0.5 * plain.rms_residual) {
        s.slope = best.slope;
        s.residual = best.rms_residual;
        s.prefactor_order = 1;
    }
    return s;
}

} // namespace detail

inline void validate_probes(const ProbeSet& probes, const DensityMatrix& ref) {
    if (probes.states.empty()) throw DomainError("probe set is empty");
    for (std::size_t i = 0; i < probes.states.size(); ++i)
        if (trace_distance(probes.states[i], ref) < 1e-6)
            throw DomainError("probe " + std::to_string(i) + " coincides with the reference state");
}

inline ExponentEstimate lambda_q_numeric(const LindbladModel& model, const DensityMatrix& rho_ref,
                                         const ProbeSet& probes, double t_max, const ExponentOptions& opt = {}) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("lambda_q_numeric: t_max must be > 0");
    validate_probes(probes, rho_ref);

    ExponentEstimate est;
    est.t_lo = 0.5 * t_max;
    est.t_hi = t_max;
    est.probes.resize(probes.states.size());
    std::vector<std::string> notes(probes.states.size());

    parallel_for(probes.states.size(), [&](std::size_t i) {
        double horizon = t_max;
        for (int attempt = 0;; ++attempt) {
            const auto times = detail::linspace(0.5 * horizon, horizon, opt.samples);
            const auto ref = propagate(model, rho_ref, times, opt.force_integrator);
            const auto other = propagate(model, probes.states[i], times, opt.force_integrator);
            std::vector<double> t, d;
            for (std::size_t j = 0; j < times.size(); ++j) {
                const double dist = trace_norm(ref[j].matrix() - other[j].matrix());
                if (j == 0 && dist < opt.underflow) break;
                if (dist < opt.distance_floor) break;
                t.push_back(times[j]);
                d.push_back(dist);
            }
            if (t.empty()) {
                if (attempt >= 30)
                    throw NumericalError("lambda_q_numeric: distance for probe " + std::to_string(i) +
                                         " underflows at every horizon");
                horizon *= 0.5;
                continue;
            }
            if (t.size() < 10)
                throw NumericalError("lambda_q_numeric: fewer than 10 resolvable distances for probe " +
                                     std::to_string(i) + "; choose a shorter t_max");
            est.probes[i] = detail::fit_decay(t, d);
            est.probes[i].distance_at_t_hi = d.back();
            if (horizon < t_max)
                notes[i] = "probe " + std::to_string(i) + ": distance underflows before t_max/2, window shrunk to [" +
                           std::to_string(0.5 * horizon) + ", " + std::to_string(horizon) + "]";
            break;
        }
    });

    est.lambda = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.probes.size(); ++i) {
        const auto& p = est.probes[i];
        if (p.slope < est.lambda) {
            est.lambda = p.slope;
            est.argmin = i;
        }
        if (!notes[i].empty()) est.diagnostic += notes[i] + "; ";
        // A probe that never left the decay threshold was fitted on the full window.
        if (p.t_hi >= t_max * (1 - 1e-12) && p.distance_at_t_hi >= opt.decay_threshold) {
            est.outcome = MixingOutcome::not_completely_mixing;
            est.diagnostic += "probe " + std::to_string(i) + ": distance " + std::to_string(p.distance_at_t_hi) +
                              " has not decayed below " + std::to_string(opt.decay_threshold) + " by t_max; ";
        }
    }
    est.regression_residual = est.probes[est.argmin].residual;
    if (est.outcome == MixingOutcome::not_completely_mixing)
        est.diagnostic = "not completely mixing at this horizon: " + est.diagnostic;
    return est;
}

struct MixingClassification {
    bool completely_mixing = false;
    bool exact = false;
    double max_pairwise_relative_entropy = 0.0;  // +inf on a support violation
    double min_entropy = 0.0;                    // smallest von Neumann entropy among evolved probes
};

inline MixingClassification classify_mixing(const LindbladModel& model, const ProbeSet& probes, double t_max,
                                            double tol = 1e-4) {
    if (probes.states.size() < 2) throw DomainError("classify_mixing needs at least two probes");
    std::vector<DensityMatrix> late(probes.states.size());
    parallel_for(probes.states.size(), [&](std::size_t i) {
        late[i] = propagate(model, probes.states[i], {t_max}).back();
    });

    MixingClassification c;
    c.min_entropy = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < late.size(); ++i) {
        c.min_entropy = std::min(c.min_entropy, von_neumann_entropy(late[i]));
        for (std::size_t j = 0; j < late.size(); ++j) {
            if (i == j) continue;
            const auto h = relative_entropy(late[i], late[j]);
            c.max_pairwise_relative_entropy =
                std::max(c.max_pairwise_relative_entropy, h.infinite ? std::numeric_limits<double>::infinity() : h.value);
        }
    }
    c.completely_mixing = c.max_pairwise_relative_entropy < tol;
    c.exact = c.completely_mixing && std::abs(c.min_entropy - std::log(2.0)) < tol;
    return c;
}

} // namespace qmix

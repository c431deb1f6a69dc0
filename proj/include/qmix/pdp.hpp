#pragma once

// Piecewise deterministic process on the Bloch sphere for four unsharp
// tetrahedral spin detectors: precession about z at angular frequency omega,
// interrupted by Poisson jumps through one of four nonlinear maps. With
// omega = 0 the post-jump states form the chaos game of that iterated
// function system.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qmix/lindblad.hpp"
#include "qmix/parallel.hpp"
#include "qmix/point_cloud.hpp"
#include "qmix/rng.hpp"

namespace qmix {

struct PureSpinState {
    BlochVector r{0.0, 0.0, 1.0};

    PureSpinState() = default;
    explicit PureSpinState(const BlochVector& v, double tol = 1e-12) : r(v) {
        if (std::abs(v.norm() - 1.0) > tol) throw DomainError("pure spin state must be a unit vector");
    }
};

struct TetrahedronIFS {
    double alpha = 0.7;
    std::array<BlochVector, 4> directions = tetrahedron_directions();

    explicit TetrahedronIFS(double a = 0.7) : alpha(a) {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
    }
};

inline constexpr double kJumpDenominatorFloor = 1e-12;

// Post-jump state for detector direction n:
//   [(1 - a^2) r + 2a (1 + a r.n) n] / (1 + a^2 + 2a r.n).
// Returned unnormalized; callers renormalize and track the drift.
inline BlochVector jump_map_raw(const BlochVector& r, const BlochVector& n, double alpha) {
    const double rn = r.dot(n);
    const double den = 1.0 + alpha * alpha + 2.0 * alpha * rn;
    if (den < kJumpDenominatorFloor) throw DomainError("jump map is singular at the antipode of a sharp detector");
    return (1.0 / den) * ((1.0 - alpha * alpha) * r + (2.0 * alpha * (1.0 + alpha * rn)) * n);
}

// Detectors are numbered 1..4.
inline PureSpinState jump_map(const PureSpinState& s, int detector, double alpha) {
    if (detector < 1 || detector > 4) throw DomainError("detector index must be in 1..4");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
    const BlochVector v = jump_map_raw(s.r, tetrahedron_directions()[static_cast<std::size_t>(detector - 1)], alpha);
    return PureSpinState((1.0 / v.norm()) * v, 1e-9);
}

// p_i = (1 + a^2 + 2a r.n_i) / (4 (1 + a^2)); sums to one because sum n_i = 0.
inline std::array<double, 4> jump_probs(const BlochVector& r, double alpha,
                                        const std::array<BlochVector, 4>& n = tetrahedron_directions()) {
    const double norm = 4.0 * (1.0 + alpha * alpha);
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < 4; ++i) p[i] = std::max(0.0, (1.0 + alpha * alpha + 2.0 * alpha * r.dot(n[i])) / norm);
    return p;
}

// Inverse CDF over detectors 1..4 in fixed order with a single uniform draw.
inline int choose_detector(const std::array<double, 4>& p, double u) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        acc += p[static_cast<std::size_t>(i)];
        if (u < acc) return i + 1;
    }
    return 4;
}

inline BlochVector rotate_z(const BlochVector& r, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * r.x1 - s * r.x2, s * r.x1 + c * r.x2, r.x3};
}

// Jump-rate convention. `literal` uses rate kappa. `trace_lambda` uses
// kappa (1 + alpha^2) = kappa tr(sum_i a_i^2 rho), the total detection rate of
// the master equation. The jump chain, hence all fractal geometry, is the
// same under both; only the physical clock differs.
enum class RateConvention { literal, trace_lambda };

inline const char* to_string(RateConvention r) { return r == RateConvention::literal ? "literal" : "trace_lambda"; }

struct PdpParams {
    double omega = 0.0;
    double kappa = 1.0;
    double alpha = 0.7;
    RateConvention rate = RateConvention::literal;

    double jump_rate() const { return rate == RateConvention::literal ? kappa : kappa * (1.0 + alpha * alpha); }

    void validate() const {
        if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be > 0");
        if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("omega must be >= 0");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
    }
};

struct JumpRecord {
    double time = 0.0;
    int detector = 1;  // 1..4
    BlochVector state;
};

struct SamplePath {
    BlochVector initial;
    std::vector<JumpRecord> jumps;
    PdpParams params;
    std::uint64_t seed = 0;
    double max_renormalization = 0.0;  // largest | |r| - 1 | removed after a jump
};

// Sequential sampler; one instance per path.
class PdpSampler {
public:
    PdpSampler(const PdpParams& params, const BlochVector& r0, std::uint64_t seed)
        : params_(params), ifs_(params.alpha), state_(r0), rng_(seed) {
        params_.validate();
        PureSpinState check(r0, 1e-9);
    }

    // Advances through the next jump and returns it.
    JumpRecord next_jump() {
        const double wait = rng_.exponential(params_.jump_rate());
        time_ += wait;
        state_ = rotate_z(state_, params_.omega * wait);
        return apply_jump();
    }

    // State at absolute time t >= now; jumps that occur before t are applied.
    BlochVector advance_to(double t) {
        for (;;) {
            if (!pending_) {
                pending_wait_ = rng_.exponential(params_.jump_rate());
                pending_ = true;
            }
            if (time_ + pending_wait_ > t) {
                const double dt = t - time_;
                state_ = rotate_z(state_, params_.omega * dt);
                pending_wait_ -= dt;
                time_ = t;
                return state_;
            }
            time_ += pending_wait_;
            state_ = rotate_z(state_, params_.omega * pending_wait_);
            pending_ = false;
            apply_jump();
        }
    }

    double time() const { return time_; }
    const BlochVector& state() const { return state_; }
    double max_renormalization() const { return max_renorm_; }

private:
    JumpRecord apply_jump() {
        const int det = choose_detector(jump_probs(state_, params_.alpha, ifs_.directions), rng_.uniform());
        const BlochVector raw = jump_map_raw(state_, ifs_.directions[static_cast<std::size_t>(det - 1)], params_.alpha);
        const double norm = raw.norm();
        max_renorm_ = std::max(max_renorm_, std::abs(norm - 1.0));
        state_ = (1.0 / norm) * raw;
        return {time_, det, state_};
    }

    PdpParams params_;
    TetrahedronIFS ifs_;
    BlochVector state_;
    Xoshiro256 rng_;
    double time_ = 0.0;
    bool pending_ = false;
    double pending_wait_ = 0.0;
    double max_renorm_ = 0.0;
};

inline SamplePath sample_path(const PdpParams& params, const BlochVector& r0, std::size_t n_jumps,
                              std::uint64_t seed) {
    if (n_jumps < 1) throw DomainError("sample_path needs at least one jump");
    PdpSampler sampler(params, r0, seed);
    SamplePath path;
    path.initial = r0;
    path.params = params;
    path.seed = seed;
    path.jumps.reserve(n_jumps);
    for (std::size_t i = 0; i < n_jumps; ++i) path.jumps.push_back(sampler.next_jump());
    path.max_renormalization = sampler.max_renormalization();
    return path;
}

inline constexpr std::size_t kDefaultBurnIn = 100;

// Post-jump states of the omega = 0, kappa = 1 process after discarding the
// first `burn_in` jumps.
inline PointCloud chaos_game(double alpha, std::size_t n_points, std::uint64_t seed,
                             std::size_t burn_in = kDefaultBurnIn, const BlochVector& r0 = {0.0, 0.0, 1.0}) {
    if (n_points < 1) throw DomainError("chaos_game needs at least one point");
    PdpSampler sampler({0.0, 1.0, alpha, RateConvention::literal}, r0, seed);
    for (std::size_t i = 0; i < burn_in; ++i) sampler.next_jump();
    PointCloud cloud;
    cloud.points.reserve(n_points);
    cloud.detectors.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const auto j = sampler.next_jump();
        cloud.points.push_back(j.state);
        cloud.detectors.push_back(static_cast<std::uint8_t>(j.detector));
    }
    return cloud;
}

// Mean Bloch vector over n_paths independent paths at time t, with path i
// seeded by stream_seed(seed, i) and partial sums combined in path order.
inline BlochVector ensemble_bloch(const PdpParams& params, const BlochVector& r0, double t, std::size_t n_paths,
                                  std::uint64_t seed) {
    if (n_paths == 0) throw DomainError("ensemble needs at least one path");
    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (n_paths + kBlock - 1) / kBlock;
    std::vector<BlochVector> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        BlochVector acc;
        const std::size_t end = std::min(n_paths, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            PdpSampler s(params, r0, stream_seed(seed, i));
            acc = acc + s.advance_to(t);
        }
        partial[b] = acc;
    });
    BlochVector sum;
    for (const auto& p : partial) sum = sum + p;
    return (1.0 / static_cast<double>(n_paths)) * sum;
}

} // namespace qmix

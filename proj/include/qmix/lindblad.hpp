#pragma once

// Lindblad generators for a single qubit, a fixed-step RK4 integrator, closed
// form / matrix-exponential solutions in Bloch coordinates, and stationary
// states.

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qmix/error.hpp"
#include "qmix/quantum_core.hpp"

namespace qmix {

// ---------------------------------------------------------------------------
// Presets

namespace preset {

// Four unsharp spin detectors along the tetrahedron directions, H = (omega/2) sigma3.
struct Tetrahedron {
    double kappa = 1.0;
    double alpha = 1.0;
    double omega = 0.0;
};

// Repeated "is it +x?" checks at rate kappa against precession H = (omega/2) sigma3.
struct Zeno {
    double kappa = 1.0;
    double omega = 1.0;
};

// Resonantly driven two-level atom, H = -(Omega/2) sigma1, decay A = |2><1| at rate gamma.
struct Fluorescence {
    double Omega = 1.0;
    double gamma = 1.0;
};

// rho' = sigma1 rho sigma1 - rho. Dissipative but not completely mixing.
struct SigmaXConjugation {};

} // namespace preset

using ModelPreset = std::variant<preset::Tetrahedron, preset::Zeno, preset::Fluorescence, preset::SigmaXConjugation>;

inline std::string preset_name(const ModelPreset& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, preset::Tetrahedron>) return "tetrahedron";
            else if constexpr (std::is_same_v<T, preset::Zeno>) return "zeno";
            else if constexpr (std::is_same_v<T, preset::Fluorescence>) return "fluorescence";
            else return "sigma_x";
        },
        p);
}

inline void validate_preset(const ModelPreset& p) {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be finite and >= 0");
    };
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, preset::Tetrahedron>) {
                nonneg(v.kappa, "kappa");
                nonneg(v.omega, "omega");
                if (!(v.alpha >= 0.0 && v.alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
            } else if constexpr (std::is_same_v<T, preset::Zeno>) {
                nonneg(v.kappa, "kappa");
                nonneg(v.omega, "omega");
            } else if constexpr (std::is_same_v<T, preset::Fluorescence>) {
                nonneg(v.Omega, "Omega");
                nonneg(v.gamma, "gamma");
            }
        },
        p);
}

// Detector directions: vertices of a regular tetrahedron inscribed in S^2.
inline std::array<BlochVector, 4> tetrahedron_directions() {
    const double s23 = std::sqrt(2.0 / 3.0);
    const double s2 = std::sqrt(2.0);
    return {{{1.0, 0.0, 0.0},
             {-1.0 / 3.0, 0.0, 2.0 * s2 / 3.0},
             {-1.0 / 3.0, s23, -s2 / 3.0},
             {-1.0 / 3.0, -s23, -s2 / 3.0}}};
}

// ---------------------------------------------------------------------------
// Model

struct JumpTerm {
    Matrix2 op;
    double rate = 0.0;
};

struct LindbladModel {
    Matrix2 hamiltonian;
    std::vector<JumpTerm> jump_terms;
    // Set when the model came from build_model; enables closed-form routes.
    std::optional<ModelPreset> origin;

    LindbladModel() = default;
    LindbladModel(Matrix2 h, std::vector<JumpTerm> jumps, std::optional<ModelPreset> from = std::nullopt)
        : hamiltonian(h), jump_terms(std::move(jumps)), origin(std::move(from)) {
        require_hermitian(hamiltonian, "hamiltonian");
        for (const auto& j : jump_terms)
            if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) throw DomainError("jump rates must be finite and >= 0");
    }

    double max_rate() const {
        double r = 0.0;
        for (const auto& j : jump_terms) r = std::max(r, j.rate);
        return r;
    }

    // Spectral gap of the Hamiltonian (its precession frequency).
    double max_frequency() const {
        const auto s = hermitian_spectrum(hamiltonian);
        return s.hi - s.lo;
    }
};

inline LindbladModel build_model(const ModelPreset& p) {
    validate_preset(p);
    using namespace pauli;
    return std::visit(
        [&](const auto& v) -> LindbladModel {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, preset::Tetrahedron>) {
                std::vector<JumpTerm> jumps;
                for (const auto& n : tetrahedron_directions()) {
                    const Matrix2 a = 0.5 * (identity + v.alpha * (n.x1 * sigma1 + n.x2 * sigma2 + n.x3 * sigma3));
                    jumps.push_back({a, v.kappa});
                }
                return {0.5 * v.omega * sigma3, std::move(jumps), p};
            } else if constexpr (std::is_same_v<T, preset::Zeno>) {
                const Matrix2 e = 0.5 * (identity + sigma1);
                return {0.5 * v.omega * sigma3, {{e, v.kappa}}, p};
            } else if constexpr (std::is_same_v<T, preset::Fluorescence>) {
                const Matrix2 lowering{0.0, 0.0, 1.0, 0.0};
                return {-0.5 * v.Omega * sigma1, {{lowering, v.gamma}}, p};
            } else {
                return {Matrix2::zero(), {{sigma1, 1.0}}, p};
            }
        },
        p);
}

// -i[H, rho] + sum_j rate_j (g_j rho g_j^* - 1/2 {g_j^* g_j, rho})
inline Matrix2 generator_apply(const LindbladModel& model, const Matrix2& rho) {
    Matrix2 out = cplx{0.0, -1.0} * commutator(model.hamiltonian, rho);
    for (const auto& j : model.jump_terms) {
        if (j.rate == 0.0) continue;
        const Matrix2 gd = j.op.adjoint();
        out += j.rate * (j.op * rho * gd - 0.5 * anticommutator(gd * j.op, rho));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bloch form: m' = A m + b for rho = (I + m.sigma)/2.

struct BlochGenerator {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
};

inline Eigen::Vector3d to_eigen(const BlochVector& v) { return {v.x1, v.x2, v.x3}; }
inline BlochVector from_eigen(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

// Read off A and b by applying the generator to I/2 and sigma_j/2.
inline BlochGenerator bloch_generator(const LindbladModel& model) {
    BlochGenerator g;
    const Matrix2 l0 = generator_apply(model, 0.5 * pauli::identity);
    for (int k = 0; k < 3; ++k) g.b(k) = (pauli::sigma(k) * l0).trace().real();
    for (int j = 0; j < 3; ++j) {
        const Matrix2 lj = generator_apply(model, 0.5 * pauli::sigma(j));
        for (int k = 0; k < 3; ++k) g.A(k, j) = (pauli::sigma(k) * lj).trace().real();
    }
    return g;
}

// Hand-derived Bloch equations for each preset, kept separate from the
// generic read-off above so the two can be checked against each other.
inline BlochGenerator preset_bloch_generator(const ModelPreset& p) {
    validate_preset(p);
    BlochGenerator g;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, preset::Tetrahedron>) {
                const double d = 4.0 / 3.0 * v.kappa * v.alpha * v.alpha;
                g.A << -d, -v.omega, 0.0,
                       v.omega, -d, 0.0,
                       0.0, 0.0, -d;
            } else if constexpr (std::is_same_v<T, preset::Zeno>) {
                g.A << 0.0, -v.omega, 0.0,
                       v.omega, -0.5 * v.kappa, 0.0,
                       0.0, 0.0, -0.5 * v.kappa;
            } else if constexpr (std::is_same_v<T, preset::Fluorescence>) {
                g.A << -0.5 * v.gamma, 0.0, 0.0,
                       0.0, -0.5 * v.gamma, v.Omega,
                       0.0, -v.Omega, -v.gamma;
                g.b << 0.0, 0.0, v.gamma;
            } else {
                g.A << 0.0, 0.0, 0.0,
                       0.0, -2.0, 0.0,
                       0.0, 0.0, -2.0;
            }
        },
        p);
    return g;
}

// ---------------------------------------------------------------------------
// Closed-form evolution

inline DensityMatrix analytic_evolve(const ModelPreset& p, const DensityMatrix& rho0, double t) {
    if (!(t >= 0.0)) throw DomainError("analytic_evolve: t must be >= 0");
    validate_preset(p);
    const BlochVector m0 = to_bloch(rho0);

    if (const auto* tet = std::get_if<preset::Tetrahedron>(&p)) {
        const double decay = std::exp(-4.0 / 3.0 * tet->kappa * tet->alpha * tet->alpha * t);
        const double c = std::cos(tet->omega * t);
        const double s = std::sin(tet->omega * t);
        return from_bloch({(-m0.x2 * s + m0.x1 * c) * decay, (m0.x1 * s + m0.x2 * c) * decay, m0.x3 * decay});
    }
    if (std::holds_alternative<preset::SigmaXConjugation>(p)) {
        const double decay = std::exp(-2.0 * t);
        return from_bloch({m0.x1, m0.x2 * decay, m0.x3 * decay});
    }

    // Affine system via the augmented 4x4 exponential exp([[A, b], [0, 0]] t).
    const auto g = preset_bloch_generator(p);
    Eigen::Matrix4d aug = Eigen::Matrix4d::Zero();
    aug.topLeftCorner<3, 3>() = g.A * t;
    aug.topRightCorner<3, 1>() = g.b * t;
    const Eigen::Matrix4d e = aug.exp();
    Eigen::Vector4d y;
    y << to_eigen(m0), 1.0;
    const Eigen::Vector4d out = e * y;
    BlochVector m = from_eigen(out.head<3>());
    // Contractions can overshoot the unit sphere by rounding only.
    const double r = m.norm();
    if (r > 1.0) m = (1.0 / r) * m;
    return from_bloch(m);
}

// ---------------------------------------------------------------------------
// Stationary states

struct StationaryResult {
    DensityMatrix state;             // a stationary state (the one, when unique)
    bool unique = true;
    std::vector<BlochVector> kernel;  // directions of the fixed Bloch subspace when not unique
    double residual = 0.0;           // max entry of |L(state)|
    std::string description;
};

inline StationaryResult stationary_state(const LindbladModel& model) {
    const auto g = bloch_generator(model);
    Eigen::FullPivLU<Eigen::Matrix3d> lu(g.A);
    lu.setThreshold(1e-12);

    StationaryResult res;
    if (lu.rank() == 3) {
        BlochVector m = from_eigen(lu.solve(-g.b));
        res.state = from_bloch(m);
        res.description = "unique";
    } else {
        res.unique = false;
        Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod(g.A);
        cod.setThreshold(1e-12);
        res.state = from_bloch(from_eigen(cod.solve(-g.b)));
        const Eigen::MatrixXd ker = lu.kernel();
        std::string dirs;
        for (Eigen::Index c = 0; c < ker.cols(); ++c) {
            Eigen::Vector3d v = ker.col(c).normalized();
            res.kernel.push_back(from_eigen(v));
            dirs += (c ? ", " : "") + std::string("(") + std::to_string(v(0)) + ", " + std::to_string(v(1)) + ", " +
                    std::to_string(v(2)) + ")";
        }
        res.description = "non-unique: stationary Bloch vectors form an affine subspace of dimension " +
                          std::to_string(ker.cols()) + " through the returned state along " + dirs;
    }
    res.residual = generator_apply(model, res.state.matrix()).max_abs();
    return res;
}

// The t -> infinity limit of the trajectory started at rho0.
inline DensityMatrix asymptotic_state(const LindbladModel& model, const DensityMatrix& rho0) {
    if (model.origin && std::holds_alternative<preset::SigmaXConjugation>(*model.origin)) {
        const BlochVector m = to_bloch(rho0);
        return from_bloch({m.x1, 0.0, 0.0});
    }
    auto st = stationary_state(model);
    if (!st.unique) throw NumericalError("asymptotic state depends on the initial state: " + st.description);
    return st.state;
}

// ---------------------------------------------------------------------------
// Numerical integration

struct StateTrajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double step = 0.0;
    std::string method = "rk4";
    std::size_t clamp_count = 0;    // samples pulled back onto the Bloch ball
    double max_clamp = 0.0;          // largest negative eigenvalue removed
};

inline double default_time_step(const LindbladModel& model) {
    const double fast = std::max(model.max_rate(), model.max_frequency());
    return fast > 0.0 ? std::min(1e-3, 0.01 / fast) : 1e-3;
}

inline constexpr double kClampSilent = 1e-9;
inline constexpr double kClampAbort = 1e-6;

// Fixed-step classical RK4 on rho' = L(rho). The last step is shortened so
// the run ends exactly at t_end. States are recorded every `sample_every`
// steps plus at both ends.
inline StateTrajectory evolve(const LindbladModel& model, const DensityMatrix& rho0, double t_end, double dt = 0.0,
                              std::size_t sample_every = 1) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("evolve: t_end must be finite and >= 0");
    if (dt == 0.0) dt = default_time_step(model);
    if (!(dt > 0.0)) throw DomainError("evolve: dt must be > 0");
    sample_every = std::max<std::size_t>(sample_every, 1);

    StateTrajectory traj;
    traj.step = dt;
    traj.times.push_back(0.0);
    traj.states.push_back(rho0);
    if (t_end == 0.0) return traj;

    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    Matrix2 rho = rho0.matrix();
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t0 = static_cast<double>(i) * dt;
        const double h = (i + 1 == n_steps) ? t_end - t0 : dt;
        const Matrix2 k1 = generator_apply(model, rho);
        const Matrix2 k2 = generator_apply(model, rho + (0.5 * h) * k1);
        const Matrix2 k3 = generator_apply(model, rho + (0.5 * h) * k2);
        const Matrix2 k4 = generator_apply(model, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint());

        const auto spec = hermitian_spectrum(rho);
        if (spec.lo < 0.0) {
            const double excess = -spec.lo;
            if (excess > kClampAbort)
                throw NumericalError("evolve: positivity violated by " + std::to_string(excess) + " at t=" +
                                     std::to_string(t0 + h) + "; reduce dt");
            if (excess > kClampSilent)
                std::clog << "qmix: warning: clamped negative eigenvalue " << excess << " at t=" << t0 + h << '\n';
            auto d = pauli_decompose(rho);
            d.h = (d.h0 / d.h.norm()) * d.h;
            rho = pauli_compose(d.h0, d.h);
            ++traj.clamp_count;
            traj.max_clamp = std::max(traj.max_clamp, excess);
        }

        if ((i + 1) % sample_every == 0 || i + 1 == n_steps) {
            traj.times.push_back(i + 1 == n_steps ? t_end : t0 + h);
            traj.states.emplace_back(rho, 1e-10);
        }
    }
    return traj;
}

} // namespace qmix

#pragma once

// Densities on the circle with respect to dx/2pi and the Perron-Frobenius
// operator of the r-adic map x -> r x (mod 2 pi).
//
// Positions are stored in the normalized coordinate u = x / 2pi in [0, 1).
// A density is either exactly piecewise affine, f(u) = a + s u on each piece,
// or a grid of values at u_i = i / M.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "qmix/error.hpp"
#include "qmix/fit.hpp"
#include "qmix/quantum_core.hpp"

namespace qmix {

struct RadicMap {
    int r = 2;

    explicit RadicMap(int r_ = 2) : r(r_) {
        if (r_ < 2) throw DomainError("r-adic map needs r >= 2");
    }
};

// f(u) = a + s u on [start, next start).
struct AffinePiece {
    double start = 0.0;
    double a = 1.0;
    double s = 0.0;

    double at(double u) const { return a + s * u; }
    bool operator==(const AffinePiece&) const = default;
};

inline constexpr double kDensityMassTol = 1e-12;
inline constexpr double kSupportThreshold = 1e-14;

class CircleDensity {
public:
    using Pieces = std::vector<AffinePiece>;
    using Grid = std::vector<double>;

    CircleDensity() : rep_(Pieces{AffinePiece{}}) {}

    // Pieces must start at 0 with increasing starts below 1.
    static CircleDensity affine(Pieces pieces, double tol = kDensityMassTol) {
        if (pieces.empty() || pieces.front().start != 0.0) throw DomainError("affine density must start at u = 0");
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const double end = i + 1 < pieces.size() ? pieces[i + 1].start : 1.0;
            if (!(end > pieces[i].start)) throw DomainError("affine breakpoints must increase within [0, 1)");
            if (std::min(pieces[i].at(pieces[i].start), pieces[i].at(end)) < -tol)
                throw DomainError("density takes negative values");
        }
        CircleDensity d;
        d.rep_ = std::move(pieces);
        d.check_mass(tol);
        return d;
    }

    static CircleDensity grid(Grid values, double tol = kDensityMassTol) {
        if (values.empty()) throw DomainError("grid density needs at least one value");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density takes negative or non-finite values");
        CircleDensity d;
        d.rep_ = std::move(values);
        d.check_mass(tol);
        return d;
    }

    // Samples fn(u) on M points and rescales to unit mass.
    static CircleDensity sampled(const std::function<double(double)>& fn, std::size_t m) {
        Grid v(m);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += v[i] = fn(static_cast<double>(i) / static_cast<double>(m));
        if (!(sum > 0.0)) throw DomainError("sampled function has no mass");
        for (double& x : v) x *= static_cast<double>(m) / sum;
        return grid(std::move(v));
    }

    static CircleDensity uniform() { return {}; }

    bool is_affine() const { return std::holds_alternative<Pieces>(rep_); }
    const Pieces& pieces() const { return std::get<Pieces>(rep_); }
    const Grid& values() const { return std::get<Grid>(rep_); }
    std::size_t grid_size() const { return is_affine() ? 0 : values().size(); }

    double end_of(std::size_t i) const { return i + 1 < pieces().size() ? pieces()[i + 1].start : 1.0; }

    // Affine piece covering u in [0, 1).
    const AffinePiece& piece_at(double u) const {
        const auto& p = pieces();
        const auto it =
            std::upper_bound(p.begin(), p.end(), u, [](double x, const AffinePiece& q) { return x < q.start; });
        return *std::prev(it);
    }

    // Value at u in [0, 1). Grid densities are read at the nearest lower node.
    double operator()(double u) const {
        u -= std::floor(u);
        if (is_affine()) return piece_at(u).at(u);
        const auto& g = values();
        const auto idx = std::min(g.size() - 1, static_cast<std::size_t>(u * static_cast<double>(g.size())));
        return g[idx];
    }

    Grid sample(std::size_t m) const {
        if (!is_affine()) {
            if (m != values().size()) throw DomainError("grid densities of different sizes are not compatible");
            return values();
        }
        Grid v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = (*this)(static_cast<double>(i) / static_cast<double>(m));
        return v;
    }

    double mass() const {
        if (is_affine()) {
            double total = 0.0;
            for (std::size_t i = 0; i < pieces().size(); ++i) {
                const double c = pieces()[i].start, d = end_of(i);
                total += pieces()[i].a * (d - c) + 0.5 * pieces()[i].s * (d * d - c * c);
            }
            return total;
        }
        double sum = 0.0;
        for (double v : values()) sum += v;
        return sum / static_cast<double>(values().size());
    }

private:
    void check_mass(double tol) const {
        if (std::abs(mass() - 1.0) > tol)
            throw DomainError("density mass is " + std::to_string(mass()) + ", expected 1");
    }

    std::variant<Pieces, Grid> rep_;
};

namespace detail {

inline std::vector<AffinePiece> merge_equal_pieces(std::vector<AffinePiece> in) {
    std::vector<AffinePiece> out;
    for (const auto& p : in)
        if (out.empty() || out.back().a != p.a || out.back().s != p.s) out.push_back(p);
    return out;
}

// Union of breakpoints of two affine densities.
inline std::vector<double> merged_breaks(const CircleDensity& f, const CircleDensity& g) {
    std::vector<double> b;
    for (const auto& p : f.pieces()) b.push_back(p.start);
    for (const auto& p : g.pieces()) b.push_back(p.start);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    b.push_back(1.0);
    return b;
}

// 10-point Gauss-Legendre on [c, d].
inline double gauss_legendre(const std::function<double(double)>& fn, double c, double d) {
    static constexpr std::array<double, 5> x{0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                             0.8650633666889845, 0.9739065285171717};
    static constexpr std::array<double, 5> w{0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                             0.1494513491505806, 0.0666713443086881};
    const double m = 0.5 * (c + d), h = 0.5 * (d - c);
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += w[i] * (fn(m - h * x[i]) + fn(m + h * x[i]));
    return s * h;
}

inline double eta(double y) { return y > 0.0 ? -y * std::log(y) : 0.0; }

} // namespace detail

// Pf(u) = (1/r) sum_j f((u + j) / r).
inline CircleDensity pf_apply(const CircleDensity& f, const RadicMap& map) {
    const int r = map.r;
    if (!f.is_affine()) {
        const auto& v = f.values();
        if (v.size() % static_cast<std::size_t>(r) != 0)
            throw DomainError("grid size " + std::to_string(v.size()) + " is not divisible by r = " + std::to_string(r));
        const std::size_t m = v.size() / static_cast<std::size_t>(r);
        std::vector<double> out(m, 0.0);
        for (std::size_t c = 0; c < m; ++c) {
            double s = 0.0;
            for (int j = 0; j < r; ++j) s += v[c + static_cast<std::size_t>(j) * m];
            out[c] = s / r;
        }
        return CircleDensity::grid(std::move(out), 1e-10);
    }
    // New breakpoints are r b (mod 1) for every old breakpoint b.
    std::vector<double> breaks;
    for (const auto& p : f.pieces()) {
        const double x = r * p.start;
        breaks.push_back(x - std::floor(x));
    }
    breaks.push_back(0.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<AffinePiece> out;
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        const double c = breaks[i], d = i + 1 < breaks.size() ? breaks[i + 1] : 1.0;
        const double mid = 0.5 * (c + d);
        double a = 0.0, s = 0.0;
        for (int j = 0; j < r; ++j) {
            const auto& p = f.piece_at((mid + j) / r);
            a += p.a + p.s * j / r;
            s += p.s / r;
        }
        out.push_back({c, a / r, s / r});
    }
    return CircleDensity::affine(detail::merge_equal_pieces(std::move(out)), 1e-10);
}

inline CircleDensity pf_apply(const CircleDensity& f, const RadicMap& map, int n) {
    CircleDensity g = f;
    for (int i = 0; i < n; ++i) g = pf_apply(g, map);
    return g;
}

// int |f - g| dmu; exact for two affine densities, grid mean otherwise.
inline double l1_distance(const CircleDensity& f, const CircleDensity& g) {
    if (f.is_affine() && g.is_affine()) {
        const auto b = detail::merged_breaks(f, g);
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            const double c = b[i], d = b[i + 1], mid = 0.5 * (c + d);
            const auto& pf = f.piece_at(mid);
            const auto& pg = g.piece_at(mid);
            const double hc = pf.at(c) - pg.at(c), hd = pf.at(d) - pg.at(d);
            if (hc * hd >= 0.0) {
                total += 0.5 * std::abs(hc + hd) * (d - c);
            } else {
                const double root = c + (d - c) * hc / (hc - hd);
                total += 0.5 * (std::abs(hc) * (root - c) + std::abs(hd) * (d - root));
            }
        }
        return total;
    }
    const std::size_t m = std::max(f.grid_size(), g.grid_size());
    const auto a = f.sample(m), b = g.sample(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(m);
}

// int eta(f) dmu with eta(y) = -y log y.
inline double entropy(const CircleDensity& f) {
    if (!f.is_affine()) {
        double sum = 0.0;
        for (double v : f.values()) sum += detail::eta(v);
        return sum / static_cast<double>(f.values().size());
    }
    // Antiderivative of eta in y: y^2/4 - (y^2/2) log y.
    const auto prim = [](double y) { return y > 0.0 ? 0.25 * y * y - 0.5 * y * y * std::log(y) : 0.0; };
    double total = 0.0;
    for (std::size_t i = 0; i < f.pieces().size(); ++i) {
        const auto& p = f.pieces()[i];
        const double c = p.start, d = f.end_of(i);
        const double y0 = p.at(c), y1 = p.at(d);
        if (std::abs(y1 - y0) <= 1e-6 * std::max(std::abs(y0), std::abs(y1)))
            total += detail::gauss_legendre([&](double u) { return detail::eta(p.at(u)); }, c, d);
        else
            total += (prim(y1) - prim(y0)) / p.s;
    }
    return total;
}

namespace detail {

// int_c^d (A + S u) log(B + T u) du for B + T u >= 0 on [c, d].
inline double affine_log_integral(const AffinePiece& f, const AffinePiece& g, double c, double d) {
    const double y0 = g.at(c), y1 = g.at(d);
    const auto flog = [&](double u) {
        const double y = g.at(u);
        return y > 0.0 ? f.at(u) * std::log(y) : 0.0;
    };
    if (std::abs(y1 - y0) <= 1e-6 * std::max(std::abs(y0), std::abs(y1))) return gauss_legendre(flog, c, d);
    // f = alpha + beta y with y = B + T u.
    const double beta = f.s / g.s, alpha = f.a - g.a * beta;
    const auto p0 = [](double y) { return y > 0.0 ? y * std::log(y) - y : 0.0; };
    const auto p1 = [](double y) { return y > 0.0 ? 0.5 * y * y * std::log(y) - 0.25 * y * y : 0.0; };
    return (alpha * (p0(y1) - p0(y0)) + beta * (p1(y1) - p1(y0))) / g.s;
}

} // namespace detail

// int f log(f / g) dmu, +inf when f > 0 on a set where g vanishes.
inline EntropyValue relative_entropy_classical(const CircleDensity& f, const CircleDensity& g) {
    if (f.is_affine() && g.is_affine()) {
        const auto b = detail::merged_breaks(f, g);
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            const double c = b[i], d = b[i + 1], mid = 0.5 * (c + d);
            const auto& pf = f.piece_at(mid);
            const auto& pg = g.piece_at(mid);
            if (pg.at(c) <= kSupportThreshold && pg.at(d) <= kSupportThreshold) {
                if (pf.at(c) > kSupportThreshold || pf.at(d) > kSupportThreshold) return {0.0, true};
                continue;
            }
            total += detail::affine_log_integral(pf, pf, c, d) - detail::affine_log_integral(pf, pg, c, d);
        }
        return {total, false};
    }
    const std::size_t m = std::max(f.grid_size(), g.grid_size());
    const auto a = f.sample(m), bg = g.sample(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (bg[i] <= kSupportThreshold) {
            if (a[i] > kSupportThreshold) return {0.0, true};
            continue;
        }
        if (a[i] > 0.0) sum += a[i] * std::log(a[i] / bg[i]);
    }
    return {sum / static_cast<double>(m), false};
}

// f_k(u) = 1 + (2u - 1) / k, the affine density 1 + (x - pi) / (k pi).
inline CircleDensity linear_probe(int k) {
    if (k < 1) throw DomainError("linear_probe needs k >= 1");
    return CircleDensity::affine({{0.0, 1.0 - 1.0 / k, 2.0 / k}});
}

struct ClassicalSlope {
    double slope = 0.0;
    double residual = 0.0;
    bool excluded = false;
};

struct ClassicalExponentEstimate {
    double lambda = 0.0;
    int n_lo = 0;
    int n_hi = 0;
    std::size_t argmin = 0;
    std::vector<ClassicalSlope> probes;
    std::string diagnostic;
};

// Distances below this are dominated by rounding of densities near 1.
inline constexpr double kClassicalDistanceFloor = 1e-13;

// Slope of -log ||P^n f - P^n f0||_1 against n over [n_max/2, n_max],
// minimized over probes. Probes that reach P^n f0 exactly are excluded.
inline ClassicalExponentEstimate lambda_classical(const CircleDensity& f0, const std::vector<CircleDensity>& probes,
                                                  const RadicMap& map, int n_max) {
    if (n_max < 4) throw DomainError("lambda_classical: n_max must be >= 4");
    if (probes.empty()) throw DomainError("lambda_classical: no probes");
    for (std::size_t i = 0; i < probes.size(); ++i)
        if (l1_distance(probes[i], f0) == 0.0)
            throw DomainError("lambda_classical: probe " + std::to_string(i) + " equals the reference density");

    ClassicalExponentEstimate est;
    est.n_lo = n_max / 2;
    est.n_hi = n_max;
    est.lambda = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        CircleDensity f = probes[i], g = f0;
        std::vector<double> n, y;
        ClassicalSlope s;
        for (int k = 1; k <= n_max; ++k) {
            f = pf_apply(f, map);
            g = pf_apply(g, map);
            if (k < est.n_lo) continue;
            const double d = l1_distance(f, g);
            if (d == 0.0) {
                s.excluded = true;
                est.diagnostic += "probe " + std::to_string(i) + " reaches the reference exactly at n = " +
                                  std::to_string(k) + " and is excluded; ";
                break;
            }
            if (d < kClassicalDistanceFloor)
                throw NumericalError("lambda_classical: distance for probe " + std::to_string(i) + " is " +
                                     std::to_string(d) + " at n = " + std::to_string(k) +
                                     ", below the resolvable floor; use a smaller n_max");
            n.push_back(k);
            y.push_back(-std::log(d));
        }
        if (!s.excluded) {
            const auto fit = least_squares(n, y);
            s.slope = fit.slope;
            s.residual = fit.rms_residual;
            if (s.slope < est.lambda) {
                est.lambda = s.slope;
                est.argmin = i;
            }
        }
        est.probes.push_back(s);
    }
    if (!std::isfinite(est.lambda)) throw NumericalError("lambda_classical: every probe was excluded; " + est.diagnostic);
    return est;
}

// Discrete coefficient (1/M) sum_i f_i exp(-2 pi i k i / M).
inline std::complex<double> fourier_coefficient(const std::vector<double>& v, long long k) {
    const auto m = static_cast<long long>(v.size());
    std::complex<double> s = 0.0;
    for (long long i = 0; i < m; ++i) {
        const long long phase = ((k % m) * i) % m;  // exact reduction before the trig call
        const double ang = -2.0 * M_PI * static_cast<double>(phase) / static_cast<double>(m);
        s += v[static_cast<std::size_t>(i)] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return s / static_cast<double>(m);
}

// (coefficient k of P^n f, coefficient k r^n of f). Grid densities only.
inline std::pair<std::complex<double>, std::complex<double>> fourier_check(const CircleDensity& f, const RadicMap& map,
                                                                          long long k, int n) {
    if (f.is_affine()) throw DomainError("fourier_check needs a grid density; sample it first");
    if (n < 0) throw DomainError("fourier_check: n must be >= 0");
    long long rn = 1;
    for (int i = 0; i < n; ++i) rn *= map.r;
    const auto m = static_cast<long long>(f.grid_size());
    if (2 * std::abs(k) * rn >= m)
        throw DomainError("fourier_check: index k r^n = " + std::to_string(k * rn) + " reaches the alias limit M/2 = " +
                          std::to_string(m / 2));
    const auto pn = pf_apply(f, map, n);
    return {fourier_coefficient(pn.values(), k), fourier_coefficient(f.values(), k * rn)};
}

} // namespace qmix

#pragma once

// Box-counting dimension of point clouds on the unit sphere, on the grid
// obtained by central projection onto the six faces of the circumscribed
// cube with each face cut into 2^k x 2^k cells at level k.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmix/fit.hpp"
#include "qmix/parallel.hpp"
#include "qmix/point_cloud.hpp"

namespace qmix {

inline constexpr int kMaxBoxLevel = 26;

struct CubeCell {
    int face = 0;  // 0..5: +x, -x, +y, -y, +z, -z
    std::uint32_t i = 0;
    std::uint32_t j = 0;
};

// Cell containing p at level k. Points on a face boundary go to the face of
// the largest |component|, ties to the lower face index.
inline CubeCell cube_cell(const BlochVector& p, int level) {
    const double ax = std::abs(p.x1), ay = std::abs(p.x2), az = std::abs(p.x3);
    int axis = 0;
    if (ay > ax) axis = 1;
    if (az > std::max(ax, ay)) axis = 2;
    const double m = p[axis];
    if (m == 0.0) throw DomainError("cube_cell: zero vector");
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    const double u = p[a] / std::abs(m), v = p[b] / std::abs(m);
    const double side = std::ldexp(1.0, level);
    const auto index = [&](double w) {
        const double c = std::floor((w + 1.0) * 0.5 * side);
        return static_cast<std::uint32_t>(std::clamp(c, 0.0, side - 1.0));
    };
    return {2 * axis + (m < 0.0 ? 1 : 0), index(u), index(v)};
}

inline std::uint64_t interleave_bits(std::uint32_t x, std::uint32_t y) {
    std::uint64_t out = 0;
    for (int b = 0; b < 32; ++b) {
        out |= static_cast<std::uint64_t>((x >> b) & 1u) << (2 * b + 1);
        out |= static_cast<std::uint64_t>((y >> b) & 1u) << (2 * b);
    }
    return out;
}

// Morton key at level K; the key of the parent at level k < K is key >> 2(K - k).
inline std::uint64_t cell_key(const CubeCell& c, int level) {
    return (static_cast<std::uint64_t>(c.face) << (2 * level)) | interleave_bits(c.i, c.j);
}

namespace detail {

inline BlochVector face_point(double u, double v) {
    const double n = std::sqrt(1.0 + u * u + v * v);
    return {u / n, v / n, 1.0 / n};
}

inline double geodesic(const BlochVector& a, const BlochVector& b) {
    // atan2 form stays accurate for tiny angles.
    const BlochVector c{a.x2 * b.x3 - a.x3 * b.x2, a.x3 * b.x1 - a.x1 * b.x3, a.x1 * b.x2 - a.x2 * b.x1};
    return std::atan2(c.norm(), a.dot(b));
}

} // namespace detail

// Larger corner-to-corner geodesic distance of cell (i, j) at level k.
inline double cell_diameter(int level, std::uint32_t i, std::uint32_t j) {
    const double h = 2.0 / std::ldexp(1.0, level);
    const double u0 = -1.0 + h * i, v0 = -1.0 + h * j;
    const double d1 = detail::geodesic(detail::face_point(u0, v0), detail::face_point(u0 + h, v0 + h));
    const double d2 = detail::geodesic(detail::face_point(u0 + h, v0), detail::face_point(u0, v0 + h));
    return std::max(d1, d2);
}

// Maximal cell diameter at level k. Gnomonic cells shrink away from the face
// centre, so the maximum sits on a cell touching the centre.
inline double max_cell_diameter(int level) {
    if (level == 0) return cell_diameter(0, 0, 0);
    const std::uint32_t c = 1u << (level - 1);
    double best = 0.0;
    for (std::uint32_t i = c - 1; i <= c; ++i)
        for (std::uint32_t j = c - 1; j <= c; ++j) best = std::max(best, cell_diameter(level, i, j));
    return best;
}

struct DimensionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double rms_residual = 0.0;
    int first_level = 0;  // inclusive fit range
    int last_level = 0;
};

struct BoxCountResult {
    std::vector<int> levels;
    std::vector<double> epsilons;  // radians
    std::vector<std::size_t> counts;
    std::size_t points = 0;
    std::optional<DimensionFit> fit;
};

inline constexpr std::size_t kMinFitCount = 10;

// Slope of log N against log(1/eps) over levels with 10 <= N <= points / 10.
inline DimensionFit estimate_dimension(const BoxCountResult& r) {
    std::vector<double> x, y;
    int first = -1, last = -1;
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        const std::size_t n = r.counts[k];
        if (n < kMinFitCount || n * 10 > r.points) continue;
        x.push_back(-std::log(r.epsilons[k]));
        y.push_back(std::log(static_cast<double>(n)));
        if (first < 0) first = r.levels[k];
        last = r.levels[k];
    }
    if (x.size() < 3)
        throw NumericalError("estimate_dimension: only " + std::to_string(x.size()) +
                             " levels have 10 <= N <= size/10; use more points or more levels");
    const auto f = least_squares(x, y);
    return {f.slope, f.intercept, f.r_squared, f.rms_residual, first, last};
}

// Occupied-cell counts at levels 1..levels.
inline BoxCountResult box_count(const PointCloud& cloud, int levels) {
    if (cloud.empty()) throw DomainError("box_count: empty cloud");
    if (levels < 4 || levels > kMaxBoxLevel)
        throw DomainError("box_count: levels must lie in [4, " + std::to_string(kMaxBoxLevel) + "]");
    validate_cloud(cloud);

    std::vector<std::uint64_t> keys(cloud.size());
    constexpr std::size_t kBlock = 1 << 14;
    const std::size_t blocks = (cloud.size() + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t end = std::min(cloud.size(), (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) keys[i] = cell_key(cube_cell(cloud.points[i], levels), levels);
    });
    std::sort(keys.begin(), keys.end());

    BoxCountResult r;
    r.points = cloud.size();
    for (int k = 1; k <= levels; ++k) {
        const int shift = 2 * (levels - k);
        std::size_t n = 1;
        for (std::size_t i = 1; i < keys.size(); ++i)
            if ((keys[i] >> shift) != (keys[i - 1] >> shift)) ++n;
        r.levels.push_back(k);
        r.epsilons.push_back(max_cell_diameter(k));
        r.counts.push_back(n);
    }
    try {
        r.fit = estimate_dimension(r);
    } catch (const NumericalError&) {
    }
    return r;
}

// Rotation matrix rows applied to every point.
inline PointCloud rotate_cloud(const PointCloud& cloud, const std::array<BlochVector, 3>& rows) {
    PointCloud out = cloud;
    for (auto& p : out.points) p = BlochVector{rows[0].dot(p), rows[1].dot(p), rows[2].dot(p)};
    return out;
}

// Uniform random rotation from a unit quaternion.
inline std::array<BlochVector, 3> random_rotation(Xoshiro256& rng) {
    double q[4];
    double n = 0.0;
    do {
        n = 0.0;
        for (double& c : q) {
            c = rng.normal();
            n += c * c;
        }
    } while (n < 1e-12);
    n = std::sqrt(n);
    const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    return {BlochVector{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
            BlochVector{2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
            BlochVector{2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
}

} // namespace qmix

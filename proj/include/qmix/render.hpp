#pragma once

// PGM / PPM images of point clouds on the sphere.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmix/fractal.hpp"
#include "qmix/io.hpp"
#include "qmix/point_cloud.hpp"

namespace qmix {

enum class Projection { plus_x, minus_x, plus_y, minus_y, plus_z, minus_z, cube_net };

inline Projection parse_projection(const std::string& s) {
    static const std::array<std::pair<const char*, Projection>, 7> names{{{"+x", Projection::plus_x},
                                                                          {"-x", Projection::minus_x},
                                                                          {"+y", Projection::plus_y},
                                                                          {"-y", Projection::minus_y},
                                                                          {"+z", Projection::plus_z},
                                                                          {"-z", Projection::minus_z},
                                                                          {"cube_net", Projection::cube_net}}};
    for (const auto& [name, p] : names)
        if (s == name) return p;
    throw DomainError("unknown projection '" + s + "' (use +x, -x, +y, -y, +z, -z or cube_net)");
}

struct Zoom {
    BlochVector center;
    double radius = 0.0;  // angular radius, radians, in (0, pi/2]
};

enum class PixelMode { log_hits, detector_color };

struct RenderSpec {
    Projection projection = Projection::plus_z;
    int width = 1024;
    int height = 1024;
    PixelMode mode = PixelMode::log_hits;
    std::optional<Zoom> zoom;

    void validate() const {
        if (width < 64 || width > 8192 || height < 64 || height > 8192)
            throw DomainError("image size must lie in [64, 8192] x [64, 8192]");
        if (zoom) {
            if (!(zoom->radius > 0.0 && zoom->radius <= M_PI / 2)) throw DomainError("zoom radius must lie in (0, 90] degrees");
            if (std::abs(zoom->center.norm() - 1.0) > 1e-9) throw DomainError("zoom center must be a unit vector");
            if (projection == Projection::cube_net) throw DomainError("zoom is not available for the cube net");
        }
    }
};

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> hits;
    std::vector<std::uint8_t> last_detector;  // 0 = none

    std::size_t lit_pixels() const {
        return static_cast<std::size_t>(std::count_if(hits.begin(), hits.end(), [](auto h) { return h > 0; }));
    }
};

namespace detail {

struct ViewFrame {
    BlochVector c, e1, e2;  // view direction and screen axes (right, up)
};

inline ViewFrame axis_frame(Projection p) {
    switch (p) {
    case Projection::plus_x: return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    case Projection::minus_x: return {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
    case Projection::plus_y: return {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}};
    case Projection::minus_y: return {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}};
    case Projection::plus_z: return {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
    case Projection::minus_z: return {{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}};
    default: throw DomainError("cube net has no single view frame");
    }
}

inline BlochVector cross(const BlochVector& a, const BlochVector& b) {
    return {a.x2 * b.x3 - a.x3 * b.x2, a.x3 * b.x1 - a.x1 * b.x3, a.x1 * b.x2 - a.x2 * b.x1};
}

inline ViewFrame zoom_frame(const BlochVector& c) {
    BlochVector e1 = cross({0, 0, 1}, c);
    if (e1.norm() < 1e-9) e1 = c.x3 > 0 ? BlochVector{1, 0, 0} : BlochVector{-1, 0, 0};
    e1 = (1.0 / e1.norm()) * e1;
    return {c, e1, cross(c, e1)};
}

} // namespace detail

// Orthographic view of the cap within the angular radius of the view
// direction, or the unfolded cube (cross layout, gnomonic faces).
inline Raster rasterize(const PointCloud& cloud, const RenderSpec& spec) {
    spec.validate();
    if (cloud.empty()) throw DomainError("cannot render an empty cloud");
    Raster r{spec.width, spec.height, std::vector<std::uint32_t>(static_cast<std::size_t>(spec.width) * spec.height, 0),
             std::vector<std::uint8_t>(static_cast<std::size_t>(spec.width) * spec.height, 0)};
    const auto plot = [&](double px, double py, std::size_t idx) {
        if (!(px >= 0.0 && py >= 0.0)) return;
        const auto ix = static_cast<long>(px), iy = static_cast<long>(py);
        if (ix >= spec.width || iy >= spec.height) return;
        const std::size_t at = static_cast<std::size_t>(iy) * spec.width + static_cast<std::size_t>(ix);
        ++r.hits[at];
        if (cloud.has_detectors()) r.last_detector[at] = cloud.detectors[idx];
    };

    if (spec.projection == Projection::cube_net) {
        // Face slots (column, row) in a 4 x 3 cross: +z on top of +x, -z below.
        static constexpr std::array<std::array<int, 2>, 6> slot{{{1, 1}, {3, 1}, {2, 1}, {0, 1}, {1, 0}, {1, 2}}};
        const double face = std::min(spec.width / 4.0, spec.height / 3.0);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto cell = cube_cell(cloud.points[i], 0);
            const auto& p = cloud.points[i];
            const int axis = cell.face / 2;
            const double m = std::abs(p[axis]);
            const double u = p[(axis + 1) % 3] / m, v = p[(axis + 2) % 3] / m;
            const auto& s = slot[static_cast<std::size_t>(cell.face)];
            plot(face * (s[0] + 0.5 * (u + 1.0)), face * (s[1] + 0.5 * (1.0 - v)), i);
        }
        return r;
    }

    const auto frame = spec.zoom ? detail::zoom_frame(spec.zoom->center) : detail::axis_frame(spec.projection);
    const double radius = spec.zoom ? spec.zoom->radius : M_PI / 2;
    const double cos_r = std::cos(radius), scale = std::sin(radius);
    const double half = 0.5 * std::min(spec.width, spec.height);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        if (p.dot(frame.c) < cos_r) continue;
        plot(0.5 * spec.width + half * p.dot(frame.e1) / scale, 0.5 * spec.height - half * p.dot(frame.e2) / scale, i);
    }
    return r;
}

namespace detail {

inline std::uint8_t log_level(std::uint32_t h, double log_max) {
    if (h == 0 || log_max <= 0.0) return 0;
    return static_cast<std::uint8_t>(std::lround(255.0 * std::log1p(static_cast<double>(h)) / log_max));
}

inline std::string netpbm_header(const char* magic, const Raster& r, const Provenance& p) {
    return std::string(magic) + "\n# qmix " + p.command + "\n# config_hash " + p.hash() + "\n# seed " +
           std::to_string(p.seed) + "\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
}

} // namespace detail

// Binary PGM, intensity log(1 + hits) scaled to the brightest pixel.
inline std::string to_pgm(const Raster& r, const Provenance& p) {
    double log_max = 0.0;
    for (auto h : r.hits) log_max = std::max(log_max, std::log1p(static_cast<double>(h)));
    std::string out = detail::netpbm_header("P5", r, p);
    for (auto h : r.hits) out += static_cast<char>(detail::log_level(h, log_max));
    return out;
}

// Binary PPM colouring each pixel by the detector of the last point drawn there.
inline std::string to_ppm(const Raster& r, const Provenance& p) {
    static constexpr std::array<std::array<double, 3>, 5> palette{
        {{1.0, 1.0, 1.0}, {0.90, 0.20, 0.20}, {0.20, 0.75, 0.25}, {0.25, 0.40, 0.95}, {0.95, 0.80, 0.15}}};
    double log_max = 0.0;
    for (auto h : r.hits) log_max = std::max(log_max, std::log1p(static_cast<double>(h)));
    std::string out = detail::netpbm_header("P6", r, p);
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
        const double level = detail::log_level(r.hits[i], log_max);
        for (double c : palette[r.last_detector[i]]) out += static_cast<char>(std::lround(level * c));
    }
    return out;
}

} // namespace qmix

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qmix/error.hpp"
#include "qmix/quantum_core.hpp"

namespace qmix {

// Points on the unit sphere. `detectors` is either empty or parallel to
// `points` and holds the detector (1-4) of the jump that produced each point.
struct PointCloud {
    std::vector<BlochVector> points;
    std::vector<std::uint8_t> detectors;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_detectors() const { return !detectors.empty() && detectors.size() == points.size(); }
};

inline void validate_cloud(const PointCloud& cloud, double tol = 1e-9) {
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (std::abs(cloud.points[i].norm() - 1.0) > tol)
            throw DomainError("point " + std::to_string(i) + " is not on the unit sphere");
    if (!cloud.detectors.empty() && cloud.detectors.size() != cloud.points.size())
        throw DomainError("detector labels do not match the point count");
}

} // namespace qmix

#include <cmath>

#include <gtest/gtest.h>

#include "qmix/fractal.hpp"
#include "qmix/pdp.hpp"

using namespace qmix;

namespace {

PointCloud uniform_sphere(std::size_t n, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back(random_unit_vector(rng));
    return c;
}

// Tilted great circle so it crosses several cube faces obliquely.
PointCloud great_circle(std::size_t n, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    const BlochVector a{0.6, 0.0, 0.8}, b{0.0, 1.0, 0.0};
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2.0 * M_PI * rng.uniform();
        c.points.push_back(std::cos(t) * a + std::sin(t) * b);
    }
    return c;
}

} // namespace

TEST(CubeCell, FacesAndIndices) {
    EXPECT_EQ(cube_cell({1, 0, 0}, 3).face, 0);
    EXPECT_EQ(cube_cell({-1, 0, 0}, 3).face, 1);
    EXPECT_EQ(cube_cell({0, 1, 0}, 3).face, 2);
    EXPECT_EQ(cube_cell({0, 0, -1}, 3).face, 5);
    const auto c = cube_cell({0, 0, 1}, 3);
    EXPECT_EQ(c.i, 4u);
    EXPECT_EQ(c.j, 4u);
    const double s = 1.0 / std::sqrt(3.0);
    const auto corner = cube_cell({s, s, s}, 5);
    EXPECT_EQ(corner.i, 31u);
    EXPECT_EQ(corner.j, 31u);
}

TEST(CubeCell, KeyPrefixIsParentCell) {
    Xoshiro256 rng(1);
    for (int n = 0; n < 1000; ++n) {
        const auto p = random_unit_vector(rng);
        const auto fine = cell_key(cube_cell(p, 12), 12);
        for (int k = 1; k < 12; ++k) EXPECT_EQ(fine >> (2 * (12 - k)), cell_key(cube_cell(p, k), k));
    }
}

TEST(CellDiameter, MaximumMatchesExhaustiveSearch) {
    for (int k = 0; k <= 6; ++k) {
        double brute = 0.0;
        const std::uint32_t side = 1u << k;
        for (std::uint32_t i = 0; i < side; ++i)
            for (std::uint32_t j = 0; j < side; ++j) brute = std::max(brute, cell_diameter(k, i, j));
        EXPECT_DOUBLE_EQ(max_cell_diameter(k), brute) << "level " << k;
    }
    // Whole face: angle between opposite cube corners through the face.
    EXPECT_NEAR(max_cell_diameter(0), std::acos(-1.0 / 3.0), 1e-12);
}

TEST(BoxCount, SinglePoint) {
    PointCloud c{{{0.0, 0.6, 0.8}}, {}};
    const auto r = box_count(c, 10);
    for (auto n : r.counts) EXPECT_EQ(n, 1u);
    EXPECT_FALSE(r.fit.has_value());
    EXPECT_THROW(estimate_dimension(r), NumericalError);
}

TEST(BoxCount, TetrahedronVertices) {
    PointCloud c;
    for (const auto& n : tetrahedron_directions()) c.points.push_back(n);
    const auto r = box_count(c, 8);
    for (auto n : r.counts) EXPECT_EQ(n, 4u);
}

TEST(BoxCount, RejectsBadInput) {
    EXPECT_THROW(box_count(PointCloud{}, 8), DomainError);
    PointCloud c{{{0.0, 0.0, 1.0}}, {}};
    EXPECT_THROW(box_count(c, 3), DomainError);
    PointCloud off{{{0.0, 0.0, 1.1}}, {}};
    EXPECT_THROW(box_count(off, 8), DomainError);
}

TEST(BoxCount, CountsObeySubdivisionLaw) {
    const auto r = box_count(chaos_game(0.8, 200000, 2), 14);
    for (std::size_t k = 1; k < r.counts.size(); ++k) {
        EXPECT_GE(r.counts[k], r.counts[k - 1]);
        EXPECT_LE(r.counts[k], 4 * r.counts[k - 1]);
        EXPECT_LT(r.epsilons[k], r.epsilons[k - 1]);
    }
}

TEST(BoxCount, UniformSphereHasSlopeTwo) {
    const auto r = box_count(uniform_sphere(1000000, 3), 14);
    ASSERT_TRUE(r.fit.has_value());
    EXPECT_NEAR(r.fit->slope, 2.0, 0.15);
    // Unsaturated middle levels fill all 6 * 4^k cells.
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(r.counts[k], 6u << (2 * r.levels[k]));
    EXPECT_LE(r.counts[6], 100000u + 6u * (1u << 14));
}

TEST(BoxCount, GreatCircleHasSlopeOne) {
    const auto r = box_count(great_circle(100000, 4), 14);
    ASSERT_TRUE(r.fit.has_value());
    EXPECT_NEAR(r.fit->slope, 1.0, 0.1);
}

TEST(BoxCount, FitRangeRule) {
    const auto r = box_count(great_circle(100000, 5), 14);
    const auto f = estimate_dimension(r);
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        const bool inside = r.levels[k] >= f.first_level && r.levels[k] <= f.last_level;
        const bool usable = r.counts[k] >= 10 && r.counts[k] * 10 <= r.points;
        EXPECT_EQ(inside, usable) << "level " << r.levels[k];
    }
}

TEST(BoxCount, RotationRobustness) {
    const auto cloud = chaos_game(0.8, 1000000, 6);
    Xoshiro256 rng(7);
    const auto rot = random_rotation(rng);
    for (const auto& row : rot) EXPECT_NEAR(row.norm(), 1.0, 1e-12);
    EXPECT_NEAR(rot[0].dot(rot[1]), 0.0, 1e-12);
    const auto a = box_count(cloud, 16);
    const auto b = box_count(rotate_cloud(cloud, rot), 16);
    EXPECT_NEAR(a.fit->slope, b.fit->slope, 0.05);
}

TEST(BoxCount, DeterministicAcrossThreadCounts) {
    const auto cloud = chaos_game(0.85, 100000, 8);
    const auto a = box_count(cloud, 12);
    setenv("QMIX_THREADS", "4", 1);
    const auto b = box_count(cloud, 12);
    unsetenv("QMIX_THREADS");
    EXPECT_EQ(a.counts, b.counts);
}

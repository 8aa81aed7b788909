#include <doctest.h>

#include <random>
#include <vector>

#include "depthscope/geometry.hpp"
#include "oracle.hpp"

using namespace depthscope;

namespace {

std::vector<const double*> ptrs(const std::vector<std::vector<double>>& v)
{
    std::vector<const double*> out;
    for (const auto& x : v) out.push_back(x.data());
    return out;
}

} // namespace

TEST_CASE("triangle membership with closed boundary")
{
    const std::vector<std::vector<double>> tri{{0, 0}, {1, 0}, {0, 1}};
    const auto v = ptrs(tri);
    const double inside[2]{0.1, 0.1}, outside[2]{1, 1}, edge[2]{0.5, 0}, vertex[2]{0, 1};
    CHECK(geometry::in_convex_hull(inside, v, 2));
    CHECK_FALSE(geometry::in_convex_hull(outside, v, 2));
    CHECK(geometry::in_convex_hull(edge, v, 2));
    CHECK(geometry::in_convex_hull(vertex, v, 2));
    CHECK(geometry::hull_volume(v, 2) == doctest::Approx(0.5));
}

TEST_CASE("degenerate simplices have zero volume and segment membership")
{
    const std::vector<std::vector<double>> line{{0, 0}, {1, 1}, {2, 2}};
    const auto v = ptrs(line);
    const double on[2]{1.5, 1.5}, beyond[2]{3, 3}, off[2]{1, 0};
    CHECK(geometry::hull_volume(v, 2) == 0.0);
    CHECK(geometry::in_convex_hull(on, v, 2));
    CHECK_FALSE(geometry::in_convex_hull(beyond, v, 2));
    CHECK_FALSE(geometry::in_convex_hull(off, v, 2));
}

TEST_CASE("tetrahedron volume and membership")
{
    const std::vector<std::vector<double>> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const auto v = ptrs(tet);
    const double in[3]{0.1, 0.1, 0.1}, face[3]{0.3, 0.3, 0}, out[3]{0.5, 0.5, 0.5};
    CHECK(geometry::hull_volume(v, 3) == doctest::Approx(1.0 / 6.0));
    CHECK(geometry::in_convex_hull(in, v, 3));
    CHECK(geometry::in_convex_hull(face, v, 3));
    CHECK_FALSE(geometry::in_convex_hull(out, v, 3));
}

TEST_CASE("hulls agree with the decomposition oracle on random inputs")
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> cell(0, 3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 3000; ++trial) {
        const int dim = 1 + trial % 3;
        const std::size_t k = static_cast<std::size_t>(dim) + 1 + (dim < 3 ? static_cast<std::size_t>(trial % 2) : 0);
        const bool grid = dim < 3 && trial % 4 < 2;
        auto real = [&] { return grid ? static_cast<double>(cell(rng)) : normal(rng); };
        std::vector<std::vector<double>> pts(k, std::vector<double>(static_cast<std::size_t>(dim)));
        for (auto& p : pts)
            for (auto& c : p) c = real();
        std::vector<double> q(static_cast<std::size_t>(dim));
        for (auto& c : q) c = real();
        const auto v = ptrs(pts);
        INFO("trial " << trial << " dim " << dim);
        CHECK(geometry::in_convex_hull(q.data(), v, dim) == oracle::in_hull(q, pts, dim));
        CHECK(geometry::hull_volume(v, dim) == doctest::Approx(oracle::hull_volume(pts, dim)).epsilon(1e-9));
    }
}

TEST_CASE("prepared hull matches the one-shot helpers")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> pts(3, std::vector<double>(2));
    for (auto& p : pts)
        for (auto& c : p) c = normal(rng);
    const auto v = ptrs(pts);
    geometry::PreparedHull h;
    h.prepare(v, 2);
    for (int i = 0; i < 200; ++i) {
        const double q[2]{normal(rng), normal(rng)};
        CHECK(h.contains(q) == geometry::in_convex_hull(q, v, 2));
    }
    CHECK(h.volume() == geometry::hull_volume(v, 2));
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "depthscope/error.hpp"
#include "depthscope/layout.hpp"
#include "depthscope/synthetic.hpp"
#include "oracle.hpp"

using namespace depthscope;

namespace {

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool in_unit_square(const std::vector<Vec2>& p)
{
    return std::all_of(p.begin(), p.end(), [](Vec2 q) { return q.x >= 0 && q.x <= 1 && q.y >= 0 && q.y <= 1; });
}

DenseMatrix blocks(const std::vector<std::size_t>& sizes, std::uint64_t seed)
{
    const auto n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    return DenseMatrix(n, oracle::block_matrix(sizes, seed, 0.5));
}

} // namespace

TEST_CASE("quadtree repulsion matches the exact sum at theta 0 and approximates it at 0.7")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    std::vector<Vec2> pts(300);
    for (auto& p : pts) p = {u(rng), u(rng)};
    QuadTree tree(pts);
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); i += 7) {
        Vec2 exact{};
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j == i) continue;
            const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, d2 = dx * dx + dy * dy;
            exact.x += dx / d2;
            exact.y += dy / d2;
        }
        const auto f0 = tree.repulsion(pts[i], i, 1.0, 0.0);
        CHECK(f0.x == doctest::Approx(exact.x).epsilon(1e-9));
        CHECK(f0.y == doctest::Approx(exact.y).epsilon(1e-9));
        const auto f7 = tree.repulsion(pts[i], i, 1.0, 0.7);
        worst = std::max(worst, std::hypot(f7.x - exact.x, f7.y - exact.y) / std::hypot(exact.x, exact.y));
    }
    CHECK(worst < 0.5);
}

TEST_CASE("quadtree radius query is a closed ball")
{
    std::vector<Vec2> pts{{0, 0}, {0.5, 0}, {0.5, 0.5}, {1, 1}, {0.25, 0}};
    QuadTree tree(pts);
    std::vector<std::size_t> out;
    tree.query_radius({0, 0}, 0.5, out);
    std::sort(out.begin(), out.end());
    CHECK(out == std::vector<std::size_t>{0, 1, 4});
}

TEST_CASE("force layout basics")
{
    SUBCASE("single point sits in the centre")
    {
        const DenseMatrix S(1, {1.0});
        const auto r = force_layout(S);
        CHECK(r.positions[0] == Vec2{0.5, 0.5});
    }
    SUBCASE("deterministic and bounded")
    {
        const DenseMatrix S(12, std::vector<double>(144, 0.6));
        const auto a = force_layout(S, {.seed = 3});
        const auto b = force_layout(S, {.seed = 3});
        CHECK(a.positions == b.positions);
        CHECK(in_unit_square(a.positions));
        CHECK_FALSE(a.positions == force_layout(S, {.seed = 4}).positions);
    }
    SUBCASE("two disjoint blocks separate")
    {
        const auto S = blocks({10, 10}, 2);
        const auto r = force_layout(S, {.seed = 1});
        Vec2 c[2]{};
        for (std::size_t i = 0; i < 20; ++i) {
            c[i / 10].x += r.positions[i].x / 10;
            c[i / 10].y += r.positions[i].y / 10;
        }
        double intra = 0.0;
        for (std::size_t i = 0; i < 20; ++i)
            for (std::size_t j = 0; j < 20; ++j)
                if (i / 10 == j / 10) intra = std::max(intra, dist(r.positions[i], r.positions[j]));
        CHECK(dist(c[0], c[1]) > intra);
    }
    SUBCASE("energy settles over the final tenth")
    {
        const auto S = blocks({8, 12, 6}, 5);
        const auto r = force_layout(S, {.seed = 9});
        CHECK(r.energy_trace.size() == 50);
        MESSAGE("energy increases in final 10%: " << r.energy_increases);
        CHECK(r.energy_increases <= r.energy_trace.size() / 2);
    }
    SUBCASE("zero-similarity points go to the border")
    {
        auto S = blocks({5, 1, 4}, 7);
        const auto r = force_layout(S, {.seed = 2});
        CHECK(r.outliers == std::vector<std::size_t>{5});
        const auto p = r.positions[5];
        CHECK(std::min({p.x, 1 - p.x, p.y, 1 - p.y}) <= kOutlierMargin);
        for (std::size_t i = 0; i < 10; ++i) {
            if (i == 5) continue;
            const auto q = r.positions[i];
            CHECK(std::min({q.x, 1 - q.x, q.y, 1 - q.y}) >= 0.1 - 1e-12);
        }
    }
}

TEST_CASE("collision resolution")
{
    SUBCASE("coincident pair separates")
    {
        std::vector<Vec2> p{{0.5, 0.5}, {0.5, 0.5}};
        const auto rep = resolve_collisions(p, 0.01, 1);
        CHECK(dist(p[0], p[1]) >= 0.02);
        CHECK(rep.remaining_overlaps == 0);
    }
    SUBCASE("no overlaps means no movement")
    {
        std::vector<Vec2> p{{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}};
        const auto before = p;
        const auto rep = resolve_collisions(p, 0.05, 1);
        CHECK(p == before);
        CHECK(rep.passes <= 1);
    }
    SUBCASE("points without overlapping neighbours stay put")
    {
        std::vector<Vec2> p{{0.5, 0.5}, {0.505, 0.5}, {0.1, 0.1}};
        resolve_collisions(p, 0.01, 4, 1);
        CHECK(p[2] == Vec2{0.1, 0.1});
    }
    SUBCASE("a crowded cluster spreads out or reports what is left")
    {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> jitter(0.0, 0.005);
        std::vector<Vec2> p(100);
        for (auto& q : p) q = {0.5 + jitter(rng), 0.5 + jitter(rng)};
        const double r = default_node_radius(100);
        const auto rep = resolve_collisions(p, r, 6);
        std::size_t overlaps = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j) overlaps += dist(p[i], p[j]) < 2 * r ? 1 : 0;
        CHECK(overlaps == rep.remaining_overlaps);
        CHECK((overlaps == 0 || rep.passes == 50));
        CHECK(in_unit_square(p));
    }
}

TEST_CASE("outlier placement")
{
    CHECK(place_outliers(0, 1).empty());
    const auto one = place_outliers(1, 1);
    CHECK(std::min({one[0].x, 1 - one[0].x, one[0].y, 1 - one[0].y}) <= 0.05);
    CHECK(place_outliers(5, 8) == place_outliers(5, 8));
    for (auto p : place_outliers(200, 2)) {
        CHECK(std::min({p.x, 1 - p.x, p.y, 1 - p.y}) <= kOutlierMargin);
        CHECK(std::min({p.x, 1 - p.x, p.y, 1 - p.y}) >= 0.0);
    }
}

TEST_CASE("geospatial positions")
{
    SUBCASE("curve tracks keep polylines under one bounding box")
    {
        const auto ds = generate_synthetic(CurveEnsemble{6, 10, 2}, 1);
        const auto r = geospatial_positions(ds, "track");
        CHECK(r.mode == LayoutMode::Geospatial);
        REQUIRE(r.polylines.size() == 6);
        double lo_x = 1, hi_x = 0, lo_y = 1, hi_y = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(r.polylines[i].size() == 10);
            CHECK(r.positions[i] == r.polylines[i][0]);
            for (auto p : r.polylines[i]) {
                lo_x = std::min(lo_x, p.x), hi_x = std::max(hi_x, p.x);
                lo_y = std::min(lo_y, p.y), hi_y = std::max(hi_y, p.y);
            }
        }
        CHECK(std::max(hi_x - lo_x, hi_y - lo_y) == doctest::Approx(1.0));
        CHECK(lo_x >= 0.0);
        CHECK(lo_y >= 0.0);
    }
    SUBCASE("unit-square points stay put up to normalization")
    {
        Dataset ds;
        ds.schema = {AttributeSchema::point("pos", 2)};
        ds.rows = {{PointValue{{0, 0}}}, {PointValue{{1, 1}}}, {PointValue{{0.25, 0.5}}}};
        const auto r = geospatial_positions(ds, "pos");
        CHECK(r.positions[2].x == doctest::Approx(0.25));
        CHECK(r.positions[2].y == doctest::Approx(0.5));
    }
    SUBCASE("scalar attributes are not positions")
    {
        Dataset ds;
        ds.schema = {AttributeSchema::scalar("x")};
        ds.rows = {{1.0}, {2.0}, {3.0}};
        CHECK_THROWS_AS(geospatial_positions(ds, "x"), AnalysisError);
    }
}

TEST_CASE("edge lists")
{
    DenseMatrix S(4);
    const double v[4][4]{{1, 0.2, 0.0, 1.0}, {0.2, 1, 0.5, 0.7}, {0.0, 0.5, 1, 0.0}, {1.0, 0.7, 0.0, 1}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) S(i, j) = v[i][j];
    CHECK(edge_list(S, 0.0).size() == 4);
    const auto top = edge_list(S, 1.0);
    REQUIRE(top.size() == 1);
    CHECK(top[0].i == 0);
    CHECK(top[0].j == 3);
    std::size_t prev = SIZE_MAX;
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        const auto n = edge_list(S, t).size();
        CHECK(n <= prev);
        prev = n;
    }
    CHECK_THROWS_AS(edge_list(S, 1.5), std::invalid_argument);
}

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace depthscope {

struct Vec2 {
    double x = 0.0, y = 0.0;
    bool operator==(const Vec2&) const = default;
};

/// Point-region quadtree with per-node mass and centroid, used for
/// Barnes-Hut force approximation and radius queries.
class QuadTree {
public:
    explicit QuadTree(std::span<const Vec2> points, std::size_t leaf_capacity = 1);

    /// Sum over all other points j of c * (p - x_j) / |p - x_j|^2, with
    /// far cells (size / distance < theta) collapsed to their centroid.
    Vec2 repulsion(Vec2 p, std::size_t self, double c, double theta) const;

    /// Indices of points within distance `r` of `p` (closed ball).
    void query_radius(Vec2 p, double r, std::vector<std::size_t>& out) const;

private:
    struct Node {
        double cx = 0.0, cy = 0.0, half = 0.0; // square cell
        double mx = 0.0, my = 0.0;             // centroid
        std::size_t mass = 0;
        std::int32_t child = -1;               // index of first of four children, -1 for leaf
        std::uint32_t begin = 0, end = 0;      // leaf point range in order_
    };

    void build(std::size_t node, std::uint32_t begin, std::uint32_t end, int depth);
    void repulsion_rec(std::size_t node, Vec2 p, std::size_t self, double c, double theta, Vec2& acc) const;

    std::span<const Vec2> pts_;
    std::size_t leaf_capacity_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

} // namespace depthscope

#include "depthscope/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace depthscope {

namespace {
constexpr int kMaxDepth = 48;
}

QuadTree::QuadTree(std::span<const Vec2> points, std::size_t leaf_capacity)
    : pts_(points), leaf_capacity_(std::max<std::size_t>(1, leaf_capacity))
{
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0u);
    Node root;
    if (!points.empty()) {
        double x0 = points[0].x, x1 = x0, y0 = points[0].y, y1 = y0;
        for (const auto& p : points) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        root.cx = 0.5 * (x0 + x1);
        root.cy = 0.5 * (y0 + y1);
        root.half = 0.5 * std::max(x1 - x0, y1 - y0) + 1e-12;
    }
    nodes_.push_back(root);
    nodes_.reserve(4 * points.size() + 1);
    build(0, 0, static_cast<std::uint32_t>(points.size()), 0);
}

void QuadTree::build(std::size_t node, std::uint32_t begin, std::uint32_t end, int depth)
{
    {
        Node& nd = nodes_[node];
        nd.begin = begin;
        nd.end = end;
        nd.mass = end - begin;
        double sx = 0.0, sy = 0.0;
        for (std::uint32_t k = begin; k < end; ++k) {
            sx += pts_[order_[k]].x;
            sy += pts_[order_[k]].y;
        }
        if (nd.mass > 0) {
            nd.mx = sx / static_cast<double>(nd.mass);
            nd.my = sy / static_cast<double>(nd.mass);
        }
        if (nd.mass <= leaf_capacity_ || depth >= kMaxDepth) return;
    }
    const double cx = nodes_[node].cx, cy = nodes_[node].cy, h = nodes_[node].half;
    // Partition into quadrants: 0 = (x<cx, y<cy), 1 = (x>=cx, y<cy), 2 = (x<cx, y>=cy), 3 = (x>=cx, y>=cy).
    auto quadrant = [&](std::uint32_t i) { return (pts_[i].x >= cx ? 1 : 0) + (pts_[i].y >= cy ? 2 : 0); };
    std::array<std::uint32_t, 5> bounds{};
    bounds[0] = begin;
    auto first = order_.begin() + begin, last = order_.begin() + end;
    for (int q = 0; q < 4; ++q) {
        first = std::stable_partition(first, last, [&](std::uint32_t i) { return quadrant(i) == q; });
        bounds[static_cast<std::size_t>(q) + 1] = static_cast<std::uint32_t>(first - order_.begin());
    }
    const auto child = static_cast<std::int32_t>(nodes_.size());
    nodes_[node].child = child;
    for (int q = 0; q < 4; ++q) {
        Node c;
        c.half = 0.5 * h;
        c.cx = cx + ((q & 1) ? 0.5 * h : -0.5 * h);
        c.cy = cy + ((q & 2) ? 0.5 * h : -0.5 * h);
        nodes_.push_back(c);
    }
    for (int q = 0; q < 4; ++q)
        build(static_cast<std::size_t>(child + q), bounds[static_cast<std::size_t>(q)], bounds[static_cast<std::size_t>(q) + 1], depth + 1);
}

Vec2 QuadTree::repulsion(Vec2 p, std::size_t self, double c, double theta) const
{
    Vec2 acc;
    if (!pts_.empty()) repulsion_rec(0, p, self, c, theta, acc);
    return acc;
}

void QuadTree::repulsion_rec(std::size_t node, Vec2 p, std::size_t self, double c, double theta, Vec2& acc) const
{
    const Node& nd = nodes_[node];
    if (nd.mass == 0) return;
    if (nd.child < 0) {
        for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
            const std::size_t j = order_[k];
            if (j == self) continue;
            const double dx = p.x - pts_[j].x, dy = p.y - pts_[j].y;
            const double d2 = dx * dx + dy * dy;
            if (d2 == 0.0) continue;
            acc.x += c * dx / d2;
            acc.y += c * dy / d2;
        }
        return;
    }
    const double dx = p.x - nd.mx, dy = p.y - nd.my;
    const double d2 = dx * dx + dy * dy;
    const bool inside = std::abs(p.x - nd.cx) <= nd.half && std::abs(p.y - nd.cy) <= nd.half;
    if (!inside && d2 > 0.0 && (2.0 * nd.half) * (2.0 * nd.half) < theta * theta * d2) {
        const double m = static_cast<double>(nd.mass);
        acc.x += c * m * dx / d2;
        acc.y += c * m * dy / d2;
        return;
    }
    for (int q = 0; q < 4; ++q) repulsion_rec(static_cast<std::size_t>(nd.child + q), p, self, c, theta, acc);
}

void QuadTree::query_radius(Vec2 p, double r, std::vector<std::size_t>& out) const
{
    out.clear();
    if (pts_.empty()) return;
    std::vector<std::size_t> stack{0};
    const double r2 = r * r;
    while (!stack.empty()) {
        const Node& nd = nodes_[stack.back()];
        stack.pop_back();
        if (nd.mass == 0) continue;
        if (std::abs(p.x - nd.cx) > nd.half + r || std::abs(p.y - nd.cy) > nd.half + r) continue;
        if (nd.child < 0) {
            for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
                const std::size_t j = order_[k];
                const double dx = p.x - pts_[j].x, dy = p.y - pts_[j].y;
                if (dx * dx + dy * dy <= r2) out.push_back(j);
            }
            continue;
        }
        for (int q = 0; q < 4; ++q) stack.push_back(static_cast<std::size_t>(nd.child + q));
    }
    std::sort(out.begin(), out.end());
}

} // namespace depthscope

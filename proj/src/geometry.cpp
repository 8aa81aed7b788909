#include "depthscope/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace depthscope::geometry {

namespace {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

Vec3 load(const double* p, int dim)
{
    return {p[0], dim > 1 ? p[1] : 0.0, dim > 2 ? p[2] : 0.0};
}
Vec3 sub(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

} // namespace

double cross2(const double* o, const double* a, const double* b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double det3(const double* o, const double* a, const double* b, const double* c)
{
    const Vec3 u = sub(load(a, 3), load(o, 3));
    const Vec3 v = sub(load(b, 3), load(o, 3));
    const Vec3 w = sub(load(c, 3), load(o, 3));
    return dot(u, cross(v, w));
}

void PreparedHull::prepare(std::span<const double* const> vertices, int dim)
{
    if (dim < 1 || dim > 3) throw std::invalid_argument("hull dimension must be 1, 2 or 3");
    if (vertices.empty()) throw std::invalid_argument("hull needs at least one vertex");
    dim_ = dim;
    verts_.clear();
    volume_ = 0.0;

    if (dim == 1) {
        lo_ = hi_ = vertices[0][0];
        for (const double* v : vertices) {
            lo_ = std::min(lo_, v[0]);
            hi_ = std::max(hi_, v[0]);
        }
        shape_ = Shape::Interval;
        volume_ = hi_ - lo_;
        return;
    }

    if (dim == 2) {
        std::vector<std::array<double, 2>> pts;
        pts.reserve(vertices.size());
        for (const double* v : vertices) pts.push_back({v[0], v[1]});
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        if (pts.size() == 1) {
            shape_ = Shape::Single;
            verts_ = {pts[0][0], pts[0][1]};
            return;
        }
        // Andrew's monotone chain; collinear points are dropped.
        std::vector<std::array<double, 2>> hull(2 * pts.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            while (k >= 2 && cross2(hull[k - 2].data(), hull[k - 1].data(), pts[i].data()) <= 0) --k;
            hull[k++] = pts[i];
        }
        for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
            while (k >= t && cross2(hull[k - 2].data(), hull[k - 1].data(), pts[i - 1].data()) <= 0) --k;
            hull[k++] = pts[i - 1];
        }
        hull.resize(k - 1);
        if (hull.size() < 3) {
            shape_ = Shape::Segment;
            verts_ = {pts.front()[0], pts.front()[1], pts.back()[0], pts.back()[1]};
            return;
        }
        shape_ = Shape::Polygon;
        double twice = 0.0;
        for (std::size_t i = 0; i < hull.size(); ++i) {
            const auto& a = hull[i];
            const auto& b = hull[(i + 1) % hull.size()];
            twice += a[0] * b[1] - a[1] * b[0];
            verts_.push_back(a[0]);
            verts_.push_back(a[1]);
        }
        volume_ = 0.5 * std::abs(twice);
        return;
    }

    if (vertices.size() > 4) throw std::invalid_argument("3D hulls support at most four vertices");
    for (const double* v : vertices) verts_.insert(verts_.end(), v, v + 3);
    switch (vertices.size()) {
    case 1: shape_ = Shape::Single; break;
    case 2: shape_ = Shape::Segment; break;
    case 3: shape_ = Shape::Triangle3; break;
    default: {
        const double d = det3(&verts_[0], &verts_[3], &verts_[6], &verts_[9]);
        shape_ = Shape::Tetra;
        volume_ = std::abs(d) / 6.0;
        orient_ = volume_ > kHullTolerance ? (d > 0 ? 1.0 : -1.0) : 0.0;
        if (orient_ == 0.0) volume_ = 0.0;
    }
    }
}

bool PreparedHull::segment_contains(const double* a, const double* b, const double* p) const
{
    const Vec3 va = load(a, dim_), vb = load(b, dim_), vp = load(p, dim_);
    const Vec3 ab = sub(vb, va), ap = sub(vp, va);
    if (dot(ab, ab) == 0.0) {
        const Vec3 d = sub(vp, va);
        return std::abs(d.x) <= kHullTolerance && std::abs(d.y) <= kHullTolerance && std::abs(d.z) <= kHullTolerance;
    }
    if (0.5 * norm(cross(ab, ap)) > kHullTolerance) return false;
    return dot(ap, ab) >= -kHullTolerance && dot(sub(vp, vb), sub(va, vb)) >= -kHullTolerance;
}

bool PreparedHull::triangle3_contains(const double* a, const double* b, const double* c, const double* p) const
{
    const Vec3 va = load(a, 3), vb = load(b, 3), vc = load(c, 3), vp = load(p, 3);
    const Vec3 n = cross(sub(vb, va), sub(vc, va));
    const double nn = norm(n);
    if (0.5 * nn <= kHullTolerance)
        return segment_contains(a, b, p) || segment_contains(b, c, p) || segment_contains(c, a, p);
    if (std::abs(dot(n, sub(vp, va))) / 6.0 > kHullTolerance) return false;
    auto signed_area = [&](Vec3 u, Vec3 v) { return dot(cross(sub(v, u), sub(vp, u)), n) / (2.0 * nn); };
    return signed_area(va, vb) >= -kHullTolerance && signed_area(vb, vc) >= -kHullTolerance &&
           signed_area(vc, va) >= -kHullTolerance;
}

bool PreparedHull::contains(const double* p) const
{
    switch (shape_) {
    case Shape::Empty:
        return false;
    case Shape::Interval:
        return lo_ <= p[0] && p[0] <= hi_;
    case Shape::Single:
        for (int c = 0; c < dim_; ++c)
            if (std::abs(p[c] - verts_[static_cast<std::size_t>(c)]) > kHullTolerance) return false;
        return true;
    case Shape::Segment:
        return segment_contains(&verts_[0], &verts_[static_cast<std::size_t>(dim_)], p);
    case Shape::Polygon: {
        const std::size_t m = verts_.size() / 2;
        for (std::size_t i = 0; i < m; ++i) {
            const double* a = &verts_[2 * i];
            const double* b = &verts_[2 * ((i + 1) % m)];
            if (0.5 * cross2(a, b, p) < -kHullTolerance) return false;
        }
        return true;
    }
    case Shape::Triangle3:
        return triangle3_contains(&verts_[0], &verts_[3], &verts_[6], p);
    case Shape::Tetra: {
        const double* v[4] = {&verts_[0], &verts_[3], &verts_[6], &verts_[9]};
        if (orient_ == 0.0) {
            return triangle3_contains(v[0], v[1], v[2], p) || triangle3_contains(v[0], v[1], v[3], p) ||
                   triangle3_contains(v[0], v[2], v[3], p) || triangle3_contains(v[1], v[2], v[3], p);
        }
        for (int i = 0; i < 4; ++i) {
            const double* w[4] = {v[0], v[1], v[2], v[3]};
            w[i] = p;
            if (orient_ * det3(w[0], w[1], w[2], w[3]) / 6.0 < -kHullTolerance) return false;
        }
        return true;
    }
    }
    return false;
}

bool in_convex_hull(const double* p, std::span<const double* const> vertices, int dim)
{
    PreparedHull h;
    h.prepare(vertices, dim);
    return h.contains(p);
}

double hull_volume(std::span<const double* const> vertices, int dim)
{
    PreparedHull h;
    h.prepare(vertices, dim);
    return h.volume();
}

} // namespace depthscope::geometry

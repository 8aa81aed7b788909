#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace depthscope::geometry {

/// Absolute tolerance applied to signed areas (2D) and signed volumes (3D).
inline constexpr double kHullTolerance = 1e-9;

/// Convex hull of up to a handful of vertices in 1..3 dimensions, prepared
/// once for repeated point-membership queries. Boundary points are inside.
///
/// Vertices are passed as pointers to `dim` consecutive doubles so callers can
/// hand in rows of a column store without copying. In 3D at most four
/// vertices are supported (one simplex), which covers every band arity the
/// band planner produces.
class PreparedHull {
public:
    void prepare(std::span<const double* const> vertices, int dim);

    bool contains(const double* p) const;
    /// Length, area or volume of the hull; 0 for degenerate hulls.
    double volume() const { return volume_; }
    int dim() const { return dim_; }

private:
    enum class Shape { Empty, Interval, Single, Segment, Polygon, Triangle3, Tetra };

    bool segment_contains(const double* a, const double* b, const double* p) const;
    bool triangle3_contains(const double* a, const double* b, const double* c, const double* p) const;

    int dim_ = 0;
    Shape shape_ = Shape::Empty;
    double volume_ = 0.0;
    double lo_ = 0.0, hi_ = 0.0;
    // 2D polygon (CCW) or 3D vertex copies, flattened.
    std::vector<double> verts_;
    double orient_ = 1.0;
};

bool in_convex_hull(const double* p, std::span<const double* const> vertices, int dim);
double hull_volume(std::span<const double* const> vertices, int dim);

/// Signed volume helpers, exposed for tests.
double cross2(const double* o, const double* a, const double* b);
double det3(const double* o, const double* a, const double* b, const double* c);

} // namespace depthscope::geometry

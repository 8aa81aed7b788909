#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace oracle {

using depthscope::AttributeKind;
using depthscope::CategorySet;
using depthscope::CurveValue;
using depthscope::Dataset;
using depthscope::FunctionValue;
using depthscope::PointValue;

namespace {

constexpr double kTol = 1e-9;

Coords sub(const Coords& a, const Coords& b)
{
    Coords r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

double dot(const Coords& a, const Coords& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Twice the (unsigned) area of triangle abc, any dimension up to 3.
double twice_area(const Coords& a, const Coords& b, const Coords& c)
{
    Coords u = sub(b, a), v = sub(c, a);
    u.resize(3, 0.0);
    v.resize(3, 0.0);
    const double x = u[1] * v[2] - u[2] * v[1];
    const double y = u[2] * v[0] - u[0] * v[2];
    const double z = u[0] * v[1] - u[1] * v[0];
    return std::sqrt(x * x + y * y + z * z);
}

// Six times the unsigned volume of tetrahedron abcd.
double six_volume(const Coords& a, const Coords& b, const Coords& c, const Coords& d)
{
    const Coords u = sub(b, a), v = sub(c, a), w = sub(d, a);
    return std::abs(u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
                    u[2] * (v[0] * w[1] - v[1] * w[0]));
}

bool on_segment(const Coords& p, const Coords& a, const Coords& b)
{
    const Coords ab = sub(b, a), ap = sub(p, a);
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return dot(ap, ap) <= kTol * kTol;
    if (twice_area(a, b, p) > kTol * std::max(1.0, std::sqrt(len2))) return false;
    const double t = dot(ap, ab);
    return t >= -kTol && t <= len2 + kTol;
}

bool in_triangle(const Coords& p, const Coords& a, const Coords& b, const Coords& c)
{
    const double whole = twice_area(a, b, c);
    if (whole <= kTol) return false; // degenerate: covered by the segment checks
    const double parts = twice_area(p, a, b) + twice_area(p, b, c) + twice_area(p, c, a);
    return parts <= whole + kTol * std::max(1.0, whole);
}

bool in_tetra(const Coords& p, const Coords& a, const Coords& b, const Coords& c, const Coords& d)
{
    const double whole = six_volume(a, b, c, d);
    if (whole <= kTol) return false;
    const double parts = six_volume(p, b, c, d) + six_volume(a, p, c, d) + six_volume(a, b, p, d) + six_volume(a, b, c, p);
    return parts <= whole + kTol * std::max(1.0, whole);
}

} // namespace

bool in_hull(const Coords& p, const std::vector<Coords>& pts, int dim)
{
    const std::size_t k = pts.size();
    for (std::size_t i = 0; i < k; ++i) {
        const Coords d = sub(p, pts[i]);
        if (dot(d, d) <= kTol * kTol) return true;
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (on_segment(p, pts[i], pts[j])) return true;
    if (dim < 2) return false;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            for (std::size_t l = j + 1; l < k; ++l)
                if (in_triangle(p, pts[i], pts[j], pts[l])) return true;
    if (dim < 3) return false;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            for (std::size_t l = j + 1; l < k; ++l)
                for (std::size_t m = l + 1; m < k; ++m)
                    if (in_tetra(p, pts[i], pts[j], pts[l], pts[m])) return true;
    return false;
}

double hull_volume(const std::vector<Coords>& pts, int dim)
{
    const std::size_t k = pts.size();
    if (dim == 1) {
        double w = 0.0;
        for (const auto& a : pts)
            for (const auto& b : pts) w = std::max(w, a[0] - b[0]);
        return w;
    }
    if (dim == 2) {
        if (k < 3) return 0.0;
        if (k == 3) return 0.5 * twice_area(pts[0], pts[1], pts[2]);
        // Four points: every hull point lies in exactly two of the four triangles
        // (convex quadrilateral) or the big triangle counts once and the three
        // inner ones tile it; either way the four areas sum to twice the hull.
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                for (std::size_t l = j + 1; l < 4; ++l) s += 0.5 * twice_area(pts[i], pts[j], pts[l]);
        return 0.5 * s;
    }
    if (k < 4) return 0.0;
    return six_volume(pts[0], pts[1], pts[2], pts[3]) / 6.0;
}

double enumerated_set_band_size(const std::vector<CategorySet>& members, std::size_t universe)
{
    std::size_t count = 0;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << universe); ++s) {
        bool ok = true;
        for (std::size_t e = 0; e < universe && ok; ++e) {
            const bool in_s = (s >> e) & 1u;
            bool all = true, any = false;
            for (const auto& m : members) {
                all = all && m.contains(e);
                any = any || m.contains(e);
            }
            if (all && !in_s) ok = false;
            if (in_s && !any) ok = false;
        }
        count += ok ? 1 : 0;
    }
    return static_cast<double>(count);
}

namespace {

bool set_included(const CategorySet& s, const std::vector<CategorySet>& members, std::size_t universe)
{
    for (std::size_t e = 0; e < universe; ++e) {
        bool all = true, any = false;
        for (const auto& m : members) {
            all = all && m.contains(e);
            any = any || m.contains(e);
        }
        if (all && !s.contains(e)) return false;
        if (s.contains(e) && !any) return false;
    }
    return true;
}

double trapezoid(const std::vector<double>& grid, const std::vector<double>& width)
{
    if (grid.size() == 1) return width[0];
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) s += (grid[j + 1] - grid[j]) * (width[j] + width[j + 1]) / 2.0;
    return s;
}

} // namespace

BandResult evaluate_band(const Dataset& ds, const std::vector<std::uint32_t>& members)
{
    const std::size_t n = ds.size();
    BandResult res;
    res.included.assign(n, true);
    res.total = 1.0;
    for (std::size_t a = 0; a < ds.schema.size(); ++a) {
        const auto& sc = ds.schema[a];
        double size = 0.0;
        std::vector<bool> inc(n, false);
        switch (sc.kind) {
        case AttributeKind::Scalar: {
            std::vector<Coords> pts;
            for (auto m : members) pts.push_back({std::get<double>(ds.rows[m][a])});
            size = hull_volume(pts, 1);
            for (std::size_t i = 0; i < n; ++i) inc[i] = in_hull({std::get<double>(ds.rows[i][a])}, pts, 1);
            break;
        }
        case AttributeKind::Point: {
            std::vector<Coords> pts;
            for (auto m : members) pts.push_back(std::get<PointValue>(ds.rows[m][a]).coords);
            size = hull_volume(pts, sc.dim);
            for (std::size_t i = 0; i < n; ++i) inc[i] = in_hull(std::get<PointValue>(ds.rows[i][a]).coords, pts, sc.dim);
            break;
        }
        case AttributeKind::CategoricalSet: {
            std::vector<CategorySet> sets;
            for (auto m : members) sets.push_back(std::get<CategorySet>(ds.rows[m][a]));
            size = enumerated_set_band_size(sets, sc.universe.size());
            for (std::size_t i = 0; i < n; ++i)
                inc[i] = set_included(std::get<CategorySet>(ds.rows[i][a]), sets, sc.universe.size());
            break;
        }
        case AttributeKind::Function: {
            const std::size_t g = sc.grid.size();
            std::vector<double> lo(g, INFINITY), hi(g, -INFINITY), width(g);
            for (auto m : members) {
                const auto& f = std::get<FunctionValue>(ds.rows[m][a]).samples;
                for (std::size_t j = 0; j < g; ++j) {
                    lo[j] = std::min(lo[j], f[j]);
                    hi[j] = std::max(hi[j], f[j]);
                }
            }
            for (std::size_t j = 0; j < g; ++j) width[j] = hi[j] - lo[j];
            size = trapezoid(sc.grid, width);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& f = std::get<FunctionValue>(ds.rows[i][a]).samples;
                bool ok = true;
                for (std::size_t j = 0; j < g; ++j) ok = ok && lo[j] <= f[j] && f[j] <= hi[j];
                inc[i] = ok;
            }
            break;
        }
        case AttributeKind::Curve: {
            const auto d = static_cast<std::size_t>(sc.dim);
            const auto T = static_cast<std::size_t>(sc.time_points);
            auto at = [&](std::size_t row, std::size_t t) {
                const auto& s = std::get<CurveValue>(ds.rows[row][a]).samples;
                return Coords(s.begin() + static_cast<std::ptrdiff_t>(t * d), s.begin() + static_cast<std::ptrdiff_t>((t + 1) * d));
            };
            size = 1.0;
            std::fill(inc.begin(), inc.end(), true);
            for (std::size_t t = 0; t < T; ++t) {
                std::vector<Coords> pts;
                for (auto m : members) pts.push_back(at(m, t));
                size *= hull_volume(pts, sc.dim);
                for (std::size_t i = 0; i < n; ++i) inc[i] = inc[i] && in_hull(at(i, t), pts, sc.dim);
            }
            break;
        }
        }
        res.sizes.push_back(size);
        res.total *= size;
        for (std::size_t i = 0; i < n; ++i) res.included[i] = res.included[i] && inc[i];
    }
    return res;
}

std::vector<double> naive_pair_depth(const std::vector<double>& x)
{
    const std::size_t n = x.size();
    std::vector<double> depth(n);
    const double pairs = static_cast<double>(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                if (std::min(x[j], x[k]) <= x[i] && x[i] <= std::max(x[j], x[k])) ++c;
        depth[i] = static_cast<double>(c) / pairs;
    }
    return depth;
}

std::vector<std::vector<std::uint32_t>> all_subsets(std::size_t n, std::size_t r)
{
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur;
    auto rec = [&](auto&& self, std::uint32_t start) -> void {
        if (cur.size() == r) {
            out.push_back(cur);
            return;
        }
        for (std::uint32_t i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

double naive_similarity(const std::vector<bool>& a, const std::vector<bool>& b)
{
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
    return 1.0 - static_cast<double>(diff) / static_cast<double>(a.size());
}

std::vector<double> block_matrix(const std::vector<std::size_t>& blocks, std::uint64_t seed, double lo)
{
    const std::size_t n = std::accumulate(blocks.begin(), blocks.end(), std::size_t{0});
    std::vector<double> a(n * n, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, 1.0);
    std::size_t start = 0;
    for (std::size_t b : blocks) {
        for (std::size_t i = start; i < start + b; ++i) {
            a[i * n + i] = 1.0;
            for (std::size_t j = i + 1; j < start + b; ++j) a[i * n + j] = a[j * n + i] = u(rng);
        }
        start += b;
    }
    return a;
}

std::size_t component_count(const std::vector<double>& a, std::size_t n)
{
    std::vector<bool> seen(n, false);
    std::size_t count = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++count;
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = true;
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            for (std::size_t w = 0; w < n; ++w)
                if (w != v && !seen[w] && a[v * n + w] > 0.0) {
                    seen[w] = true;
                    q.push(w);
                }
        }
    }
    return count;
}

Dataset random_dataset(std::size_t n, const std::vector<depthscope::AttributeSchema>& schema, std::uint64_t seed,
                       bool grid)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cell(0, 3);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    auto real = [&] { return grid ? static_cast<double>(cell(rng)) : normal(rng); };

    Dataset ds;
    ds.id = "random";
    ds.schema = schema;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<depthscope::AttributeValue> row;
        for (const auto& sc : schema) {
            switch (sc.kind) {
            case AttributeKind::Scalar: row.emplace_back(real()); break;
            case AttributeKind::Point: {
                PointValue p;
                for (int c = 0; c < sc.dim; ++c) p.coords.push_back(real());
                row.emplace_back(p);
                break;
            }
            case AttributeKind::CategoricalSet: {
                auto s = CategorySet::with_universe(sc.universe.size());
                for (std::size_t e = 0; e < sc.universe.size(); ++e)
                    if (coin(rng)) s.insert(e);
                row.emplace_back(s);
                break;
            }
            case AttributeKind::Function: {
                FunctionValue f;
                for (std::size_t j = 0; j < sc.grid.size(); ++j) f.samples.push_back(real());
                row.emplace_back(f);
                break;
            }
            case AttributeKind::Curve: {
                CurveValue c;
                for (int j = 0; j < sc.dim * sc.time_points; ++j) c.samples.push_back(real());
                row.emplace_back(c);
                break;
            }
            }
        }
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

double two_label_agreement(const std::vector<int>& a, const std::vector<int>& b)
{
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += (a[i] == b[i]) ? 1 : 0;
    const double f = static_cast<double>(same) / static_cast<double>(a.size());
    return std::max(f, 1.0 - f);
}

double chi_square(const std::vector<std::vector<double>>& table, std::size_t& dof)
{
    std::vector<double> rows, cols;
    const std::size_t R = table.size(), C = R ? table[0].size() : 0;
    std::vector<double> rs(R, 0.0), cs(C, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            rs[i] += table[i][j];
            cs[j] += table[i][j];
            total += table[i][j];
        }
    std::size_t r_used = 0, c_used = 0;
    for (double v : rs) r_used += v > 0 ? 1 : 0;
    for (double v : cs) c_used += v > 0 ? 1 : 0;
    dof = (r_used > 0 && c_used > 0) ? (r_used - 1) * (c_used - 1) : 0;
    double chi = 0.0;
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            if (rs[i] == 0 || cs[j] == 0) continue;
            const double e = rs[i] * cs[j] / total;
            chi += (table[i][j] - e) * (table[i][j] - e) / e;
        }
    return chi;
}

} // namespace oracle

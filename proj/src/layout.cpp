#include "depthscope/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "depthscope/error.hpp"

namespace depthscope {

namespace {

constexpr std::uint64_t kOutlierStream = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kCollisionStream = 0xc2b2ae3d27d4eb4full;

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Uniform scaling of the points into [lo, hi]^2, centered.
void fit_square(std::vector<Vec2>& pts, double lo, double hi)
{
    if (pts.empty()) return;
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double span = std::max(x1 - x0, y1 - y0);
    const double mid = 0.5 * (lo + hi);
    if (span <= 0.0) {
        for (auto& p : pts) p = {mid, mid};
        return;
    }
    const double s = (hi - lo) / span;
    const double ox = mid - 0.5 * (x1 - x0) * s, oy = mid - 0.5 * (y1 - y0) * s;
    for (auto& p : pts) p = {std::clamp(ox + (p.x - x0) * s, lo, hi), std::clamp(oy + (p.y - y0) * s, lo, hi)};
}

} // namespace

std::vector<std::size_t> zero_similarity_points(const DenseMatrix& S)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < S.n; ++i) {
        bool linked = false;
        for (std::size_t j = 0; j < S.n && !linked; ++j) linked = j != i && S(i, j) > 0.0;
        if (!linked && S.n > 1) out.push_back(i);
    }
    return out;
}

double layout_energy(const DenseMatrix& S, const std::vector<Vec2>& pos, const std::vector<std::size_t>& members)
{
    const double m = static_cast<double>(members.size());
    double e = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            const std::size_t i = members[a], j = members[b];
            const double d = dist(pos[i], pos[j]);
            e += 0.5 * S(i, j) * d * d / m;
            if (d > 0.0) e -= std::log(d) / m;
        }
    }
    return e;
}

LayoutResult force_layout(const DenseMatrix& S, const ForceLayoutOptions& options)
{
    const std::size_t n = S.n;
    LayoutResult r;
    r.mode = LayoutMode::ForceDirected;
    r.iterations = options.iterations;
    r.positions.assign(n, Vec2{0.5, 0.5});
    r.outliers = zero_similarity_points(S);

    std::vector<std::size_t> active;
    {
        std::vector<bool> out(n, false);
        for (auto i : r.outliers) out[i] = true;
        for (std::size_t i = 0; i < n; ++i)
            if (!out[i]) active.push_back(i);
    }
    const std::size_t m = active.size();

    if (m >= 2) {
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::vector<Vec2> p(m), next(m);
        for (auto& q : p) {
            q.x = u01(rng);
            q.y = u01(rng);
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        std::vector<double> sub(m * m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) sub[a * m + b] = S(active[a], active[b]);
        const int T = std::max(options.iterations, 0);
        const int monitor_from = T - (T + 9) / 10;
        std::vector<Vec2> full(n);
        double prev_energy = 0.0;
        for (int t = 0; t < T; ++t) {
            QuadTree tree(p);
            const double cap = options.initial_step * (1.0 - static_cast<double>(t) / static_cast<double>(T));
            for (std::size_t a = 0; a < m; ++a) {
                Vec2 f = tree.repulsion(p[a], a, inv_m, options.theta);
                // Self and zero-similarity terms add exactly zero, so no branch.
                const double* row = sub.data() + a * m;
                double ax = 0.0, ay = 0.0;
                for (std::size_t b = 0; b < m; ++b) {
                    ax += row[b] * (p[b].x - p[a].x);
                    ay += row[b] * (p[b].y - p[a].y);
                }
                f.x += inv_m * ax;
                f.y += inv_m * ay;
                const double len = std::hypot(f.x, f.y);
                if (len > cap && len > 0.0) {
                    f.x *= cap / len;
                    f.y *= cap / len;
                }
                next[a] = {p[a].x + f.x, p[a].y + f.y};
            }
            p.swap(next);
            if (t >= monitor_from) {
                for (std::size_t a = 0; a < m; ++a) full[active[a]] = p[a];
                const double e = layout_energy(S, full, active);
                if (t > monitor_from && e > prev_energy + 1e-12 * std::abs(prev_energy)) ++r.energy_increases;
                r.energy_trace.push_back(e);
                prev_energy = e;
            }
        }
        for (std::size_t a = 0; a < m; ++a) full[active[a]] = p[a];
        r.energy = layout_energy(S, full, active);
        fit_square(p, 0.1, 0.9);
        for (std::size_t a = 0; a < m; ++a) r.positions[active[a]] = p[a];
    }

    const auto border = place_outliers(r.outliers.size(), options.seed);
    for (std::size_t k = 0; k < r.outliers.size(); ++k) r.positions[r.outliers[k]] = border[k];
    return r;
}

CollisionReport resolve_collisions(std::vector<Vec2>& positions, double r, std::uint64_t seed, int max_passes)
{
    if (!(r > 0.0)) throw std::invalid_argument("collision radius must be positive");
    CollisionReport rep;
    std::mt19937_64 rng(seed ^ kCollisionStream);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double reach = 2.0 * r;
    std::vector<std::size_t> near;
    std::vector<Vec2> disp(positions.size());

    auto count_overlaps = [&]() {
        QuadTree tree(positions);
        std::size_t c = 0;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            tree.query_radius(positions[i], reach, near);
            for (std::size_t j : near)
                if (j > i && dist(positions[i], positions[j]) < reach) ++c;
        }
        return c;
    };

    for (int pass = 0; pass < max_passes; ++pass) {
        QuadTree tree(positions);
        std::fill(disp.begin(), disp.end(), Vec2{});
        std::size_t overlaps = 0;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            tree.query_radius(positions[i], reach, near);
            for (std::size_t j : near) {
                if (j <= i) continue;
                const double d = dist(positions[i], positions[j]);
                if (d >= reach) continue;
                ++overlaps;
                double ux, uy;
                if (d > 0.0) {
                    ux = (positions[i].x - positions[j].x) / d;
                    uy = (positions[i].y - positions[j].y) / d;
                } else {
                    const double a = angle(rng);
                    ux = std::cos(a);
                    uy = std::sin(a);
                }
                const double push = 0.5 * (reach - d) + 1e-9 * r;
                disp[i].x += ux * push;
                disp[i].y += uy * push;
                disp[j].x -= ux * push;
                disp[j].y -= uy * push;
            }
        }
        if (overlaps == 0) return rep;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (disp[i].x == 0.0 && disp[i].y == 0.0) continue;
            positions[i].x = std::clamp(positions[i].x + disp[i].x, 0.0, 1.0);
            positions[i].y = std::clamp(positions[i].y + disp[i].y, 0.0, 1.0);
        }
        ++rep.passes;
    }
    rep.remaining_overlaps = count_overlaps();
    return rep;
}

std::vector<Vec2> place_outliers(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ kOutlierStream);
    std::uniform_real_distribution<double> u01(0.0, 1.0), depth(0.0, kOutlierMargin);
    std::uniform_int_distribution<int> side(0, 3);
    std::vector<Vec2> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const int s = side(rng);
        const double along = u01(rng), d = depth(rng);
        switch (s) {
        case 0: out.push_back({along, d}); break;
        case 1: out.push_back({1.0 - d, along}); break;
        case 2: out.push_back({along, 1.0 - d}); break;
        default: out.push_back({d, along}); break;
        }
    }
    return out;
}

LayoutResult geospatial_positions(const Dataset& ds, std::string_view attribute)
{
    const std::size_t a = ds.attribute_index(attribute);
    const auto& attr = ds.schema[a];
    const bool point = attr.kind == AttributeKind::Point && attr.dim == 2;
    const bool curve = attr.kind == AttributeKind::Curve && attr.dim == 2;
    if (!point && !curve) throw AnalysisError("layout", "attribute '" + std::string(attribute) + "' is not a 2D position");

    LayoutResult r;
    r.mode = LayoutMode::Geospatial;
    std::vector<Vec2> all;
    for (const auto& row : ds.rows) {
        if (point) {
            const auto& c = std::get<PointValue>(row[a]).coords;
            all.push_back({c[0], c[1]});
        } else {
            const auto& s = std::get<CurveValue>(row[a]).samples;
            for (std::size_t t = 0; t + 1 < s.size(); t += 2) all.push_back({s[t], s[t + 1]});
        }
    }
    fit_square(all, 0.0, 1.0);
    if (point) {
        r.positions = std::move(all);
    } else {
        const auto T = static_cast<std::size_t>(attr.time_points);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            std::vector<Vec2> line(all.begin() + static_cast<std::ptrdiff_t>(i * T),
                                   all.begin() + static_cast<std::ptrdiff_t>((i + 1) * T));
            r.positions.push_back(line.front());
            r.polylines.push_back(std::move(line));
        }
    }
    return r;
}

std::vector<Edge> edge_list(const DenseMatrix& S, double threshold)
{
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("edge threshold must lie in [0, 1]");
    std::vector<Edge> out;
    for (std::size_t i = 0; i < S.n; ++i)
        for (std::size_t j = i + 1; j < S.n; ++j)
            if (S(i, j) > 0.0 && S(i, j) >= threshold) out.push_back({i, j, S(i, j)});
    return out;
}

nlohmann::json to_json(const LayoutResult& r)
{
    auto pts = [](const std::vector<Vec2>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& p : v) a.push_back({p.x, p.y});
        return a;
    };
    nlohmann::json j{{"mode", r.mode == LayoutMode::ForceDirected ? "force" : "geospatial"},
                     {"positions", pts(r.positions)},
                     {"outliers", r.outliers}};
    if (r.mode == LayoutMode::ForceDirected) {
        j["iterations"] = r.iterations;
        j["energy"] = r.energy;
        j["energyIncreases"] = r.energy_increases;
        j["collisionPasses"] = r.collision_passes;
        j["remainingOverlaps"] = r.remaining_overlaps;
    } else {
        nlohmann::json lines = nlohmann::json::array();
        for (const auto& l : r.polylines) lines.push_back(pts(l));
        j["polylines"] = std::move(lines);
    }
    return j;
}

} // namespace depthscope

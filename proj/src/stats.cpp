#include "depthscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "depthscope/signatures.hpp"

namespace depthscope {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::size_t ceil_frac(double f, std::size_t n)
{
    // ceil(f * n) without the 0.2 * 10 = 2.0000000000000004 trap
    const auto num = static_cast<std::size_t>(std::llround(f * 100.0));
    return (num * n + 99) / 100;
}

} // namespace

double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p)
{
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, p);
}

std::vector<double> average_ranks(std::span<const double> values)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman needs two equal-length samples");
    const auto ra = average_ranks(a), rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return saa == sbb ? 1.0 : 0.0;
    return sab / std::sqrt(saa * sbb);
}

DepthColoring color_bins(std::span<const double> depths)
{
    const std::size_t n = depths.size();
    DepthColoring c;
    c.bin.assign(n, 3);
    c.cuts = {ceil_frac(0.2, n), ceil_frac(0.4, n), ceil_frac(0.8, n)};
    c.thresholds = {0.0, 0.0, 0.0};
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return depths[a] > depths[b]; });
    for (std::size_t r = 0; r < n; ++r) {
        int b = 3;
        if (r < c.cuts[0]) b = 0;
        else if (r < c.cuts[1]) b = 1;
        else if (r < c.cuts[2]) b = 2;
        c.bin[rank[r]] = b;
    }
    for (std::size_t k = 0; k < 3; ++k)
        if (c.cuts[k] > 0) c.thresholds[k] = depths[rank[c.cuts[k] - 1]];
    return c;
}

OutlierFlags tukey_outliers(std::span<const double> depths)
{
    OutlierFlags f;
    f.is_outlier.assign(depths.size(), false);
    if (depths.empty()) return f;
    std::vector<double> sorted(depths.begin(), depths.end());
    std::sort(sorted.begin(), sorted.end());
    f.q1 = quantile_sorted(sorted, 0.25);
    f.q3 = quantile_sorted(sorted, 0.75);
    f.lower_fence = f.q1 - 1.5 * (f.q3 - f.q1);
    for (std::size_t i = 0; i < depths.size(); ++i) {
        if (depths[i] < f.lower_fence || depths[i] == 0.0) {
            f.is_outlier[i] = true;
            ++f.count;
        }
    }
    return f;
}

Histogram band_size_histogram(std::span<const double> sizes, std::span<const double> log_sizes, std::size_t bins,
                              bool log_scale)
{
    if (sizes.empty()) throw std::invalid_argument("histogram needs at least one band");
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    Histogram h;
    h.log_scale = log_scale;
    h.counts.assign(bins, 0);

    // Values binned: sizes, or log sizes of the positive-size bands.
    std::vector<double> v;
    v.reserve(sizes.size());
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        if (log_scale) {
            if (std::isfinite(log_sizes[b])) v.push_back(log_sizes[b]);
            else ++h.zero_sized;
        } else {
            if (sizes[b] == 0.0) ++h.zero_sized;
            v.push_back(sizes[b]);
        }
    }
    double lo = 0.0, hi = 0.0;
    bool any_finite = false;
    for (double x : v) {
        if (!std::isfinite(x)) continue;
        lo = any_finite ? std::min(lo, x) : x;
        hi = any_finite ? std::max(hi, x) : x;
        any_finite = true;
    }
    h.min = lo;
    h.max = hi;
    const double width = (hi - lo) / static_cast<double>(bins);
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = k == bins ? hi : lo + width * static_cast<double>(k);

    if (log_scale) h.counts[0] += h.zero_sized;
    for (double x : v) {
        std::size_t k = 0;
        if (!std::isfinite(x)) k = bins - 1;
        else if (width > 0.0) k = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
        ++h.counts[k];
    }

    const auto order = band_size_order(sizes, log_sizes);
    for (int i = 0; i <= 20; ++i) {
        const double q = 0.05 * i;
        const auto pos = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(sizes.size()))) - 1;
        const auto k = order[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(pos, 0, static_cast<std::ptrdiff_t>(sizes.size()) - 1))];
        h.snap_quantiles.push_back(q);
        h.snap_values.push_back(sizes[k]);
    }
    return h;
}

FiveNumber five_number(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75),
            values.back()};
}

std::vector<AttributeSummary> attribute_summaries(const Dataset& ds, const DepthColoring& coloring,
                                                  std::span<const int> labels, std::size_t cluster_count)
{
    std::vector<AttributeSummary> out;
    const std::size_t n = ds.size();
    for (std::size_t a = 0; a < ds.schema.size(); ++a) {
        const auto& attr = ds.schema[a];
        AttributeSummary s;
        s.name = attr.name;
        s.kind = attr.kind;
        switch (attr.kind) {
        case AttributeKind::CategoricalSet: {
            for (std::size_t c = 0; c < attr.universe.size(); ++c) {
                CategoryCounts cc;
                cc.category = attr.universe[c];
                cc.by_cluster.assign(cluster_count, 0);
                for (std::size_t i = 0; i < n; ++i) {
                    if (!std::get<CategorySet>(ds.rows[i][a]).contains(c)) continue;
                    ++cc.by_bin[static_cast<std::size_t>(coloring.bin[i])];
                    ++cc.by_cluster[static_cast<std::size_t>(labels[i])];
                    cc.holders.push_back(i);
                }
                s.categories.push_back(std::move(cc));
            }
            break;
        }
        case AttributeKind::Scalar: {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = std::get<double>(ds.rows[i][a]);
            s.five = five_number(v);
            const double iqr = s.five.q3 - s.five.q1;
            for (std::size_t i = 0; i < n; ++i)
                if (v[i] < s.five.q1 - 1.5 * iqr || v[i] > s.five.q3 + 1.5 * iqr) s.outliers.push_back(i);
            break;
        }
        case AttributeKind::Point:
        case AttributeKind::Function:
        case AttributeKind::Curve: {
            const std::size_t width = attr.real_width();
            s.dim = attr.kind == AttributeKind::Function ? 1 : static_cast<std::size_t>(attr.dim);
            std::vector<double> col(n);
            for (std::size_t j = 0; j < width; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& v = ds.rows[i][a];
                    if (attr.kind == AttributeKind::Point) col[i] = std::get<PointValue>(v).coords[j];
                    else if (attr.kind == AttributeKind::Function) col[i] = std::get<FunctionValue>(v).samples[j];
                    else col[i] = std::get<CurveValue>(v).samples[j];
                }
                s.pointwise.push_back(five_number(col));
            }
            break;
        }
        }
        out.push_back(std::move(s));
    }
    return out;
}

nlohmann::json to_json(const DepthColoring& c)
{
    return {{"bins", c.bin}, {"cuts", c.cuts}, {"thresholds", c.thresholds}};
}

nlohmann::json to_json(const OutlierFlags& f)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < f.is_outlier.size(); ++i)
        if (f.is_outlier[i]) idx.push_back(i);
    return {{"flags", f.is_outlier}, {"indices", idx}, {"q1", f.q1}, {"q3", f.q3}, {"lowerFence", f.lower_fence},
            {"count", f.count}};
}

nlohmann::json to_json(const Histogram& h)
{
    nlohmann::json edges = nlohmann::json::array(), snaps = nlohmann::json::array();
    for (double e : h.edges) edges.push_back(finite_or_null(e));
    for (std::size_t i = 0; i < h.snap_values.size(); ++i)
        snaps.push_back({{"quantile", h.snap_quantiles[i]}, {"size", finite_or_null(h.snap_values[i])}});
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    return {{"logScale", h.log_scale},
            {"edgeUnits", h.log_scale ? "log-size" : "size"},
            {"edges", std::move(edges)},
            {"counts", h.counts},
            {"bandCount", total},
            {"zeroSized", h.zero_sized},
            {"min", finite_or_null(h.min)},
            {"max", finite_or_null(h.max)},
            {"snap", std::move(snaps)}};
}

nlohmann::json to_json(const FiveNumber& f)
{
    return {{"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}};
}

nlohmann::json to_json(const AttributeSummary& s)
{
    nlohmann::json j{{"name", s.name}, {"kind", to_string(s.kind)}};
    switch (s.kind) {
    case AttributeKind::CategoricalSet: {
        nlohmann::json cats = nlohmann::json::array();
        for (const auto& c : s.categories)
            cats.push_back({{"category", c.category}, {"byBin", c.by_bin}, {"byCluster", c.by_cluster}, {"holders", c.holders}});
        j["categories"] = std::move(cats);
        break;
    }
    case AttributeKind::Scalar:
        j["five"] = to_json(s.five);
        j["outliers"] = s.outliers;
        break;
    default: {
        nlohmann::json pw = nlohmann::json::array();
        for (const auto& f : s.pointwise) pw.push_back(to_json(f));
        j["dim"] = s.dim;
        j["pointwise"] = std::move(pw);
    }
    }
    return j;
}

} // namespace depthscope

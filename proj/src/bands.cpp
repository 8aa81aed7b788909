#include "depthscope/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <random>
#include <unordered_set>

#include "depthscope/error.hpp"

namespace depthscope {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

double trapezoid(std::span<const double> grid, std::span<const double> width)
{
    if (grid.size() == 1) return width[0]; // single-sample grid: point evaluation
    double s = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) s += 0.5 * (width[j] + width[j - 1]) * (grid[j] - grid[j - 1]);
    return s;
}

int kind_cost(AttributeKind k)
{
    switch (k) {
    case AttributeKind::Scalar: return 0;
    case AttributeKind::CategoricalSet: return 1;
    case AttributeKind::Point: return 2;
    case AttributeKind::Function: return 3;
    case AttributeKind::Curve: return 4;
    }
    return 5;
}

// Lexicographic unranking of an r-subset of [0, n).
void unrank_combination(std::uint64_t rank, std::size_t n, std::size_t r, std::uint32_t* out)
{
    std::size_t x = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (;;) {
            const std::uint64_t cnt = binomial(n - 1 - x, r - 1 - i);
            if (rank < cnt) {
                out[i] = static_cast<std::uint32_t>(x++);
                break;
            }
            rank -= cnt;
            ++x;
        }
    }
}

} // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // c * (n - k + i) is divisible by i and gcd(c / g, i / g) = 1, so both divisions are exact.
        const std::uint64_t g = std::gcd(c, i);
        const std::uint64_t t = (n - k + i) / (i / g);
        c /= g;
        if (c > std::numeric_limits<std::uint64_t>::max() / t) return std::numeric_limits<std::uint64_t>::max();
        c *= t;
    }
    return c;
}

std::size_t band_subset_size(std::span<const AttributeSchema> schema)
{
    std::size_t r = 2;
    for (const auto& a : schema) r = std::max(r, a.min_band_cardinality());
    return r;
}

BandPlan plan_bands(std::size_t n, std::size_t r, std::optional<std::size_t> budget, std::uint64_t seed)
{
    if (r < 2) throw AnalysisError("bands", "band subset size must be at least 2");
    if (n < r)
        throw AnalysisError("bands", "need at least " + std::to_string(r) + " datapoints for bands of " +
                                         std::to_string(r) + ", got " + std::to_string(n));
    const std::size_t cap = budget.value_or(kDefaultBandBudget);
    if (cap < n) throw AnalysisError("bands", "band budget must be at least n");

    BandPlan plan;
    plan.n = n;
    plan.subset_size = r;
    plan.budget = cap;
    plan.seed = seed;

    const std::uint64_t total = binomial(n, r);
    if (total <= cap) {
        plan.enumeration = Enumeration::Exhaustive;
        plan.members.resize(static_cast<std::size_t>(total) * r);
        std::vector<std::uint32_t> c(r);
        for (std::size_t i = 0; i < r; ++i) c[i] = static_cast<std::uint32_t>(i);
        for (std::size_t b = 0; b < total; ++b) {
            std::copy(c.begin(), c.end(), plan.members.begin() + static_cast<std::ptrdiff_t>(b * r));
            // next combination in lexicographic order
            std::size_t i = r;
            while (i > 0 && c[i - 1] == n - r + i - 1) --i;
            if (i == 0) break;
            ++c[i - 1];
            for (std::size_t j = i; j < r; ++j) c[j] = c[j - 1] + 1;
        }
        return plan;
    }

    // Floyd's sampling of `cap` distinct lexicographic ranks.
    plan.enumeration = Enumeration::Sampled;
    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(cap * 2);
    for (std::uint64_t j = total - cap; j < total; ++j) {
        const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> ranks(chosen.begin(), chosen.end());
    std::sort(ranks.begin(), ranks.end());
    plan.members.resize(cap * r);
    for (std::size_t b = 0; b < ranks.size(); ++b) unrank_combination(ranks[b], n, r, plan.members.data() + b * r);
    return plan;
}

BandPlan plan_bands(const Dataset& dataset, std::optional<std::size_t> budget, std::uint64_t seed)
{
    return plan_bands(dataset.size(), band_subset_size(dataset.schema), budget, seed);
}

nlohmann::json to_json(const BandPlan& plan)
{
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t b = 0; b < plan.band_count(); ++b) {
        auto m = plan.band(b);
        members.push_back(std::vector<std::uint32_t>(m.begin(), m.end()));
    }
    return {{"n", plan.n},
            {"subsetSize", plan.subset_size},
            {"enumeration", plan.enumeration == Enumeration::Exhaustive ? "exhaustive" : "sampled"},
            {"budget", plan.budget},
            {"seed", plan.seed},
            {"memberIndices", std::move(members)}};
}

BandPlan band_plan_from_json(const nlohmann::json& doc)
{
    BandPlan plan;
    plan.n = doc.at("n").get<std::size_t>();
    plan.subset_size = doc.at("subsetSize").get<std::size_t>();
    plan.enumeration = doc.at("enumeration").get<std::string>() == "exhaustive" ? Enumeration::Exhaustive : Enumeration::Sampled;
    plan.budget = doc.at("budget").get<std::size_t>();
    plan.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& m : doc.at("memberIndices")) {
        if (m.size() != plan.subset_size) throw IngestError("band plan: member tuple has wrong arity");
        for (const auto& i : m) {
            const auto v = i.get<std::uint32_t>();
            if (v >= plan.n) throw IngestError("band plan: member index out of range");
            plan.members.push_back(v);
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Value-level inclusion tests

bool band_includes_scalar(double v, std::span<const double> members)
{
    const auto [lo, hi] = std::minmax_element(members.begin(), members.end());
    return *lo <= v && v <= *hi;
}

bool band_includes_point(const PointValue& p, std::span<const PointValue> members)
{
    std::vector<const double*> verts;
    for (const auto& m : members) verts.push_back(m.coords.data());
    return geometry::in_convex_hull(p.coords.data(), verts, static_cast<int>(p.coords.size()));
}

bool band_includes_set(const CategorySet& s, std::span<const CategorySet> members)
{
    const std::size_t w = s.words.size();
    for (std::size_t i = 0; i < w; ++i) {
        bits::Word inter = ~bits::Word{0}, uni = 0;
        for (const auto& m : members) {
            inter &= m.words[i];
            uni |= m.words[i];
        }
        if ((inter & ~s.words[i]) != 0 || (s.words[i] & ~uni) != 0) return false;
    }
    return true;
}

bool band_includes_function(const FunctionValue& f, std::span<const FunctionValue> members)
{
    for (std::size_t j = 0; j < f.samples.size(); ++j) {
        double lo = members[0].samples[j], hi = lo;
        for (const auto& m : members) {
            lo = std::min(lo, m.samples[j]);
            hi = std::max(hi, m.samples[j]);
        }
        if (f.samples[j] < lo || f.samples[j] > hi) return false;
    }
    return true;
}

bool band_includes_curve(const CurveValue& c, std::span<const CurveValue> members, int dim)
{
    const auto d = static_cast<std::size_t>(dim);
    const std::size_t T = c.samples.size() / d;
    std::vector<const double*> verts(members.size());
    geometry::PreparedHull hull;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < members.size(); ++k) verts[k] = members[k].samples.data() + t * d;
        hull.prepare(verts, dim);
        if (!hull.contains(c.samples.data() + t * d)) return false;
    }
    return true;
}

namespace {

template <class T>
std::vector<T> gather(const Dataset& ds, std::size_t a, std::span<const std::uint32_t> members)
{
    std::vector<T> out;
    out.reserve(members.size());
    for (auto m : members) out.push_back(std::get<T>(ds.rows[m][a]));
    return out;
}

} // namespace

BandSize band_size(const Dataset& ds, std::span<const std::uint32_t> members)
{
    BandSize out;
    out.total = 1.0;
    out.log_total = 0.0;
    for (std::size_t a = 0; a < ds.schema.size(); ++a) {
        const auto& attr = ds.schema[a];
        double size = 0.0, log_size = 0.0;
        switch (attr.kind) {
        case AttributeKind::Scalar: {
            const auto v = gather<double>(ds, a, members);
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            size = *hi - *lo;
            log_size = safe_log(size);
            break;
        }
        case AttributeKind::Point: {
            const auto v = gather<PointValue>(ds, a, members);
            std::vector<const double*> verts;
            for (const auto& p : v) verts.push_back(p.coords.data());
            size = geometry::hull_volume(verts, attr.dim);
            log_size = safe_log(size);
            break;
        }
        case AttributeKind::CategoricalSet: {
            const auto v = gather<CategorySet>(ds, a, members);
            std::size_t free = 0;
            for (std::size_t i = 0; i < v[0].words.size(); ++i) {
                bits::Word inter = ~bits::Word{0}, uni = 0;
                for (const auto& s : v) {
                    inter &= s.words[i];
                    uni |= s.words[i];
                }
                free += static_cast<std::size_t>(std::popcount(uni & ~inter));
            }
            size = std::ldexp(1.0, static_cast<int>(free));
            log_size = static_cast<double>(free) * std::numbers::ln2;
            break;
        }
        case AttributeKind::Function: {
            const auto v = gather<FunctionValue>(ds, a, members);
            std::vector<double> width(attr.grid.size());
            for (std::size_t j = 0; j < width.size(); ++j) {
                double lo = v[0].samples[j], hi = lo;
                for (const auto& f : v) {
                    lo = std::min(lo, f.samples[j]);
                    hi = std::max(hi, f.samples[j]);
                }
                width[j] = hi - lo;
            }
            size = trapezoid(attr.grid, width);
            log_size = safe_log(size);
            break;
        }
        case AttributeKind::Curve: {
            const auto v = gather<CurveValue>(ds, a, members);
            const auto d = static_cast<std::size_t>(attr.dim);
            std::vector<const double*> verts(v.size());
            for (std::size_t t = 0; t < static_cast<std::size_t>(attr.time_points); ++t) {
                for (std::size_t k = 0; k < v.size(); ++k) verts[k] = v[k].samples.data() + t * d;
                log_size += safe_log(geometry::hull_volume(verts, attr.dim));
            }
            size = std::exp(log_size);
            break;
        }
        }
        out.per_attribute.push_back(size);
        out.per_attribute_log.push_back(log_size);
        out.total *= size;
        out.log_total += log_size;
    }
    return out;
}

bool heterogeneous_inclusion(const Dataset& ds, std::size_t point, std::span<const std::uint32_t> members)
{
    const auto& row = ds.rows[point];
    for (std::size_t a = 0; a < ds.schema.size(); ++a) {
        bool in = false;
        switch (ds.schema[a].kind) {
        case AttributeKind::Scalar:
            in = band_includes_scalar(std::get<double>(row[a]), gather<double>(ds, a, members));
            break;
        case AttributeKind::Point:
            in = band_includes_point(std::get<PointValue>(row[a]), gather<PointValue>(ds, a, members));
            break;
        case AttributeKind::CategoricalSet:
            in = band_includes_set(std::get<CategorySet>(row[a]), gather<CategorySet>(ds, a, members));
            break;
        case AttributeKind::Function:
            in = band_includes_function(std::get<FunctionValue>(row[a]), gather<FunctionValue>(ds, a, members));
            break;
        case AttributeKind::Curve:
            in = band_includes_curve(std::get<CurveValue>(row[a]), gather<CurveValue>(ds, a, members), ds.schema[a].dim);
            break;
        }
        if (!in) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Compiled column store and the band evaluator used by the kernels

CompiledDataset::CompiledDataset(const Dataset& ds) : n_(ds.size())
{
    columns_.reserve(ds.schema.size());
    for (std::size_t a = 0; a < ds.schema.size(); ++a) {
        const auto& attr = ds.schema[a];
        Column col;
        col.kind = attr.kind;
        col.dim = attr.dim;
        col.time_points = attr.time_points;
        col.width = attr.real_width();
        col.grid = attr.grid;
        if (attr.kind == AttributeKind::CategoricalSet) {
            col.set_words = bits::word_count(attr.universe.size());
            col.sets.reserve(n_ * col.set_words);
        } else {
            col.reals.reserve(n_ * col.width);
        }
        for (const auto& row : ds.rows) {
            const auto& v = row[a];
            switch (attr.kind) {
            case AttributeKind::Scalar: col.reals.push_back(std::get<double>(v)); break;
            case AttributeKind::Point: {
                const auto& c = std::get<PointValue>(v).coords;
                col.reals.insert(col.reals.end(), c.begin(), c.end());
                break;
            }
            case AttributeKind::Function: {
                const auto& c = std::get<FunctionValue>(v).samples;
                col.reals.insert(col.reals.end(), c.begin(), c.end());
                break;
            }
            case AttributeKind::Curve: {
                const auto& c = std::get<CurveValue>(v).samples;
                col.reals.insert(col.reals.end(), c.begin(), c.end());
                break;
            }
            case AttributeKind::CategoricalSet: {
                const auto& w = std::get<CategorySet>(v).words;
                col.sets.insert(col.sets.end(), w.begin(), w.end());
                break;
            }
            }
        }
        columns_.push_back(std::move(col));
    }
}

BandEvaluator::BandEvaluator(const CompiledDataset& data) : data_(&data)
{
    const auto& cols = data.columns();
    env_.resize(cols.size());
    sizes_.assign(cols.size(), 0.0);
    logs_.assign(cols.size(), 0.0);
    order_.resize(cols.size());
    for (std::size_t a = 0; a < cols.size(); ++a) {
        order_[a] = a;
        const auto& c = cols[a];
        if (c.kind == AttributeKind::Function) {
            env_[a].lo_f.resize(c.width);
            env_[a].hi_f.resize(c.width);
        } else if (c.kind == AttributeKind::CategoricalSet) {
            env_[a].inter.resize(c.set_words);
            env_[a].uni.resize(c.set_words);
        } else if (c.kind == AttributeKind::Curve) {
            env_[a].hulls.resize(static_cast<std::size_t>(c.time_points));
        }
    }
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t x, std::size_t y) { return kind_cost(cols[x].kind) < kind_cost(cols[y].kind); });
}

void BandEvaluator::prepare(std::span<const std::uint32_t> members)
{
    const auto& cols = data_->columns();
    total_ = 1.0;
    log_total_ = 0.0;
    scratch_.resize(members.size());
    for (std::size_t a = 0; a < cols.size(); ++a) {
        const auto& c = cols[a];
        auto& e = env_[a];
        double size = 0.0, log_size = 0.0;
        switch (c.kind) {
        case AttributeKind::Scalar: {
            e.lo = e.hi = c.reals[members[0]];
            for (auto m : members) {
                e.lo = std::min(e.lo, c.reals[m]);
                e.hi = std::max(e.hi, c.reals[m]);
            }
            size = e.hi - e.lo;
            log_size = safe_log(size);
            break;
        }
        case AttributeKind::Point: {
            for (std::size_t k = 0; k < members.size(); ++k) scratch_[k] = c.row(members[k]);
            e.hull.prepare(scratch_, c.dim);
            size = e.hull.volume();
            log_size = safe_log(size);
            break;
        }
        case AttributeKind::CategoricalSet: {
            std::size_t free = 0;
            for (std::size_t i = 0; i < c.set_words; ++i) {
                bits::Word inter = ~bits::Word{0}, uni = 0;
                for (auto m : members) {
                    inter &= c.set_row(m)[i];
                    uni |= c.set_row(m)[i];
                }
                e.inter[i] = inter;
                e.uni[i] = uni;
                free += static_cast<std::size_t>(std::popcount(uni & ~inter));
            }
            size = std::ldexp(1.0, static_cast<int>(free));
            log_size = static_cast<double>(free) * std::numbers::ln2;
            break;
        }
        case AttributeKind::Function: {
            const double* first = c.row(members[0]);
            std::copy(first, first + c.width, e.lo_f.begin());
            std::copy(first, first + c.width, e.hi_f.begin());
            for (std::size_t k = 1; k < members.size(); ++k) {
                const double* f = c.row(members[k]);
                for (std::size_t j = 0; j < c.width; ++j) {
                    e.lo_f[j] = std::min(e.lo_f[j], f[j]);
                    e.hi_f[j] = std::max(e.hi_f[j], f[j]);
                }
            }
            if (c.width == 1) {
                size = e.hi_f[0] - e.lo_f[0];
            } else {
                for (std::size_t j = 1; j < c.width; ++j)
                    size += 0.5 * ((e.hi_f[j] - e.lo_f[j]) + (e.hi_f[j - 1] - e.lo_f[j - 1])) * (c.grid[j] - c.grid[j - 1]);
            }
            log_size = safe_log(size);
            break;
        }
        case AttributeKind::Curve: {
            const auto d = static_cast<std::size_t>(c.dim);
            for (std::size_t t = 0; t < e.hulls.size(); ++t) {
                for (std::size_t k = 0; k < members.size(); ++k) scratch_[k] = c.row(members[k]) + t * d;
                e.hulls[t].prepare(scratch_, c.dim);
                log_size += safe_log(e.hulls[t].volume());
            }
            size = std::exp(log_size);
            break;
        }
        }
        sizes_[a] = size;
        logs_[a] = log_size;
        total_ *= size;
        log_total_ += log_size;
    }
}

bool BandEvaluator::attribute_includes(std::size_t a, std::size_t i) const
{
    const auto& c = data_->columns()[a];
    const auto& e = env_[a];
    switch (c.kind) {
    case AttributeKind::Scalar: {
        const double v = c.reals[i];
        return e.lo <= v && v <= e.hi;
    }
    case AttributeKind::Point:
        return e.hull.contains(c.row(i));
    case AttributeKind::CategoricalSet: {
        const bits::Word* s = c.set_row(i);
        for (std::size_t w = 0; w < c.set_words; ++w)
            if ((e.inter[w] & ~s[w]) != 0 || (s[w] & ~e.uni[w]) != 0) return false;
        return true;
    }
    case AttributeKind::Function: {
        const double* f = c.row(i);
        for (std::size_t j = 0; j < c.width; ++j)
            if (f[j] < e.lo_f[j] || f[j] > e.hi_f[j]) return false;
        return true;
    }
    case AttributeKind::Curve: {
        const double* p = c.row(i);
        const auto d = static_cast<std::size_t>(c.dim);
        for (std::size_t t = 0; t < e.hulls.size(); ++t)
            if (!e.hulls[t].contains(p + t * d)) return false;
        return true;
    }
    }
    return false;
}

bool BandEvaluator::includes(std::size_t point) const
{
    for (auto a : order_)
        if (!attribute_includes(a, point)) return false;
    return true;
}

} // namespace depthscope

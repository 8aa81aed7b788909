#include "depthscope/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "depthscope/error.hpp"

namespace depthscope {

namespace {

std::string indexed(const char* prefix, std::size_t i, int width = 3)
{
    auto s = std::to_string(i);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return std::string(prefix) + s;
}

void require_n(std::size_t n)
{
    if (n == 0) throw IngestError("synthetic: n must be positive");
    if (n < 3) throw IngestError("synthetic: n must be at least 3");
}

Dataset unimodal(const Unimodal1D& s, std::mt19937_64& rng)
{
    require_n(s.n);
    if (!(s.sd > 0)) throw IngestError("synthetic: sd must be positive");
    Dataset ds;
    ds.id = "unimodal-" + std::to_string(s.n);
    ds.schema = {AttributeSchema::scalar("x")};
    std::normal_distribution<double> normal(s.mean, s.sd);
    for (std::size_t i = 0; i < s.n; ++i) {
        ds.rows.push_back({normal(rng)});
        ds.ground_truth.push_back(0);
    }
    return ds;
}

Dataset bimodal(const Bimodal1D& s, std::mt19937_64& rng)
{
    require_n(s.n);
    if (s.means.empty() || s.sds.empty()) throw IngestError("synthetic: empty mixture");
    if (s.means.size() != 2 || s.sds.size() != 2) throw IngestError("synthetic: bimodal mixture needs exactly two components");
    if (!(s.mixture >= 0.0 && s.mixture <= 1.0)) throw IngestError("synthetic: mixture weight must lie in [0, 1]");
    for (double sd : s.sds)
        if (!(sd > 0)) throw IngestError("synthetic: sd must be positive");

    Dataset ds;
    ds.id = "bimodal-" + std::to_string(s.n);
    ds.schema = {AttributeSchema::scalar("x")};
    std::bernoulli_distribution pick(s.mixture);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        const int mode = pick(rng) ? 1 : 0;
        const double x = s.means[static_cast<std::size_t>(mode)] + s.sds[static_cast<std::size_t>(mode)] * unit(rng);
        ds.rows.push_back({x});
        ds.ground_truth.push_back(mode);
    }
    return ds;
}

Dataset curves(const CurveEnsemble& s, std::mt19937_64& rng)
{
    require_n(s.n);
    if (s.time_points < 2) throw IngestError("synthetic: curves need at least 2 time points");
    if (s.modes == 0) throw IngestError("synthetic: empty mixture");

    const auto T = s.time_points;
    std::vector<double> grid(T);
    for (std::size_t t = 0; t < T; ++t) grid[t] = 6.0 * static_cast<double>(t); // forecast hours

    Dataset ds;
    ds.id = "tracks-" + std::to_string(s.n) + "x" + std::to_string(T);
    ds.schema = {AttributeSchema::curve("track", 2, static_cast<int>(T)), AttributeSchema::function("wind", grid),
                 AttributeSchema::function("pressure", grid)};

    std::normal_distribution<double> unit(0.0, 1.0);
    const double branch = static_cast<double>(T) / 3.0;
    for (std::size_t i = 0; i < s.n; ++i) {
        const std::size_t mode = i % s.modes;
        const double centered = static_cast<double>(mode) - 0.5 * static_cast<double>(s.modes - 1);
        const double ox = unit(rng), oy = unit(rng);
        const double cw = unit(rng), cp = unit(rng);

        CurveValue track;
        FunctionValue wind, pressure;
        track.samples.reserve(2 * T);
        for (std::size_t t = 0; t < T; ++t) {
            const double tt = static_cast<double>(t);
            const double spread = 0.3 + 0.03 * tt;
            const double turn = centered * 0.15 * std::max(0.0, tt - branch);
            const double lon = -75.0 + 0.05 * tt + turn + spread * ox + 0.02 * spread * unit(rng);
            const double lat = 25.0 + 0.3 * tt + spread * oy + 0.02 * spread * unit(rng);
            track.samples.push_back(lon);
            track.samples.push_back(lat);
            const double phase = std::sin(std::numbers::pi * tt / static_cast<double>(T));
            wind.samples.push_back(60.0 + 20.0 * phase + cw * (3.0 + 0.05 * tt) + 0.1 * unit(rng));
            pressure.samples.push_back(980.0 - 15.0 * phase + cp * (2.0 + 0.03 * tt) + 0.1 * unit(rng));
        }
        ds.rows.push_back({std::move(track), std::move(wind), std::move(pressure)});
        ds.labels.push_back(indexed("track-", i, 2));
        ds.ground_truth.push_back(static_cast<int>(mode));
    }
    return ds;
}

Dataset mixed_categorical(const MixedCategorical& s, std::mt19937_64& rng)
{
    require_n(s.n);
    if (s.groups == 0) throw IngestError("synthetic: empty mixture");
    if (s.categorical == 0) throw IngestError("synthetic: mixed table needs at least one categorical attribute");

    Dataset ds;
    ds.id = "mixed-" + std::to_string(s.n);

    // Universe sizes and per-group preferred categories are drawn first so the
    // table layout does not depend on n.
    std::uniform_int_distribution<std::size_t> universe_size(2, 6);
    std::vector<std::size_t> usize(s.categorical);
    std::vector<std::vector<std::size_t>> preferred(s.categorical, std::vector<std::size_t>(s.groups));
    std::vector<double> fidelity(s.categorical);
    for (std::size_t a = 0; a < s.categorical; ++a) {
        usize[a] = universe_size(rng);
        if (a == 0) usize[a] = std::max(usize[a], s.groups);
        std::uniform_int_distribution<std::size_t> pick(0, usize[a] - 1);
        for (std::size_t g = 0; g < s.groups; ++g) preferred[a][g] = a == 0 ? g : pick(rng);
        // attribute 0 tracks the group exactly; the rest are noisy copies
        fidelity[a] = a == 0 ? 1.0 : (a % 2 == 1 ? 0.9 : 0.75);
        std::vector<std::string> universe;
        for (std::size_t c = 0; c < usize[a]; ++c) universe.push_back(std::string(1, static_cast<char>('a' + c)));
        ds.schema.push_back(AttributeSchema::categorical(a == 0 ? "ring-type" : indexed("cat-", a, 2), universe));
    }
    std::vector<std::vector<double>> centers(s.numeric, std::vector<double>(s.groups));
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < s.numeric; ++k) {
        for (std::size_t g = 0; g < s.groups; ++g) centers[k][g] = 5.0 + 3.0 * unit(rng);
        ds.schema.push_back(AttributeSchema::scalar(indexed("num-", k, 2)));
    }

    std::vector<double> group_weights(s.groups);
    for (std::size_t g = 0; g < s.groups; ++g) group_weights[g] = static_cast<double>(s.groups - g) + 1.0;
    std::discrete_distribution<std::size_t> group_of(group_weights.begin(), group_weights.end());
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        const std::size_t g = group_of(rng);
        std::vector<AttributeValue> row;
        for (std::size_t a = 0; a < s.categorical; ++a) {
            auto set = CategorySet::with_universe(usize[a]);
            std::size_t c = preferred[a][g];
            if (u01(rng) >= fidelity[a]) c = std::uniform_int_distribution<std::size_t>(0, usize[a] - 1)(rng);
            set.insert(c);
            row.emplace_back(std::move(set));
        }
        for (std::size_t k = 0; k < s.numeric; ++k) row.emplace_back(centers[k][g] + unit(rng));
        ds.rows.push_back(std::move(row));
        ds.labels.push_back(indexed("m-", i));
        ds.ground_truth.push_back(static_cast<int>(g));
    }
    return ds;
}

Dataset wide_mixed(const WideMixed& s, std::mt19937_64& rng)
{
    require_n(s.n);
    if (s.attributes < 4) throw IngestError("synthetic: wide table needs at least 4 attributes");

    const std::size_t points = std::min<std::size_t>(2, s.attributes / 10);
    const std::size_t functions = std::max<std::size_t>(1, s.attributes * 6 / 53);
    const std::size_t categorical = std::max<std::size_t>(1, s.attributes * 20 / 53);
    const std::size_t scalars = s.attributes - points - functions - categorical;

    std::vector<double> grid(16);
    for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = static_cast<double>(j) / 15.0;

    Dataset ds;
    ds.id = "wide-" + std::to_string(s.n) + "x" + std::to_string(s.attributes);
    for (std::size_t k = 0; k < scalars; ++k) ds.schema.push_back(AttributeSchema::scalar(indexed("s", k, 2)));
    for (std::size_t k = 0; k < categorical; ++k)
        ds.schema.push_back(AttributeSchema::categorical(indexed("c", k, 2), {"a", "b", "c", "d"}));
    for (std::size_t k = 0; k < functions; ++k) ds.schema.push_back(AttributeSchema::function(indexed("f", k, 2), grid));
    for (std::size_t k = 0; k < points; ++k) ds.schema.push_back(AttributeSchema::point(indexed("p", k, 2), 2));

    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        const int g = u01(rng) < 0.5 ? 0 : 1;
        const double shift = g == 0 ? -1.0 : 1.0;
        std::vector<AttributeValue> row;
        for (std::size_t k = 0; k < scalars; ++k) row.emplace_back(shift + unit(rng));
        for (std::size_t k = 0; k < categorical; ++k) {
            auto set = CategorySet::with_universe(4);
            std::size_t c = static_cast<std::size_t>(g);
            if (u01(rng) < 0.3) c = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
            set.insert(c);
            row.emplace_back(std::move(set));
        }
        for (std::size_t k = 0; k < functions; ++k) {
            FunctionValue f;
            const double a = shift + unit(rng), b = unit(rng);
            for (double x : grid) f.samples.push_back(a + b * std::sin(2.0 * std::numbers::pi * x) + 0.05 * unit(rng));
            row.emplace_back(std::move(f));
        }
        for (std::size_t k = 0; k < points; ++k) row.emplace_back(PointValue{{shift + unit(rng), unit(rng)}});
        ds.rows.push_back(std::move(row));
        ds.ground_truth.push_back(g);
    }
    return ds;
}

} // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Dataset ds = std::visit(
        [&](const auto& s) -> Dataset {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Unimodal1D>) return unimodal(s, rng);
            else if constexpr (std::is_same_v<T, Bimodal1D>) return bimodal(s, rng);
            else if constexpr (std::is_same_v<T, CurveEnsemble>) return curves(s, rng);
            else if constexpr (std::is_same_v<T, MixedCategorical>) return mixed_categorical(s, rng);
            else return wide_mixed(s, rng);
        },
        spec);
    ds.id += "-s" + std::to_string(seed);
    validate_dataset(ds);
    return ds;
}

} // namespace depthscope

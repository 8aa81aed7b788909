#include "depthscope/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "depthscope/error.hpp"
#include "depthscope/hashing.hpp"

namespace depthscope {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Runs `f` as pipeline stage `stage`, tagging foreign exceptions and timing it.
template <class F>
auto stage(const char* name, double& ms, F&& f)
{
    const auto t0 = Clock::now();
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            ms = ms_since(t0);
        } else {
            auto r = f();
            ms = ms_since(t0);
            return r;
        }
    } catch (const AnalysisError&) {
        throw;
    } catch (const std::exception& e) {
        throw AnalysisError(name, e.what());
    }
}

std::string fmt_ms(double v)
{
    std::ostringstream s;
    s.precision(v < 10 ? 2 : 1);
    s << std::fixed << v;
    return s.str();
}

std::string default_geo_attribute(const Dataset& ds)
{
    for (const auto& a : ds.schema)
        if ((a.kind == AttributeKind::Point || a.kind == AttributeKind::Curve) && a.dim == 2) return a.name;
    throw AnalysisError("layout", "dataset has no 2D point or curve attribute for a geospatial layout");
}

} // namespace

TauSpec TauSpec::absolute(double v)
{
    if (std::isnan(v) || v < 0.0) throw std::invalid_argument("tau must be nonnegative");
    if (std::isinf(v)) return infinite();
    return {Kind::Absolute, v};
}

TauSpec TauSpec::quantile(double q)
{
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("tau quantile must lie in [0, 1]");
    return {Kind::Quantile, q};
}

TauSpec TauSpec::parse(std::string_view text)
{
    auto number = [](std::string_view s) {
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw std::invalid_argument("malformed tau '" + std::string(s) + "'");
        return v;
    };
    if (text == "inf" || text == "infinity" || text == "Infinity") return infinite();
    if (text.starts_with("q:")) return quantile(number(text.substr(2)));
    return absolute(number(text));
}

std::string TauSpec::to_string() const
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, value);
    const std::string num(buf, r.ptr);
    switch (kind) {
    case Kind::Infinite: return "inf";
    case Kind::Absolute: return num;
    case Kind::Quantile: return "q:" + num;
    }
    return "inf";
}

Tau TauSpec::resolve(const InclusionMatrix& m) const
{
    switch (kind) {
    case Kind::Infinite: return Tau::infinite();
    case Kind::Absolute: return Tau::absolute(value);
    case Kind::Quantile: return tau_at_quantile(m, value);
    }
    return Tau::infinite();
}

std::string StageTimings::summary() const
{
    std::string s = "bands=" + fmt_ms(bands_ms) + "ms inclusion=" + fmt_ms(inclusion_ms) + "ms";
    if (inclusion_cached) s += "(cached)";
    s += " signatures=" + fmt_ms(signatures_ms) + "ms similarity=" + fmt_ms(similarity_ms) +
         "ms spectral=" + fmt_ms(spectral_ms) + "ms stats=" + fmt_ms(stats_ms) + "ms layout=" + fmt_ms(layout_ms) + "ms";
    return s;
}

std::string StageTimings::server_timing() const
{
    std::string s;
    auto add = [&](const char* name, double v) {
        if (!s.empty()) s += ", ";
        s += std::string(name) + ";dur=" + fmt_ms(v);
    };
    if (!inclusion_cached) {
        add("bands", bands_ms);
        add("inclusion", inclusion_ms);
    }
    add("signatures", signatures_ms);
    add("similarity", similarity_ms);
    add("spectral", spectral_ms);
    add("stats", stats_ms);
    add("layout", layout_ms);
    return s;
}

std::string content_hash(const Dataset& dataset) { return sha256_hex(serialize_dataset(dataset)); }

AnalysisSnapshot make_snapshot(const PreparedDataset& p, const AnalysisConfig& config)
{
    AnalysisSnapshot s;
    const auto& m = p.matrix;
    s.dataset_id = p.dataset.id;
    s.content_hash = p.content_hash;
    s.cache_key = p.key;
    s.n = m.n;
    s.band_count = m.band_count;
    s.subset_size = p.plan.subset_size;
    s.enumeration = p.plan.enumeration;
    s.budget = p.plan.budget;
    s.plan_seed = p.plan.seed;
    s.config = config;
    s.tau_spec = config.tau;
    s.labels = p.dataset.labels;
    for (const auto& a : p.dataset.schema) s.attributes.emplace_back(a.name, a.kind);
    s.timings.bands_ms = p.bands_ms;
    s.timings.inclusion_ms = p.inclusion_ms;

    BandMask mask;
    stage("signatures", s.timings.signatures_ms, [&] {
        s.tau = config.tau.resolve(m);
        mask = mask_by_tau(m, s.tau);
        s.unmasked = mask.unmasked;
        s.depths = depth_values(m, mask);
        s.signature_counts = signature_counts(m, mask);
    });

    DenseMatrix S;
    stage("similarity", s.timings.similarity_ms, [&] {
        s.similarity = similarity_matrix(m, mask, config.similarity, config.backend);
        S = DenseMatrix(s.n, s.similarity.values);
    });

    stage("spectral", s.timings.spectral_ms, [&] {
        SpectralOptions opt;
        opt.k = config.k;
        opt.seed = config.seed;
        s.spectral = spectral_analysis(S, opt);
    });

    stage("stats", s.timings.stats_ms, [&] {
        s.coloring = color_bins(s.depths);
        s.outliers = tukey_outliers(s.depths);
        s.histogram = band_size_histogram(m.band_sizes, m.log_band_sizes, config.histogram_bins, config.histogram_log);
        s.summaries = attribute_summaries(p.dataset, s.coloring, s.spectral.labels, s.spectral.cluster_count);
    });

    stage("layout", s.timings.layout_ms, [&] {
        if (config.layout == LayoutMode::Geospatial) {
            s.layout = geospatial_positions(
                p.dataset, config.geo_attribute.empty() ? default_geo_attribute(p.dataset) : config.geo_attribute);
            return;
        }
        ForceLayoutOptions opt;
        opt.seed = config.seed;
        opt.iterations = config.layout_iterations;
        s.layout = force_layout(S, opt);
        // Collision pass on the main layout only; boundary outliers keep their band.
        std::vector<bool> outlier(s.n, false);
        for (auto i : s.layout.outliers) outlier[i] = true;
        std::vector<std::size_t> main;
        std::vector<Vec2> pos;
        for (std::size_t i = 0; i < s.n; ++i) {
            if (outlier[i]) continue;
            main.push_back(i);
            pos.push_back(s.layout.positions[i]);
        }
        if (pos.size() >= 2) {
            const auto rep = resolve_collisions(pos, default_node_radius(s.n), config.seed);
            s.layout.collision_passes = rep.passes;
            s.layout.remaining_overlaps = rep.remaining_overlaps;
            for (std::size_t k = 0; k < main.size(); ++k) s.layout.positions[main[k]] = pos[k];
        }
    });
    return s;
}

nlohmann::json AnalysisSnapshot::to_json() const
{
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& [name, kind] : attributes) attrs.push_back({{"name", name}, {"kind", depthscope::to_string(kind)}});
    nlohmann::json summ = nlohmann::json::array();
    for (const auto& a : summaries) summ.push_back(depthscope::to_json(a));

    auto tau_json = tau_to_json(tau);
    tau_json["spec"] = tau_spec.to_string();
    tau_json["unmaskedBands"] = unmasked;

    return {{"schema", kSnapshotSchema},
            {"dataset",
             {{"id", dataset_id},
              {"contentHash", content_hash},
              {"n", n},
              {"labels", labels},
              {"attributes", std::move(attrs)}}},
            {"plan",
             {{"cacheKey", cache_key},
              {"subsetSize", subset_size},
              {"bandCount", band_count},
              {"enumeration", enumeration == Enumeration::Exhaustive ? "exhaustive" : "sampled"},
              {"budget", budget},
              {"seed", plan_seed}}},
            {"config",
             {{"k", config.k ? nlohmann::json(*config.k) : nlohmann::json(nullptr)},
              {"seed", config.seed},
              {"similarity", depthscope::to_string(config.similarity)},
              {"layoutIterations", config.layout_iterations}}},
            {"tau", std::move(tau_json)},
            {"depths", depths},
            {"signatureCounts", signature_counts},
            {"coloring", depthscope::to_json(coloring)},
            {"outliers", depthscope::to_json(outliers)},
            {"similarity", similarity_to_json(similarity, spectral.order)},
            {"spectral", depthscope::to_json(spectral)},
            {"layout", depthscope::to_json(layout)},
            {"histogram", depthscope::to_json(histogram)},
            {"summaries", std::move(summ)}};
}

std::string AnalysisSnapshot::serialize() const { return to_json().dump(); }

Analyzer::Analyzer(std::optional<std::filesystem::path> cache_dir, BuildOptions build)
    : cache_dir_(std::move(cache_dir)), build_(std::move(build))
{
}

std::string Analyzer::cache_key(const std::string& hash, std::optional<std::size_t> budget, std::uint64_t seed)
{
    return hash.substr(0, 32) + "-b" + std::to_string(budget.value_or(kDefaultBandBudget)) + "-s" + std::to_string(seed);
}

std::shared_ptr<const PreparedDataset> Analyzer::find(const std::string& key)
{
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto loaded = load_from_disk(key);
    if (loaded) {
        std::unique_lock lock(mutex_);
        cache_.emplace(key, loaded);
    }
    return loaded;
}

std::shared_ptr<const PreparedDataset> Analyzer::prepare(const Dataset& dataset, std::optional<std::size_t> budget,
                                                         std::uint64_t seed, const std::function<void(double)>& progress)
{
    const auto hash = content_hash(dataset);
    const auto key = cache_key(hash, budget, seed);
    if (auto hit = find(key)) {
        if (progress) progress(1.0);
        return hit;
    }

    auto p = std::make_shared<PreparedDataset>();
    p->key = key;
    p->content_hash = hash;
    p->dataset = dataset;
    p->plan = stage("bands", p->bands_ms, [&] { return plan_bands(dataset, budget, seed); });
    BuildOptions opt = build_;
    if (progress) opt.progress = progress;
    p->matrix = stage("inclusion", p->inclusion_ms, [&] { return build_inclusion_matrix(dataset, p->plan, opt); });
    if (progress) progress(1.0);
    store_on_disk(*p);

    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.emplace(key, std::move(p));
    return it->second;
}

AnalysisSnapshot Analyzer::analyze(const Dataset& dataset, const AnalysisConfig& config)
{
    const auto p = prepare(dataset, config.budget, config.seed);
    auto snap = make_snapshot(*p, config);
    return snap;
}

AnalysisSnapshot Analyzer::retune(const std::string& key, const TauSpec& tau, const AnalysisConfig& config)
{
    const auto p = find(key);
    if (!p) throw AnalysisError("pipeline", "no cached inclusion matrix for key '" + key + "'");
    AnalysisConfig c = config;
    c.tau = tau;
    auto snap = make_snapshot(*p, c);
    snap.timings.inclusion_cached = true;
    snap.timings.bands_ms = snap.timings.inclusion_ms = 0.0;
    return snap;
}

std::size_t Analyzer::cached_count() const
{
    std::shared_lock lock(mutex_);
    return cache_.size();
}

std::shared_ptr<const PreparedDataset> Analyzer::load_from_disk(const std::string& key)
{
    if (!cache_dir_) return nullptr;
    const auto dir = *cache_dir_ / key;
    if (!std::filesystem::exists(dir / "matrix.dsim") || !std::filesystem::exists(dir / "dataset.json")) return nullptr;
    try {
        auto p = std::make_shared<PreparedDataset>();
        p->key = key;
        p->dataset = load_dataset(dir / "dataset.json");
        p->content_hash = content_hash(p->dataset);
        auto [m, plan] = load_inclusion_matrix(dir / "matrix.dsim");
        if (m.n != p->dataset.size()) return nullptr;
        p->matrix = std::move(m);
        p->plan = std::move(plan);
        return p;
    } catch (const std::exception&) {
        return nullptr; // a corrupt cache entry is rebuilt
    }
}

void Analyzer::store_on_disk(const PreparedDataset& p)
{
    if (!cache_dir_) return;
    namespace fs = std::filesystem;
    const auto dir = *cache_dir_ / p.key;
    // Written under a private name and renamed, so readers never see half an entry.
    const auto tmp = *cache_dir_ / (p.key + ".tmp-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    std::error_code ec;
    fs::create_directories(tmp, ec);
    if (ec) return;
    try {
        save_dataset(p.dataset, tmp / "dataset.json");
        save_inclusion_matrix(p.matrix, p.plan, tmp / "matrix.dsim");
        fs::rename(tmp, dir, ec);
    } catch (const std::exception&) {
        ec = std::make_error_code(std::errc::io_error);
    }
    if (ec) fs::remove_all(tmp, ec);
}

} // namespace depthscope

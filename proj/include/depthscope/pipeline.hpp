#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "depthscope/bands.hpp"
#include "depthscope/dataset.hpp"
#include "depthscope/layout.hpp"
#include "depthscope/signatures.hpp"
#include "depthscope/similarity.hpp"
#include "depthscope/spectral.hpp"
#include "depthscope/stats.hpp"

namespace depthscope {

inline constexpr std::string_view kSnapshotSchema = "depthscope.snapshot/1";

/// Threshold as requested: unrestricted, an absolute band size, or a band-size quantile.
struct TauSpec {
    enum class Kind { Infinite, Absolute, Quantile };
    Kind kind = Kind::Infinite;
    double value = 0.0;

    static TauSpec infinite() { return {}; }
    static TauSpec absolute(double v);
    static TauSpec quantile(double q);
    /// "inf", a nonnegative number, or "q:<0..1>". Throws std::invalid_argument.
    static TauSpec parse(std::string_view text);

    std::string to_string() const;
    Tau resolve(const InclusionMatrix& m) const;
    bool operator==(const TauSpec&) const = default;
};

struct AnalysisConfig {
    std::optional<std::size_t> budget;
    std::uint64_t seed = 0; // band sampling, k-means and layout
    TauSpec tau;
    std::optional<std::size_t> k;
    SimilarityMode similarity = SimilarityMode::Hamming;
    LayoutMode layout = LayoutMode::ForceDirected;
    std::string geo_attribute; // empty: first 2D point or curve attribute
    int layout_iterations = 500;
    std::size_t histogram_bins = kDefaultHistogramBins;
    bool histogram_log = false;
    Backend backend = Backend::OpenMP;
};

struct StageTimings {
    double bands_ms = 0.0, inclusion_ms = 0.0, signatures_ms = 0.0, similarity_ms = 0.0, spectral_ms = 0.0,
           stats_ms = 0.0, layout_ms = 0.0;
    bool inclusion_cached = false;

    /// "bands=..ms inclusion=..ms ..." for log lines.
    std::string summary() const;
    /// Value for an HTTP Server-Timing header.
    std::string server_timing() const;
};

/// The tau-independent part of an analysis: dataset, band plan, inclusion matrix.
struct PreparedDataset {
    std::string key;
    std::string content_hash;
    Dataset dataset;
    BandPlan plan;
    InclusionMatrix matrix;
    double bands_ms = 0.0;
    double inclusion_ms = 0.0;
};

struct AnalysisSnapshot {
    std::string dataset_id;
    std::string content_hash;
    std::string cache_key;
    std::size_t n = 0;
    std::size_t band_count = 0;
    std::size_t subset_size = 0;
    Enumeration enumeration = Enumeration::Exhaustive;
    std::size_t budget = 0;
    std::uint64_t plan_seed = 0;
    AnalysisConfig config;

    TauSpec tau_spec;
    Tau tau;
    std::size_t unmasked = 0;
    std::vector<std::size_t> signature_counts;
    std::vector<double> depths;
    DepthColoring coloring;
    OutlierFlags outliers;
    SimilarityMatrix similarity;
    SpectralResult spectral;
    LayoutResult layout;
    Histogram histogram;
    std::vector<AttributeSummary> summaries;
    std::vector<std::string> labels;
    std::vector<std::pair<std::string, AttributeKind>> attributes;

    /// Not serialized, so snapshot JSON stays byte-identical across runs.
    StageTimings timings;

    nlohmann::json to_json() const;
    std::string serialize() const;
};

/// Dataset content hash: SHA-256 of the canonical serialization.
std::string content_hash(const Dataset& dataset);

/// Runs the per-tau stages on a prepared dataset.
AnalysisSnapshot make_snapshot(const PreparedDataset& prepared, const AnalysisConfig& config);

/// Caches prepared datasets in memory (and optionally on disk) by
/// (content hash, budget, seed). Safe for concurrent use.
class Analyzer {
public:
    explicit Analyzer(std::optional<std::filesystem::path> cache_dir = std::nullopt, BuildOptions build = {});

    static std::string cache_key(const std::string& content_hash, std::optional<std::size_t> budget, std::uint64_t seed);

    std::shared_ptr<const PreparedDataset> prepare(const Dataset& dataset, std::optional<std::size_t> budget,
                                                   std::uint64_t seed, const std::function<void(double)>& progress = {});
    std::shared_ptr<const PreparedDataset> find(const std::string& key);

    AnalysisSnapshot analyze(const Dataset& dataset, const AnalysisConfig& config);
    /// Per-tau stages only. Throws AnalysisError("pipeline", ...) if the key is in neither cache.
    AnalysisSnapshot retune(const std::string& key, const TauSpec& tau, const AnalysisConfig& config);

    std::size_t cached_count() const;

private:
    std::shared_ptr<const PreparedDataset> load_from_disk(const std::string& key);
    void store_on_disk(const PreparedDataset& p);

    std::optional<std::filesystem::path> cache_dir_;
    BuildOptions build_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const PreparedDataset>> cache_;
};

} // namespace depthscope

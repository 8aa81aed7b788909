#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthscope/dataset.hpp"

namespace depthscope {

/// Linear-interpolation quantile at position (n-1)p of the sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

/// Spearman rank correlation using average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);
std::vector<double> average_ranks(std::span<const double> values);

inline constexpr std::size_t kColorBins = 4;

struct DepthColoring {
    std::vector<int> bin;            // 0 = deepest 20%
    std::array<std::size_t, 3> cuts; // rank cut positions
    std::array<double, 3> thresholds; // depth of the last datapoint inside bins 0..2
};

/// Rank by depth descending (ties by index) and cut at ceil(.2n), ceil(.4n), ceil(.8n).
DepthColoring color_bins(std::span<const double> depths);

struct OutlierFlags {
    std::vector<bool> is_outlier;
    double q1 = 0.0, q3 = 0.0, lower_fence = 0.0;
    std::size_t count = 0;
};

/// Flags depth < Q1 - 1.5 IQR, and every zero depth.
OutlierFlags tukey_outliers(std::span<const double> depths);

struct Histogram {
    bool log_scale = false;
    std::vector<double> edges; // bins + 1 values, in size units
    std::vector<std::size_t> counts;
    double min = 0.0, max = 0.0;
    std::size_t zero_sized = 0; // bands of size 0 (all land in the first bin)
    std::vector<double> snap_quantiles;
    std::vector<double> snap_values; // band size at each snap quantile
};

inline constexpr std::size_t kDefaultHistogramBins = 50;

/// Equal-width bins over [min, max], or over log sizes when `log_scale`.
/// Snap values use the same rank rule as tau quantiles.
Histogram band_size_histogram(std::span<const double> sizes, std::span<const double> log_sizes,
                              std::size_t bins = kDefaultHistogramBins, bool log_scale = false);

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

FiveNumber five_number(std::vector<double> values);

struct CategoryCounts {
    std::string category;
    std::array<std::size_t, kColorBins> by_bin{};
    std::vector<std::size_t> by_cluster;
    std::vector<std::size_t> holders; // datapoints holding the category
};

struct AttributeSummary {
    std::string name;
    AttributeKind kind = AttributeKind::Scalar;
    std::vector<CategoryCounts> categories; // categorical
    FiveNumber five;                       // scalar
    std::vector<std::size_t> outliers;      // scalar values beyond the Tukey fences
    /// Point: one entry per coordinate. Function: one per grid sample.
    /// Curve: time-major, dim entries per time point.
    std::vector<FiveNumber> pointwise;
    std::size_t dim = 1;
};

std::vector<AttributeSummary> attribute_summaries(const Dataset& dataset, const DepthColoring& coloring,
                                                  std::span<const int> labels, std::size_t cluster_count);

nlohmann::json to_json(const DepthColoring& c);
nlohmann::json to_json(const OutlierFlags& f);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const FiveNumber& f);
nlohmann::json to_json(const AttributeSummary& s);

} // namespace depthscope

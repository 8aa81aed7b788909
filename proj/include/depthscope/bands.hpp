#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "depthscope/dataset.hpp"
#include "depthscope/geometry.hpp"

namespace depthscope {

inline constexpr std::size_t kDefaultBandBudget = 200'000;

enum class Enumeration { Exhaustive, Sampled };

/// The ordered list of random bands (datapoint subsets) a signature indexes.
struct BandPlan {
    std::size_t n = 0;
    std::size_t subset_size = 2;
    Enumeration enumeration = Enumeration::Exhaustive;
    std::size_t budget = kDefaultBandBudget;
    std::uint64_t seed = 0;
    /// band_count() rows of subset_size sorted indices, rows in lexicographic order.
    std::vector<std::uint32_t> members;

    std::size_t band_count() const { return subset_size == 0 ? 0 : members.size() / subset_size; }
    std::span<const std::uint32_t> band(std::size_t b) const
    {
        return {members.data() + b * subset_size, subset_size};
    }
    bool operator==(const BandPlan&) const = default;
};

/// Saturating binomial coefficient.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// r = max over attributes of the minimal band cardinality.
std::size_t band_subset_size(std::span<const AttributeSchema> schema);

BandPlan plan_bands(std::size_t n, std::size_t subset_size, std::optional<std::size_t> budget, std::uint64_t seed);
BandPlan plan_bands(const Dataset& dataset, std::optional<std::size_t> budget, std::uint64_t seed);

nlohmann::json to_json(const BandPlan& plan);
BandPlan band_plan_from_json(const nlohmann::json& doc);

// Per-datatype inclusion tests. All use closed boundaries.

bool band_includes_scalar(double v, std::span<const double> members);
bool band_includes_point(const PointValue& p, std::span<const PointValue> members);
bool band_includes_set(const CategorySet& s, std::span<const CategorySet> members);
bool band_includes_function(const FunctionValue& f, std::span<const FunctionValue> members);
bool band_includes_curve(const CurveValue& c, std::span<const CurveValue> members, int dim);

struct BandSize {
    std::vector<double> per_attribute;
    std::vector<double> per_attribute_log;
    double total = 0.0;
    /// Natural log of total, -inf for empty bands; finite even when total under/overflows.
    double log_total = 0.0;
};

/// Sizes of the band spanned by `members` (indices into `dataset.rows`).
BandSize band_size(const Dataset& dataset, std::span<const std::uint32_t> members);

/// Conjunction of per-attribute inclusion of `point` in the band of `members`.
bool heterogeneous_inclusion(const Dataset& dataset, std::size_t point, std::span<const std::uint32_t> members);

/// Column-major copy of a dataset laid out for the inclusion kernels.
class CompiledDataset {
public:
    struct Column {
        AttributeKind kind = AttributeKind::Scalar;
        int dim = 1;
        int time_points = 0;
        std::size_t width = 0;     // reals per row
        std::size_t set_words = 0; // words per row for sets
        std::vector<double> reals;
        std::vector<bits::Word> sets;
        std::vector<double> grid;

        const double* row(std::size_t i) const { return reals.data() + i * width; }
        const bits::Word* set_row(std::size_t i) const { return sets.data() + i * set_words; }
    };

    explicit CompiledDataset(const Dataset& dataset);

    std::size_t size() const { return n_; }
    const std::vector<Column>& columns() const { return columns_; }

private:
    std::size_t n_ = 0;
    std::vector<Column> columns_;
};

/// Scratch state for evaluating one band at a time against every datapoint.
/// Not thread-safe; use one evaluator per thread.
class BandEvaluator {
public:
    explicit BandEvaluator(const CompiledDataset& data);

    void prepare(std::span<const std::uint32_t> members);
    bool includes(std::size_t point) const;

    double total_size() const { return total_; }
    double log_size() const { return log_total_; }
    std::span<const double> attribute_sizes() const { return sizes_; }

private:
    struct Envelope {
        double lo = 0.0, hi = 0.0;
        std::vector<double> lo_f, hi_f;
        std::vector<bits::Word> inter, uni;
        geometry::PreparedHull hull;
        std::vector<geometry::PreparedHull> hulls;
    };

    bool attribute_includes(std::size_t a, std::size_t point) const;

    const CompiledDataset* data_;
    std::vector<Envelope> env_;
    std::vector<std::size_t> order_; // attribute evaluation order, cheapest first
    std::vector<const double*> scratch_;
    std::vector<double> sizes_, logs_;
    double total_ = 0.0, log_total_ = 0.0;
};

} // namespace depthscope

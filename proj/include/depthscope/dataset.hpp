#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "depthscope/bits.hpp"

namespace depthscope {

enum class AttributeKind { Scalar, Point, CategoricalSet, Function, Curve };

std::string_view to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(std::string_view s);

/// Type description of one column of a heterogeneous dataset.
///
/// Only the fields relevant to `kind` are meaningful: `dim` for points and
/// curves, `universe` for categorical sets, `grid` for functions and
/// `time_points` for curves.
struct AttributeSchema {
    std::string name;
    AttributeKind kind = AttributeKind::Scalar;
    int dim = 1;
    std::vector<std::string> universe;
    std::vector<double> grid;
    int time_points = 0;

    static AttributeSchema scalar(std::string name);
    static AttributeSchema point(std::string name, int dim);
    static AttributeSchema categorical(std::string name, std::vector<std::string> universe);
    static AttributeSchema function(std::string name, std::vector<double> grid);
    static AttributeSchema curve(std::string name, int dim, int time_points);

    /// Smallest number of generators that spans a non-degenerate band for this kind.
    std::size_t min_band_cardinality() const;

    /// Number of reals one value of this attribute occupies (0 for sets).
    std::size_t real_width() const;

    /// Index of `label` in the universe, or nullopt.
    std::optional<std::size_t> category_index(std::string_view label) const;

    bool operator==(const AttributeSchema&) const = default;
};

struct PointValue {
    std::vector<double> coords;
    bool operator==(const PointValue&) const = default;
};

/// Subset of an attribute's universe, one bit per universe entry.
struct CategorySet {
    std::vector<bits::Word> words;

    static CategorySet with_universe(std::size_t universe_size);
    bool contains(std::size_t category) const;
    void insert(std::size_t category);
    std::size_t size() const;
    bool operator==(const CategorySet&) const = default;
};

struct FunctionValue {
    std::vector<double> samples;
    bool operator==(const FunctionValue&) const = default;
};

/// Curve samples, time-major: samples[t * dim + c].
struct CurveValue {
    std::vector<double> samples;
    bool operator==(const CurveValue&) const = default;
};

using AttributeValue = std::variant<double, PointValue, CategorySet, FunctionValue, CurveValue>;

struct Dataset {
    std::string id;
    std::vector<AttributeSchema> schema;
    std::vector<std::vector<AttributeValue>> rows;
    std::vector<std::string> labels;
    /// Generator mode labels; metadata only, never an attribute.
    std::vector<int> ground_truth;

    std::size_t size() const { return rows.size(); }
    std::size_t attribute_index(std::string_view name) const;

    bool operator==(const Dataset&) const = default;
};

/// Throws IngestError describing the first violated invariant.
void validate_schema(const AttributeSchema& schema);
void validate_dataset(const Dataset& dataset);

enum class DataFormat { JsonV1, CsvWithSchema };

/// Parses a dataset. For CsvWithSchema, `sidecar_schema` holds the JSON schema
/// document (`{"schema": [...], "labelColumn": "..."}`).
Dataset parse_dataset(std::string_view bytes, DataFormat format, std::string_view sidecar_schema = {});
Dataset dataset_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Dataset& dataset);
std::string serialize_dataset(const Dataset& dataset);

/// Loads `.json` directly, or `.csv` together with `<stem>.schema.json`.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Seeded uniform subset of `count` rows without replacement, original order kept.
Dataset subsample_rows(const Dataset& dataset, std::size_t count, std::uint64_t seed);

} // namespace depthscope

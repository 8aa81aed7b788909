#include "depthscope/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "depthscope/error.hpp"

namespace depthscope {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw IngestError(msg); }

std::string where(std::size_t row, const AttributeSchema& a)
{
    return "row " + std::to_string(row) + ", attribute '" + a.name + "'";
}

double finite_number(const json& v, const std::string& ctx)
{
    if (v.is_null()) fail(ctx + ": missing value");
    if (!v.is_number()) fail(ctx + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ctx + ": non-finite value");
    return d;
}

std::vector<double> number_array(const json& v, std::size_t expected, const std::string& ctx)
{
    if (v.is_null()) fail(ctx + ": missing value");
    if (!v.is_array()) fail(ctx + ": expected an array");
    if (v.size() != expected)
        fail(ctx + ": ragged samples (expected " + std::to_string(expected) + ", got " + std::to_string(v.size()) + ")");
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& x : v) out.push_back(finite_number(x, ctx));
    return out;
}

CategorySet category_set(const AttributeSchema& a, const std::vector<std::string>& labels, const std::string& ctx)
{
    auto set = CategorySet::with_universe(a.universe.size());
    for (const auto& label : labels) {
        auto idx = a.category_index(label);
        if (!idx) fail(ctx + ": unknown category '" + label + "'");
        set.insert(*idx);
    }
    return set;
}

AttributeValue parse_cell(const json& v, const AttributeSchema& a, const std::string& ctx)
{
    switch (a.kind) {
    case AttributeKind::Scalar:
        return finite_number(v, ctx);
    case AttributeKind::Point:
        return PointValue{number_array(v, static_cast<std::size_t>(a.dim), ctx)};
    case AttributeKind::Function:
        return FunctionValue{number_array(v, a.grid.size(), ctx)};
    case AttributeKind::CategoricalSet: {
        if (v.is_null()) fail(ctx + ": missing value");
        std::vector<std::string> labels;
        if (v.is_string()) {
            labels.push_back(v.get<std::string>());
        } else if (v.is_array()) {
            for (const auto& x : v) {
                if (!x.is_string()) fail(ctx + ": category labels must be strings");
                labels.push_back(x.get<std::string>());
            }
        } else {
            fail(ctx + ": expected a category label or list of labels");
        }
        return category_set(a, labels, ctx);
    }
    case AttributeKind::Curve: {
        if (v.is_null()) fail(ctx + ": missing value");
        if (!v.is_array()) fail(ctx + ": expected an array of time samples");
        const auto tp = static_cast<std::size_t>(a.time_points);
        if (v.size() != tp)
            fail(ctx + ": ragged samples (expected " + std::to_string(tp) + " time points, got " +
                 std::to_string(v.size()) + ")");
        CurveValue c;
        c.samples.reserve(tp * static_cast<std::size_t>(a.dim));
        for (const auto& t : v) {
            auto xs = number_array(t, static_cast<std::size_t>(a.dim), ctx);
            c.samples.insert(c.samples.end(), xs.begin(), xs.end());
        }
        return c;
    }
    }
    fail(ctx + ": unsupported attribute kind");
}

AttributeSchema schema_from_json(const json& j)
{
    if (!j.is_object()) fail("schema entry must be an object");
    AttributeSchema a;
    a.name = j.value("name", "");
    a.kind = attribute_kind_from_string(j.value("kind", ""));
    switch (a.kind) {
    case AttributeKind::Scalar:
        break;
    case AttributeKind::Point:
        a.dim = j.value("dim", 0);
        break;
    case AttributeKind::CategoricalSet:
        if (!j.contains("universe") || !j["universe"].is_array()) fail("attribute '" + a.name + "': missing universe");
        for (const auto& u : j["universe"]) {
            if (!u.is_string()) fail("attribute '" + a.name + "': universe labels must be strings");
            a.universe.push_back(u.get<std::string>());
        }
        break;
    case AttributeKind::Function:
        if (!j.contains("grid") || !j["grid"].is_array()) fail("attribute '" + a.name + "': missing grid");
        a.grid = number_array(j["grid"], j["grid"].size(), "attribute '" + a.name + "' grid");
        break;
    case AttributeKind::Curve:
        a.dim = j.value("dim", 0);
        a.time_points = j.value("timePoints", 0);
        break;
    }
    validate_schema(a);
    return a;
}

json schema_to_json(const AttributeSchema& a)
{
    json j = {{"name", a.name}, {"kind", std::string(to_string(a.kind))}};
    switch (a.kind) {
    case AttributeKind::Scalar: break;
    case AttributeKind::Point: j["dim"] = a.dim; break;
    case AttributeKind::CategoricalSet: j["universe"] = a.universe; break;
    case AttributeKind::Function: j["grid"] = a.grid; break;
    case AttributeKind::Curve:
        j["dim"] = a.dim;
        j["timePoints"] = a.time_points;
        break;
    }
    return j;
}

json cell_to_json(const AttributeValue& v, const AttributeSchema& a)
{
    switch (a.kind) {
    case AttributeKind::Scalar: return std::get<double>(v);
    case AttributeKind::Point: return std::get<PointValue>(v).coords;
    case AttributeKind::Function: return std::get<FunctionValue>(v).samples;
    case AttributeKind::CategoricalSet: {
        const auto& s = std::get<CategorySet>(v);
        json arr = json::array();
        for (std::size_t c = 0; c < a.universe.size(); ++c)
            if (s.contains(c)) arr.push_back(a.universe[c]);
        return arr;
    }
    case AttributeKind::Curve: {
        const auto& c = std::get<CurveValue>(v);
        json arr = json::array();
        const auto d = static_cast<std::size_t>(a.dim);
        for (std::size_t t = 0; t < static_cast<std::size_t>(a.time_points); ++t)
            arr.push_back(std::vector<double>(c.samples.begin() + static_cast<std::ptrdiff_t>(t * d),
                                              c.samples.begin() + static_cast<std::ptrdiff_t>((t + 1) * d)));
        return arr;
    }
    }
    return nullptr;
}

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF.
std::vector<std::vector<std::string>> read_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            quoted = true;
            any = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            any = true;
            break;
        case '\r':
            break;
        case '\n':
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
            break;
        default:
            field.push_back(ch);
            any = true;
        }
    }
    if (quoted) fail("csv: unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

Dataset parse_csv(std::string_view bytes, std::string_view sidecar)
{
    if (sidecar.empty()) fail("csv input requires a sidecar schema");
    json side;
    try {
        side = json::parse(sidecar);
    } catch (const json::parse_error& e) {
        fail(std::string("sidecar schema: ") + e.what());
    }
    if (!side.contains("schema") || !side["schema"].is_array()) fail("sidecar schema: missing 'schema' array");

    Dataset ds;
    for (const auto& s : side["schema"]) ds.schema.push_back(schema_from_json(s));
    ds.id = side.value("id", "");
    const std::string label_column = side.value("labelColumn", "");
    for (const auto& a : ds.schema)
        if (a.kind != AttributeKind::Scalar && a.kind != AttributeKind::CategoricalSet)
            fail("attribute '" + a.name + "': " + std::string(to_string(a.kind)) + " values are not representable in csv");

    auto table = read_csv(bytes);
    if (table.empty()) fail("csv: missing header row");
    const auto& header = table.front();

    std::vector<std::ptrdiff_t> column_of(ds.schema.size(), -1);
    std::ptrdiff_t label_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = trim(header[c]);
        if (!label_column.empty() && name == label_column) {
            label_col = static_cast<std::ptrdiff_t>(c);
            continue;
        }
        auto it = std::find_if(ds.schema.begin(), ds.schema.end(), [&](const auto& a) { return a.name == name; });
        if (it == ds.schema.end()) fail("csv: column '" + name + "' is not in the schema");
        column_of[static_cast<std::size_t>(it - ds.schema.begin())] = static_cast<std::ptrdiff_t>(c);
    }
    for (std::size_t a = 0; a < ds.schema.size(); ++a)
        if (column_of[a] < 0) fail("csv: schema attribute '" + ds.schema[a].name + "' has no column");

    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& cells = table[r];
        const std::size_t row = r - 1;
        if (cells.size() != header.size())
            fail("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(cells.size()));
        std::vector<AttributeValue> values;
        values.reserve(ds.schema.size());
        for (std::size_t a = 0; a < ds.schema.size(); ++a) {
            const auto& attr = ds.schema[a];
            const auto cell = trim(cells[static_cast<std::size_t>(column_of[a])]);
            const auto ctx = where(row, attr);
            if (cell.empty()) fail(ctx + ": missing value");
            if (attr.kind == AttributeKind::Scalar) {
                double v = 0;
                std::size_t used = 0;
                try {
                    v = std::stod(cell, &used);
                } catch (const std::exception&) {
                    fail(ctx + ": expected a number, got '" + cell + "'");
                }
                if (used != cell.size()) fail(ctx + ": expected a number, got '" + cell + "'");
                if (!std::isfinite(v)) fail(ctx + ": non-finite value");
                values.emplace_back(v);
            } else {
                std::vector<std::string> labels;
                std::stringstream ss(cell);
                std::string part;
                while (std::getline(ss, part, ';')) labels.push_back(trim(part));
                values.emplace_back(category_set(attr, labels, ctx));
            }
        }
        ds.rows.push_back(std::move(values));
        if (label_col >= 0) ds.labels.push_back(cells[static_cast<std::size_t>(label_col)]);
    }
    validate_dataset(ds);
    return ds;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view to_string(AttributeKind kind)
{
    switch (kind) {
    case AttributeKind::Scalar: return "scalar";
    case AttributeKind::Point: return "point";
    case AttributeKind::CategoricalSet: return "categorical";
    case AttributeKind::Function: return "function";
    case AttributeKind::Curve: return "curve";
    }
    return "unknown";
}

AttributeKind attribute_kind_from_string(std::string_view s)
{
    if (s == "scalar") return AttributeKind::Scalar;
    if (s == "point") return AttributeKind::Point;
    if (s == "categorical" || s == "set") return AttributeKind::CategoricalSet;
    if (s == "function") return AttributeKind::Function;
    if (s == "curve") return AttributeKind::Curve;
    fail("unknown attribute kind '" + std::string(s) + "'");
}

AttributeSchema AttributeSchema::scalar(std::string name) { return {std::move(name), AttributeKind::Scalar, 1, {}, {}, 0}; }

AttributeSchema AttributeSchema::point(std::string name, int dim)
{
    return {std::move(name), AttributeKind::Point, dim, {}, {}, 0};
}

AttributeSchema AttributeSchema::categorical(std::string name, std::vector<std::string> universe)
{
    return {std::move(name), AttributeKind::CategoricalSet, 1, std::move(universe), {}, 0};
}

AttributeSchema AttributeSchema::function(std::string name, std::vector<double> grid)
{
    return {std::move(name), AttributeKind::Function, 1, {}, std::move(grid), 0};
}

AttributeSchema AttributeSchema::curve(std::string name, int dim, int time_points)
{
    return {std::move(name), AttributeKind::Curve, dim, {}, {}, time_points};
}

std::size_t AttributeSchema::min_band_cardinality() const
{
    switch (kind) {
    case AttributeKind::Point:
    case AttributeKind::Curve: return static_cast<std::size_t>(dim) + 1;
    default: return 2;
    }
}

std::size_t AttributeSchema::real_width() const
{
    switch (kind) {
    case AttributeKind::Scalar: return 1;
    case AttributeKind::Point: return static_cast<std::size_t>(dim);
    case AttributeKind::CategoricalSet: return 0;
    case AttributeKind::Function: return grid.size();
    case AttributeKind::Curve: return static_cast<std::size_t>(dim) * static_cast<std::size_t>(time_points);
    }
    return 0;
}

std::optional<std::size_t> AttributeSchema::category_index(std::string_view label) const
{
    for (std::size_t i = 0; i < universe.size(); ++i)
        if (universe[i] == label) return i;
    return std::nullopt;
}

CategorySet CategorySet::with_universe(std::size_t universe_size)
{
    return CategorySet{std::vector<bits::Word>(bits::word_count(universe_size), 0)};
}

bool CategorySet::contains(std::size_t category) const
{
    return category / bits::kWordBits < words.size() && bits::test(words, category);
}

void CategorySet::insert(std::size_t category) { bits::set(words, category); }

std::size_t CategorySet::size() const { return bits::popcount(words); }

std::size_t Dataset::attribute_index(std::string_view name) const
{
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return i;
    fail("unknown attribute '" + std::string(name) + "'");
}

void validate_schema(const AttributeSchema& a)
{
    const std::string ctx = "attribute '" + a.name + "'";
    if (a.name.empty()) fail("attribute with empty name");
    switch (a.kind) {
    case AttributeKind::Scalar:
        break;
    case AttributeKind::Point:
        if (a.dim < 1 || a.dim > 3) fail(ctx + ": dim must be 1, 2 or 3");
        break;
    case AttributeKind::CategoricalSet: {
        if (a.universe.empty()) fail(ctx + ": empty universe");
        std::set<std::string> seen(a.universe.begin(), a.universe.end());
        if (seen.size() != a.universe.size()) fail(ctx + ": universe labels must be unique");
        break;
    }
    case AttributeKind::Function:
        if (a.grid.empty()) fail(ctx + ": empty grid");
        for (std::size_t i = 1; i < a.grid.size(); ++i)
            if (!(a.grid[i] > a.grid[i - 1])) fail(ctx + ": grid must be strictly increasing");
        break;
    case AttributeKind::Curve:
        if (a.dim < 1 || a.dim > 3) fail(ctx + ": dim must be 1, 2 or 3");
        if (a.time_points < 2) fail(ctx + ": timePoints must be at least 2");
        break;
    }
}

void validate_dataset(const Dataset& ds)
{
    if (ds.schema.empty()) fail("schema mismatch: dataset has no attributes");
    std::set<std::string> names;
    for (const auto& a : ds.schema) {
        validate_schema(a);
        if (!names.insert(a.name).second) fail("schema mismatch: duplicate attribute '" + a.name + "'");
    }
    if (ds.rows.size() < 3) fail("dataset needs at least 3 datapoints, got " + std::to_string(ds.rows.size()));
    if (!ds.labels.empty() && ds.labels.size() != ds.rows.size()) fail("labels length does not match row count");
    if (!ds.ground_truth.empty() && ds.ground_truth.size() != ds.rows.size())
        fail("ground-truth length does not match row count");

    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
        const auto& row = ds.rows[r];
        if (row.size() != ds.schema.size())
            fail("schema mismatch: row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                 " values, schema has " + std::to_string(ds.schema.size()));
        for (std::size_t a = 0; a < row.size(); ++a) {
            const auto& attr = ds.schema[a];
            const auto ctx = where(r, attr);
            const auto& v = row[a];
            auto check_reals = [&](const std::vector<double>& xs, std::size_t expected) {
                if (xs.size() != expected) fail(ctx + ": ragged samples");
                for (double x : xs)
                    if (!std::isfinite(x)) fail(ctx + ": non-finite value");
            };
            switch (attr.kind) {
            case AttributeKind::Scalar:
                if (!std::holds_alternative<double>(v)) fail("schema mismatch: " + ctx + " is not a scalar");
                if (!std::isfinite(std::get<double>(v))) fail(ctx + ": non-finite value");
                break;
            case AttributeKind::Point:
                if (!std::holds_alternative<PointValue>(v)) fail("schema mismatch: " + ctx + " is not a point");
                check_reals(std::get<PointValue>(v).coords, attr.real_width());
                break;
            case AttributeKind::Function:
                if (!std::holds_alternative<FunctionValue>(v)) fail("schema mismatch: " + ctx + " is not a function");
                check_reals(std::get<FunctionValue>(v).samples, attr.real_width());
                break;
            case AttributeKind::Curve:
                if (!std::holds_alternative<CurveValue>(v)) fail("schema mismatch: " + ctx + " is not a curve");
                check_reals(std::get<CurveValue>(v).samples, attr.real_width());
                break;
            case AttributeKind::CategoricalSet: {
                if (!std::holds_alternative<CategorySet>(v)) fail("schema mismatch: " + ctx + " is not a category set");
                const auto& s = std::get<CategorySet>(v);
                if (s.words.size() != bits::word_count(attr.universe.size())) fail(ctx + ": set encoded over wrong universe");
                for (std::size_t b = attr.universe.size(); b < s.words.size() * bits::kWordBits; ++b)
                    if (s.contains(b)) fail(ctx + ": set member outside universe");
                break;
            }
            }
        }
    }
}

Dataset dataset_from_json(const json& doc)
{
    if (!doc.is_object()) fail("dataset document must be a JSON object");
    if (!doc.contains("schema") || !doc["schema"].is_array()) fail("dataset document: missing 'schema' array");
    if (!doc.contains("rows") || !doc["rows"].is_array()) fail("dataset document: missing 'rows' array");

    Dataset ds;
    if (doc.contains("id") && doc["id"].is_string()) ds.id = doc["id"].get<std::string>();
    for (const auto& s : doc["schema"]) ds.schema.push_back(schema_from_json(s));

    std::size_t r = 0;
    for (const auto& row : doc["rows"]) {
        if (!row.is_array()) fail("row " + std::to_string(r) + ": expected an array of values");
        if (row.size() != ds.schema.size())
            fail("schema mismatch: row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                 " values, schema has " + std::to_string(ds.schema.size()));
        std::vector<AttributeValue> values;
        values.reserve(row.size());
        for (std::size_t a = 0; a < row.size(); ++a) values.push_back(parse_cell(row[a], ds.schema[a], where(r, ds.schema[a])));
        ds.rows.push_back(std::move(values));
        ++r;
    }
    if (doc.contains("labels") && !doc["labels"].is_null()) {
        for (const auto& l : doc["labels"]) {
            if (!l.is_string()) fail("labels must be strings");
            ds.labels.push_back(l.get<std::string>());
        }
    }
    if (doc.contains("metadata") && doc["metadata"].is_object() && doc["metadata"].contains("groundTruth"))
        ds.ground_truth = doc["metadata"]["groundTruth"].get<std::vector<int>>();
    validate_dataset(ds);
    return ds;
}

Dataset parse_dataset(std::string_view bytes, DataFormat format, std::string_view sidecar_schema)
{
    if (format == DataFormat::CsvWithSchema) return parse_csv(bytes, sidecar_schema);
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
    }
    return dataset_from_json(doc);
}

json to_json(const Dataset& ds)
{
    json schema = json::array();
    for (const auto& a : ds.schema) schema.push_back(schema_to_json(a));
    json rows = json::array();
    for (const auto& row : ds.rows) {
        json jr = json::array();
        for (std::size_t a = 0; a < row.size(); ++a) jr.push_back(cell_to_json(row[a], ds.schema[a]));
        rows.push_back(std::move(jr));
    }
    json doc = {{"schema", std::move(schema)}, {"rows", std::move(rows)}};
    if (!ds.id.empty()) doc["id"] = ds.id;
    if (!ds.labels.empty()) doc["labels"] = ds.labels;
    if (!ds.ground_truth.empty()) doc["metadata"] = {{"groundTruth", ds.ground_truth}};
    return doc;
}

std::string serialize_dataset(const Dataset& ds) { return to_json(ds).dump(); }

Dataset load_dataset(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    if (path.extension() == ".csv") {
        auto sidecar = path;
        sidecar.replace_extension(".schema.json");
        return parse_dataset(bytes, DataFormat::CsvWithSchema, read_file(sidecar));
    }
    return parse_dataset(bytes, DataFormat::JsonV1);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write '" + path.string() + "'");
    out << serialize_dataset(ds) << '\n';
}

Dataset subsample_rows(const Dataset& ds, std::size_t count, std::uint64_t seed)
{
    if (count > ds.size()) fail("subsample larger than dataset");
    std::vector<std::size_t> idx(ds.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());

    Dataset out;
    out.id = ds.id.empty() ? std::string{} : ds.id + "-sub" + std::to_string(count);
    out.schema = ds.schema;
    for (auto i : idx) {
        out.rows.push_back(ds.rows[i]);
        if (!ds.labels.empty()) out.labels.push_back(ds.labels[i]);
        if (!ds.ground_truth.empty()) out.ground_truth.push_back(ds.ground_truth[i]);
    }
    validate_dataset(out);
    return out;
}

} // namespace depthscope

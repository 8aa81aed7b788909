#include <doctest.h>

#include <fstream>
#include <set>
#include <string>

#include "depthscope/dataset.hpp"
#include "depthscope/error.hpp"
#include "depthscope/synthetic.hpp"
#include "oracle.hpp"
#include "tmpdir.hpp"

using namespace depthscope;

namespace {

bool throws_containing(auto&& fn, const std::string& needle)
{
    try {
        fn();
    } catch (const IngestError& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

std::vector<AttributeSchema> every_kind()
{
    return {AttributeSchema::scalar("s"), AttributeSchema::point("p", 2), AttributeSchema::categorical("c", {"a", "b", "c"}),
            AttributeSchema::function("f", {0.0, 0.5, 1.0}), AttributeSchema::curve("k", 2, 4)};
}

} // namespace

TEST_CASE("json with two scalar attributes and three rows")
{
    const auto ds = parse_dataset(R"({"schema":[{"name":"x","kind":"scalar"},{"name":"y","kind":"scalar"}],
                                      "rows":[[1,2],[3,4],[5,6]]})",
                                  DataFormat::JsonV1);
    CHECK(ds.size() == 3);
    CHECK(ds.schema.size() == 2);
    CHECK(std::get<double>(ds.rows[2][1]) == 6.0);
}

TEST_CASE("csv category outside the universe is rejected")
{
    const std::string side = R"({"schema":[{"name":"v","kind":"scalar"},{"name":"c","kind":"categorical","universe":["a","b","c"]}]})";
    const std::string csv = "v,c\n1,a\n2,b\n3,z\n";
    CHECK(throws_containing([&] { parse_dataset(csv, DataFormat::CsvWithSchema, side); }, "unknown category"));
    CHECK(throws_containing([&] { parse_dataset(csv, DataFormat::CsvWithSchema, side); }, "row 2"));
}

TEST_CASE("csv with label column and multi-valued sets")
{
    const std::string side = R"({"schema":[{"name":"v","kind":"scalar"},{"name":"c","kind":"categorical","universe":["a","b","c"]}],
                                 "labelColumn":"name"})";
    const auto ds = parse_dataset("name,v,c\nr0,1,a\nr1,2,a;b\nr2,3,c\n", DataFormat::CsvWithSchema, side);
    CHECK(ds.labels == std::vector<std::string>{"r0", "r1", "r2"});
    const auto& s = std::get<CategorySet>(ds.rows[1][1]);
    CHECK(s.contains(0));
    CHECK(s.contains(1));
    CHECK_FALSE(s.contains(2));
}

TEST_CASE("mushroom-shaped file keeps 23 schema entries")
{
    nlohmann::json doc;
    for (int a = 0; a < 20; ++a)
        doc["schema"].push_back({{"name", "cat" + std::to_string(a)}, {"kind", "categorical"}, {"universe", {"p", "q", "r"}}});
    for (int a = 0; a < 3; ++a) doc["schema"].push_back({{"name", "num" + std::to_string(a)}, {"kind", "scalar"}});
    for (int r = 0; r < 5; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < 20; ++a) row.push_back((r + a) % 2 ? "p" : "q");
        for (int a = 0; a < 3; ++a) row.push_back(r * 1.5 + a);
        doc["rows"].push_back(row);
    }
    const auto ds = dataset_from_json(doc);
    CHECK(ds.schema.size() == 23);
}

TEST_CASE("ingest errors name the offending row and attribute")
{
    const std::string head = R"({"schema":[{"name":"f","kind":"function","grid":[0,1,2]}],"rows":)";
    CHECK(throws_containing([&] { parse_dataset(head + "[[[1,2,3]],[[1,2]],[[0,0,0]]]}", DataFormat::JsonV1); }, "ragged"));
    CHECK(throws_containing([&] { parse_dataset(head + "[[[1,2,3]],[[1,2]],[[0,0,0]]]}", DataFormat::JsonV1); },
                            "row 1"));
    CHECK(throws_containing([&] { parse_dataset(head + "[[[1,2,3]],[null],[[0,0,0]]]}", DataFormat::JsonV1); }, "'f'"));
    CHECK(throws_containing([&] { parse_dataset("{not json", DataFormat::JsonV1); }, "malformed JSON"));
    CHECK(throws_containing(
        [&] { parse_dataset(R"({"schema":[{"name":"x","kind":"scalar"}],"rows":[[1],[2,3],[4]]})", DataFormat::JsonV1); },
        "schema mismatch"));
    CHECK(throws_containing(
        [&] { parse_dataset(R"({"schema":[{"name":"x","kind":"scalar"}],"rows":[[1],[2]]})", DataFormat::JsonV1); },
        "at least 3"));
    CHECK(throws_containing(
        [&] { parse_dataset(R"({"schema":[{"name":"x","kind":"blob"}],"rows":[]})", DataFormat::JsonV1); },
        "unknown attribute kind"));
}

TEST_CASE("curves and functions are not accepted through csv")
{
    const std::string side = R"({"schema":[{"name":"f","kind":"function","grid":[0,1]}]})";
    CHECK(throws_containing([&] { parse_dataset("f\n1\n2\n3\n", DataFormat::CsvWithSchema, side); }, "not representable"));
}

TEST_CASE("serialize then parse reproduces every datatype exactly")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto ds = oracle::random_dataset(6, every_kind(), seed, seed % 2 == 0);
        ds.labels = {"a", "b", "c", "d", "e", "f"};
        const auto back = parse_dataset(serialize_dataset(ds), DataFormat::JsonV1);
        CHECK(back == ds);
    }
    for (std::uint64_t seed : {1u, 7u}) {
        for (const SyntheticSpec& spec : std::vector<SyntheticSpec>{Unimodal1D{}, Bimodal1D{}, CurveEnsemble{}, MixedCategorical{}}) {
            const auto ds = generate_synthetic(spec, seed);
            CHECK(parse_dataset(serialize_dataset(ds), DataFormat::JsonV1) == ds);
        }
    }
}

TEST_CASE("save and load through a file, including csv with sidecar")
{
    TempDir tmp("dataset");
    const auto ds = generate_synthetic(Bimodal1D{}, 3);
    save_dataset(ds, tmp.path() / "b.json");
    CHECK(load_dataset(tmp.path() / "b.json") == ds);

    std::ofstream(tmp.path() / "t.csv") << "x,c\n1,a\n2,b\n3,a;b\n";
    std::ofstream(tmp.path() / "t.schema.json")
        << R"({"schema":[{"name":"x","kind":"scalar"},{"name":"c","kind":"categorical","universe":["a","b"]}]})";
    CHECK(load_dataset(tmp.path() / "t.csv").size() == 3);
    CHECK(throws_containing([&] { load_dataset(tmp.path() / "missing.json"); }, "missing.json"));
}

TEST_CASE("synthetic generators")
{
    SUBCASE("unimodal has a single mode label")
    {
        const auto ds = generate_synthetic(Unimodal1D{99, 0.0, 1.0}, 7);
        CHECK(ds.size() == 99);
        for (int g : ds.ground_truth) CHECK(g == 0);
    }
    SUBCASE("bimodal carries two mode labels")
    {
        const auto ds = generate_synthetic(Bimodal1D{99, {-3.0, 3.0}, {1.0, 1.0}, 0.5}, 7);
        CHECK(ds.size() == 99);
        std::set<int> modes(ds.ground_truth.begin(), ds.ground_truth.end());
        CHECK(modes == std::set<int>{0, 1});
    }
    SUBCASE("curve ensemble of 21 tracks over 60 time points")
    {
        const auto ds = generate_synthetic(CurveEnsemble{21, 60, 2}, 1);
        CHECK(ds.size() == 21);
        const auto k = ds.attribute_index("track");
        CHECK(ds.schema[k].kind == AttributeKind::Curve);
        CHECK(ds.schema[k].time_points == 60);
        CHECK(std::get<CurveValue>(ds.rows[0][k]).samples.size() == 120);
    }
    SUBCASE("pure function of spec and seed")
    {
        CHECK(generate_synthetic(MixedCategorical{}, 5) == generate_synthetic(MixedCategorical{}, 5));
        CHECK_FALSE(generate_synthetic(MixedCategorical{}, 5) == generate_synthetic(MixedCategorical{}, 6));
        CHECK(generate_synthetic(WideMixed{}, 2).schema.size() == 53);
    }
    SUBCASE("bad specs")
    {
        CHECK(throws_containing([] { generate_synthetic(Unimodal1D{0, 0.0, 1.0}, 1); }, "positive"));
        CHECK(throws_containing([] { generate_synthetic(Bimodal1D{10, {}, {}, 0.5}, 1); }, "empty mixture"));
    }
}

TEST_CASE("seeded subsample keeps order and is reproducible")
{
    const auto ds = generate_synthetic(MixedCategorical{}, 1);
    const auto a = subsample_rows(ds, 40, 9);
    CHECK(a.size() == 40);
    CHECK(a == subsample_rows(ds, 40, 9));
    CHECK_FALSE(a == subsample_rows(ds, 40, 10));
}

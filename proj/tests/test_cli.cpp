#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "depthscope/cli.hpp"
#include "depthscope/dataset.hpp"
#include "depthscope/synthetic.hpp"
#include "tmpdir.hpp"

using namespace depthscope;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "depthscope");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("gen writes a dataset with ground truth")
{
    TempDir tmp("cli");
    const auto path = (tmp.path() / "b.json").string();
    const auto r = run({"gen", "--spec", "bimodal", "--n", "99", "--seed", "7", "--out", path});
    CHECK(r.code == cli::kExitOk);
    const auto ds = load_dataset(path);
    CHECK(ds.size() == 99);
    CHECK(ds.ground_truth.size() == 99);
    CHECK(run({"gen", "--spec", "bimodal", "--n", "0", "--out", path}).code == cli::kExitUsage);
    CHECK(run({"gen", "--spec", "spiral", "--out", path}).code == cli::kExitUsage);
}

TEST_CASE("analyze writes a snapshot and a summary line")
{
    TempDir tmp("cli");
    const auto in = (tmp.path() / "b.json").string();
    save_dataset(generate_synthetic(Bimodal1D{}, 7), in);
    const auto out = (tmp.path() / "snap.json").string();
    const auto r = run({"analyze", "--input", in, "--tau-quantile", "0.25", "--k", "2", "--out", out});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("n=99") != std::string::npos);
    CHECK(r.out.find("bands=4851") != std::string::npos);
    CHECK(r.out.find("k=2") != std::string::npos);
    CHECK(r.out.find("outliers=") != std::string::npos);
    CHECK(r.out.find("inclusion=") != std::string::npos);
    const auto snap = nlohmann::json::parse(slurp(out));
    CHECK(snap["spectral"]["clusterCount"] == 2);

    SUBCASE("byte-identical on repeat")
    {
        const auto out2 = (tmp.path() / "snap2.json").string();
        run({"analyze", "--input", in, "--tau-quantile", "0.25", "--k", "2", "--out", out2});
        CHECK(slurp(out) == slurp(out2));
    }
    SUBCASE("similarity csv export")
    {
        const auto csv = (tmp.path() / "s.csv").string();
        CHECK(run({"analyze", "--input", in, "--out", out, "--similarity-csv", csv, "--serial"}).code == 0);
        CHECK(slurp(csv).rfind("index,", 0) == 0);
    }
}

TEST_CASE("analyze error paths")
{
    TempDir tmp("cli");
    const auto in = (tmp.path() / "u.json").string();
    save_dataset(generate_synthetic(Unimodal1D{20, 0, 1}, 1), in);
    const auto out = (tmp.path() / "o.json").string();

    auto r = run({"analyze", "--input", (tmp.path() / "nope.json").string(), "--out", out});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("nope.json") != std::string::npos);

    r = run({"analyze", "--input", in, "--tau", "-1", "--out", out});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("tau must be nonnegative") != std::string::npos);

    r = run({"analyze", "--input", in, "--tau", "0", "--out", out});
    CHECK(r.code == cli::kExitAnalysis);
    CHECK(r.err.find("tau below minimum band size") != std::string::npos);

    CHECK(run({"analyze", "--input", in, "--tau", "1", "--tau-quantile", "0.5", "--out", out}).code == cli::kExitUsage);
    CHECK(run({"analyze", "--input", in}).code == cli::kExitUsage);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == cli::kExitOk);

    std::ofstream(tmp.path() / "bad.json") << "{broken";
    CHECK(run({"analyze", "--input", (tmp.path() / "bad.json").string(), "--out", out}).code == cli::kExitUsage);
}

TEST_CASE("sweep reuses one matrix and writes a summary table")
{
    TempDir tmp("cli");
    const auto in = (tmp.path() / "u.json").string();
    save_dataset(generate_synthetic(Unimodal1D{}, 3), in);
    const auto dir = tmp.path() / "sweep";
    const auto r = run({"sweep", "--input", in, "--quantiles", "0.25,0.5,1.0", "--out-dir", dir.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(std::filesystem::exists(dir / "snapshot-q0.25.json"));
    CHECK(std::filesystem::exists(dir / "snapshot-q1.json"));
    const auto table = slurp(dir / "summary.csv");
    CHECK(table.rfind("quantile,tau,suggestedK,k,spearman\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
    CHECK(table.find("\n1,") != std::string::npos);

    CHECK(run({"sweep", "--input", in, "--quantiles", "", "--out-dir", dir.string()}).code == cli::kExitUsage);
    CHECK(run({"sweep", "--input", in, "--quantiles", "0.5,3", "--out-dir", dir.string()}).code == cli::kExitUsage);
}

TEST_CASE("environment overrides")
{
    TempDir tmp("cli");
    const auto a = (tmp.path() / "a.json").string(), b = (tmp.path() / "b.json").string();
    ::setenv("DEPTHSCOPE_SEED", "11", 1);
    run({"gen", "--spec", "unimodal", "--out", a});
    ::unsetenv("DEPTHSCOPE_SEED");
    run({"gen", "--spec", "unimodal", "--seed", "11", "--out", b});
    CHECK(slurp(a) == slurp(b));

    ::setenv("DEPTHSCOPE_SEED", "eleven", 1);
    CHECK(run({"gen", "--spec", "unimodal", "--out", a}).code == cli::kExitUsage);
    ::unsetenv("DEPTHSCOPE_SEED");

    const auto cache = tmp.path() / "cache";
    ::setenv("DEPTHSCOPE_CACHE_DIR", cache.string().c_str(), 1);
    CHECK(run({"analyze", "--input", a, "--out", (tmp.path() / "s.json").string()}).code == 0);
    ::unsetenv("DEPTHSCOPE_CACHE_DIR");
    CHECK(std::filesystem::exists(cache));
    CHECK_FALSE(std::filesystem::is_empty(cache));
}

TEST_CASE("serve refuses a port that is taken")
{
    TempDir tmp("cli");
    httplib::Server blocker;
    const int port = blocker.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    const auto r = run({"serve", "--port", std::to_string(port), "--data-dir", tmp.path().string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("serve --port 0 prints the bound port")
{
    TempDir tmp("cli");
    const std::string cmd = std::string("timeout 3 ") + DEPTHSCOPE_BIN + " serve --port 0 --data-dir " + tmp.path().string();
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char line[256]{};
    const bool got = std::fgets(line, sizeof line, pipe) != nullptr;
    ::pclose(pipe);
    REQUIRE(got);
    const std::string s(line);
    CHECK(s.rfind("serving on http://127.0.0.1:", 0) == 0);
    CHECK(std::stoi(s.substr(s.rfind(':') + 1)) > 0);
}

#include "depthscope/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "depthscope/error.hpp"
#include "depthscope/pipeline.hpp"
#include "depthscope/service.hpp"
#include "depthscope/synthetic.hpp"

namespace depthscope::cli {

namespace {

// Flag values validated after parsing but before any computation.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Env {
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> cache_dir;
};

Env read_env()
{
    Env env;
    if (const char* s = std::getenv("DEPTHSCOPE_SEED"); s && *s) {
        const std::string_view v(s);
        const auto r = std::from_chars(v.data(), v.data() + v.size(), env.seed);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size())
            throw UsageError("DEPTHSCOPE_SEED must be a nonnegative integer, got '" + std::string(v) + "'");
    }
    if (const char* d = std::getenv("DEPTHSCOPE_CACHE_DIR"); d && *d) env.cache_dir = std::filesystem::path(d);
    return env;
}

struct AnalyzeArgs {
    std::string input, out, tau, similarity = "hamming", layout = "force", geo_attribute, similarity_csv;
    std::optional<double> tau_quantile;
    std::optional<std::size_t> k, budget;
    std::optional<std::uint64_t> seed;
    int iterations = 500;
    int threads = 0;
    bool serial = false;
};

struct SweepArgs {
    std::string input, out_dir, similarity = "hamming";
    std::string quantiles;
    std::optional<std::size_t> k, budget;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

struct GenArgs {
    std::string spec, out;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::size_t time_points = 60, modes = 2;
};

struct ServeArgs {
    int port = 8080;
    std::string host = "127.0.0.1", data_dir;
    std::optional<std::size_t> budget;
    std::optional<std::uint64_t> seed;
    std::size_t max_body_mib = kDefaultMaxBody >> 20;
};

TauSpec tau_from(const std::string& tau, const std::optional<double>& q)
{
    try {
        if (q) return TauSpec::quantile(*q);
        if (!tau.empty()) return TauSpec::parse(tau);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return TauSpec::infinite();
}

BuildOptions build_options(int threads, bool serial)
{
    BuildOptions b;
    b.threads = threads;
    b.backend = serial ? Backend::Serial : Backend::OpenMP;
    return b;
}

Dataset read_input(const std::string& path)
{
    if (!std::filesystem::exists(path)) throw IngestError("input file '" + path + "' does not exist");
    return load_dataset(path);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
}

std::string fmt(double v)
{
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

int cmd_analyze(const AnalyzeArgs& a, const Env& env, std::ostream& out)
{
    AnalysisConfig config;
    config.tau = tau_from(a.tau, a.tau_quantile);
    config.k = a.k;
    config.budget = a.budget;
    config.seed = a.seed.value_or(env.seed);
    config.similarity = similarity_mode_from_string(a.similarity);
    config.layout = a.layout == "geo" ? LayoutMode::Geospatial : LayoutMode::ForceDirected;
    config.geo_attribute = a.geo_attribute;
    config.layout_iterations = a.iterations;
    config.backend = a.serial ? Backend::Serial : Backend::OpenMP;
    if (a.k && *a.k == 0) throw UsageError("k must be positive");

    const Dataset ds = read_input(a.input);
    Analyzer analyzer(env.cache_dir, build_options(a.threads, a.serial));
    const auto snap = analyzer.analyze(ds, config);
    write_text(a.out, snap.serialize());
    if (!a.similarity_csv.empty()) write_text(a.similarity_csv, similarity_to_csv(snap.similarity, snap.spectral.order));

    out << "n=" << snap.n << " bands=" << snap.band_count << " tau=" << snap.tau_spec.to_string();
    if (!snap.tau.is_infinite()) out << " (" << fmt(snap.tau.value) << ")";
    out << " k=" << snap.spectral.k << " suggestedK=" << snap.spectral.suggestion.k
        << (snap.spectral.suggestion.low_confidence ? "(low confidence)" : "") << " outliers=" << snap.outliers.count
        << " | " << snap.timings.summary() << "\n";
    return kExitOk;
}

std::vector<double> parse_quantiles(const std::string& text)
{
    std::vector<double> qs;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        double q = 0.0;
        const auto r = std::from_chars(item.data(), item.data() + item.size(), q);
        if (item.empty() || r.ec != std::errc{} || r.ptr != item.data() + item.size())
            throw UsageError("invalid tau quantile '" + item + "'");
        if (!(q >= 0.0 && q <= 1.0)) throw UsageError("tau quantile must lie in [0, 1], got " + item);
        qs.push_back(q);
    }
    if (qs.empty()) throw UsageError("no tau quantiles given");
    return qs;
}

int cmd_sweep(const SweepArgs& a, const Env& env, std::ostream& out)
{
    const auto quantiles = parse_quantiles(a.quantiles);
    if (a.k && *a.k == 0) throw UsageError("k must be positive");

    AnalysisConfig base;
    base.k = a.k;
    base.budget = a.budget;
    base.seed = a.seed.value_or(env.seed);
    base.similarity = similarity_mode_from_string(a.similarity);

    const Dataset ds = read_input(a.input);
    std::filesystem::create_directories(a.out_dir);
    Analyzer analyzer(env.cache_dir, build_options(a.threads, false));
    const auto prepared = analyzer.prepare(ds, base.budget, base.seed);
    const auto reference = depth_values(prepared->matrix, mask_by_tau(prepared->matrix, Tau::infinite()));

    std::vector<std::future<AnalysisSnapshot>> jobs;
    for (double q : quantiles)
        jobs.push_back(std::async(std::launch::async, [&, q] {
            return analyzer.retune(prepared->key, TauSpec::quantile(q), base);
        }));

    std::ostringstream table;
    table << "quantile,tau,suggestedK,k,spearman\n";
    out << "quantile  tau           suggestedK  k  spearman\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto snap = jobs[i].get();
        const double q = quantiles[i];
        std::ostringstream name;
        name << "snapshot-q" << q << ".json";
        write_text(std::filesystem::path(a.out_dir) / name.str(), snap.serialize());
        const double rho = spearman(snap.depths, reference);
        const std::string tau = snap.tau.is_infinite() ? "inf" : fmt(snap.tau.value);
        table << q << "," << tau << "," << snap.spectral.suggestion.k << "," << snap.spectral.k << "," << fmt(rho) << "\n";
        out << std::left << std::setw(10) << q << std::setw(14) << tau << std::setw(12) << snap.spectral.suggestion.k
            << std::setw(3) << snap.spectral.k << fmt(rho) << "\n";
    }
    write_text(std::filesystem::path(a.out_dir) / "summary.csv", table.str());
    return kExitOk;
}

int cmd_gen(const GenArgs& a, const Env& env, std::ostream& out)
{
    const std::uint64_t seed = a.seed.value_or(env.seed);
    SyntheticSpec spec;
    if (a.spec == "unimodal") {
        Unimodal1D s;
        s.n = a.n.value_or(s.n);
        spec = s;
    } else if (a.spec == "bimodal") {
        Bimodal1D s;
        s.n = a.n.value_or(s.n);
        spec = s;
    } else if (a.spec == "curves") {
        CurveEnsemble s;
        s.n = a.n.value_or(s.n);
        s.time_points = a.time_points;
        s.modes = a.modes;
        spec = s;
    } else if (a.spec == "mixed") {
        MixedCategorical s;
        s.n = a.n.value_or(s.n);
        spec = s;
    } else {
        WideMixed s;
        s.n = a.n.value_or(s.n);
        spec = s;
    }
    const auto ds = generate_synthetic(spec, seed);
    save_dataset(ds, a.out);
    out << "wrote " << ds.size() << " rows (" << ds.schema.size() << " attributes) to " << a.out << "\n";
    return kExitOk;
}

int cmd_serve(const ServeArgs& a, const Env& env, std::ostream& out)
{
    if (a.port < 0 || a.port > 65535) throw UsageError("port must lie in [0, 65535]");
    ServiceOptions opt;
    opt.data_dir = !a.data_dir.empty() ? std::filesystem::path(a.data_dir)
                                       : env.cache_dir.value_or(std::filesystem::path("depthscope-data"));
    opt.budget = a.budget;
    opt.seed = a.seed.value_or(env.seed);
    opt.max_body_bytes = a.max_body_mib << 20;
    std::filesystem::create_directories(opt.data_dir);
    Service service(opt);
    int port = 0;
    try {
        port = service.bind(a.host, a.port);
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    out << "serving on http://" << a.host << ":" << port << std::endl;
    service.run();
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Band-depth analysis of heterogeneous datasets", "depthscope"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Analyze a dataset at one tau and write a snapshot");
    analyze->add_option("--input", an.input, "Dataset (.json, or .csv with <stem>.schema.json)")->required();
    auto* tau_opt = analyze->add_option("--tau", an.tau, "Band-size threshold: inf, a number, or q:<quantile>");
    analyze->add_option("--tau-quantile", an.tau_quantile, "Band-size threshold as a quantile in [0, 1]")->excludes(tau_opt);
    analyze->add_option("--k", an.k, "Cluster count (default: suggested by the eigengap)");
    analyze->add_option("--budget", an.budget, "Maximum number of bands before sampling");
    analyze->add_option("--seed", an.seed, "Seed (default: DEPTHSCOPE_SEED or 0)");
    analyze->add_option("--out", an.out, "Snapshot JSON output path")->required();
    analyze->add_option("--similarity", an.similarity, "Similarity: hamming or jaccard")
        ->check(CLI::IsMember({"hamming", "jaccard"}));
    analyze->add_option("--layout", an.layout, "Layout: force or geo")->check(CLI::IsMember({"force", "geo"}));
    analyze->add_option("--geo-attribute", an.geo_attribute, "Positional attribute for --layout geo");
    analyze->add_option("--iterations", an.iterations, "Force layout iterations")->check(CLI::NonNegativeNumber);
    analyze->add_option("--similarity-csv", an.similarity_csv, "Also write the reordered similarity matrix as CSV");
    analyze->add_option("--threads", an.threads, "Worker threads (0: all)")->check(CLI::NonNegativeNumber);
    analyze->add_flag("--serial", an.serial, "Use the serial kernels");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Analyze at several tau quantiles, reusing one inclusion matrix");
    sweep->add_option("--input", sw.input, "Dataset path")->required();
    sweep->add_option("--quantiles", sw.quantiles, "Comma-separated tau quantiles")->required();
    sweep->add_option("--out-dir", sw.out_dir, "Output directory")->required();
    sweep->add_option("--k", sw.k, "Cluster count override");
    sweep->add_option("--budget", sw.budget, "Maximum number of bands before sampling");
    sweep->add_option("--seed", sw.seed, "Seed (default: DEPTHSCOPE_SEED or 0)");
    sweep->add_option("--similarity", sw.similarity, "Similarity: hamming or jaccard")
        ->check(CLI::IsMember({"hamming", "jaccard"}));
    sweep->add_option("--threads", sw.threads, "Worker threads (0: all)")->check(CLI::NonNegativeNumber);

    GenArgs gn;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset with ground-truth labels");
    gen->add_option("--spec", gn.spec, "unimodal, bimodal, curves, mixed or wide")
        ->required()
        ->check(CLI::IsMember({"unimodal", "bimodal", "curves", "mixed", "wide"}));
    gen->add_option("--n", gn.n, "Number of datapoints");
    gen->add_option("--seed", gn.seed, "Seed (default: DEPTHSCOPE_SEED or 0)");
    gen->add_option("--time-points", gn.time_points, "Time points per curve (curves)");
    gen->add_option("--modes", gn.modes, "Track families (curves)");
    gen->add_option("--out", gn.out, "Output JSON path")->required();

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--port", sv.port, "Port (0 picks a free one)");
    serve->add_option("--host", sv.host, "Bind address");
    serve->add_option("--data-dir", sv.data_dir, "Dataset and cache directory (default: DEPTHSCOPE_CACHE_DIR)");
    serve->add_option("--budget", sv.budget, "Maximum number of bands before sampling");
    serve->add_option("--seed", sv.seed, "Seed (default: DEPTHSCOPE_SEED or 0)");
    serve->add_option("--max-body-mib", sv.max_body_mib, "Upload size limit in MiB");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Env env = read_env();
        if (analyze->parsed()) return cmd_analyze(an, env, out);
        if (sweep->parsed()) return cmd_sweep(sw, env, out);
        if (gen->parsed()) return cmd_gen(gn, env, out);
        if (serve->parsed()) return cmd_serve(sv, env, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IngestError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const AnalysisError& e) {
        err << "analysis error: " << e.what() << "\n";
        return kExitAnalysis;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace depthscope::cli

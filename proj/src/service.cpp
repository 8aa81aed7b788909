#include "depthscope/service.hpp"

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <vector>

#include <httplib.h>

#include "depthscope/error.hpp"
#include "depthscope/hashing.hpp"
#include "depthscope/pipeline.hpp"

namespace depthscope {

namespace {

enum class BuildState { Building, Ready, Failed };

std::string_view to_string(BuildState s)
{
    switch (s) {
    case BuildState::Building: return "building";
    case BuildState::Ready: return "ready";
    case BuildState::Failed: return "failed";
    }
    return "failed";
}

struct CachedBody {
    nlohmann::json doc;
    std::string body;
    std::string etag;
    std::string server_timing;
};

struct Entry {
    std::string id;
    Dataset dataset;
    std::atomic<double> progress{0.0};
    std::atomic<BuildState> state{BuildState::Building};
    std::string error; // written once before state becomes Failed
    std::shared_ptr<const PreparedDataset> prepared;

    std::shared_mutex snap_mutex;
    std::map<std::string, std::shared_ptr<const CachedBody>> snapshots;
};

std::string etag_of(const std::string& body) { return "\"" + sha256_hex(body).substr(0, 32) + "\""; }

void send_json(httplib::Response& res, int status, const nlohmann::json& j)
{
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message)
{
    send_json(res, status, {{"error", message}});
}

// Sends `body` with an ETag, or 304 when the client already holds it.
void send_tagged(const httplib::Request& req, httplib::Response& res, const std::string& body, const std::string& etag)
{
    res.set_header("ETag", etag);
    if (req.has_header("If-None-Match") && req.get_header_value("If-None-Match") == etag) {
        res.status = 304;
        return;
    }
    res.status = 200;
    res.set_content(body, "application/json");
}

std::optional<std::uint64_t> parse_uint(const std::string& s)
{
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;
    Analyzer analyzer;

    std::shared_mutex entries_mutex;
    std::map<std::string, std::shared_ptr<Entry>> entries;

    std::mutex builds_mutex;
    std::condition_variable builds_cv;
    std::vector<std::thread> threads;
    int running_builds = 0;

    explicit Impl(ServiceOptions o)
        : options(std::move(o)),
          analyzer(options.data_dir.empty() ? std::nullopt : std::optional(options.data_dir / "cache"), options.build)
    {
        routes();
        reload();
    }

    ~Impl()
    {
        server.stop();
        for (auto& t : threads)
            if (t.joinable()) t.join();
    }

    std::filesystem::path dataset_dir() const { return options.data_dir / "datasets"; }

    std::shared_ptr<Entry> lookup(const std::string& id)
    {
        std::shared_lock lock(entries_mutex);
        auto it = entries.find(id);
        return it == entries.end() ? nullptr : it->second;
    }

    // Registers a dataset; returns (entry, created).
    std::pair<std::shared_ptr<Entry>, bool> add(Dataset ds, bool persist)
    {
        const std::string id = content_hash(ds).substr(0, 16);
        std::shared_ptr<Entry> e;
        {
            std::unique_lock lock(entries_mutex);
            if (auto it = entries.find(id); it != entries.end()) return {it->second, false};
            e = std::make_shared<Entry>();
            e->id = id;
            e->dataset = std::move(ds);
            entries.emplace(id, e);
        }
        if (persist && !options.data_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(dataset_dir(), ec);
            if (!ec) save_dataset(e->dataset, dataset_dir() / (id + ".json"));
        }
        start_build(e);
        return {e, true};
    }

    void start_build(const std::shared_ptr<Entry>& e)
    {
        std::lock_guard lock(builds_mutex);
        ++running_builds;
        threads.emplace_back([this, e] {
            try {
                e->prepared = analyzer.prepare(e->dataset, options.budget, options.seed,
                                               [e](double f) { e->progress.store(f); });
                e->progress.store(1.0);
                e->state.store(BuildState::Ready);
            } catch (const std::exception& ex) {
                e->error = ex.what();
                e->state.store(BuildState::Failed);
            }
            std::lock_guard done(builds_mutex);
            --running_builds;
            builds_cv.notify_all();
        });
    }

    void reload()
    {
        if (options.data_dir.empty() || !std::filesystem::is_directory(dataset_dir())) return;
        std::vector<std::filesystem::path> files;
        for (const auto& f : std::filesystem::directory_iterator(dataset_dir()))
            if (f.path().extension() == ".json") files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                add(load_dataset(f), false);
            } catch (const std::exception&) {
                // unreadable files are skipped, not fatal at startup
            }
        }
    }

    nlohmann::json status_json(const Entry& e) const
    {
        const auto state = e.state.load();
        nlohmann::json j{{"id", e.id},
                         {"name", e.dataset.id},
                         {"n", e.dataset.size()},
                         {"attributes", e.dataset.schema.size()},
                         {"status", to_string(state)},
                         {"progress", e.progress.load()}};
        if (state == BuildState::Ready) {
            j["bandCount"] = e.prepared->matrix.band_count;
            j["subsetSize"] = e.prepared->plan.subset_size;
        }
        if (state == BuildState::Failed) j["error"] = e.error;
        return j;
    }

    // Resolves the entry for a per-id endpoint, or writes 404/409/422 and returns null.
    std::shared_ptr<Entry> ready_entry(const httplib::Request& req, httplib::Response& res)
    {
        auto e = lookup(req.matches[1]);
        if (!e) {
            send_error(res, 404, "unknown dataset id");
            return nullptr;
        }
        switch (e->state.load()) {
        case BuildState::Building:
            send_json(res, 409, {{"status", "building"}, {"progress", e->progress.load()}});
            return nullptr;
        case BuildState::Failed:
            send_error(res, 422, e->error);
            return nullptr;
        case BuildState::Ready:
            break;
        }
        return e;
    }

    // Snapshot for the request's query parameters; writes a 400 and returns null on bad input.
    std::shared_ptr<const CachedBody> snapshot_for(Entry& e, const httplib::Request& req, httplib::Response& res)
    {
        AnalysisConfig config;
        config.budget = options.budget;
        config.seed = options.seed;
        config.backend = options.build.backend;
        try {
            config.tau = req.has_param("tau") ? TauSpec::parse(req.get_param_value("tau")) : TauSpec::infinite();
        } catch (const std::exception& ex) {
            send_error(res, 400, ex.what());
            return nullptr;
        }
        if (req.has_param("k")) {
            auto k = parse_uint(req.get_param_value("k"));
            if (!k || *k < 1) {
                send_error(res, 400, "k must be a positive integer");
                return nullptr;
            }
            config.k = static_cast<std::size_t>(*k);
        }
        if (req.has_param("seed")) {
            auto s = parse_uint(req.get_param_value("seed"));
            if (!s) {
                send_error(res, 400, "seed must be a nonnegative integer");
                return nullptr;
            }
            config.seed = *s;
        }
        if (req.has_param("similarity")) {
            try {
                config.similarity = similarity_mode_from_string(req.get_param_value("similarity"));
            } catch (const std::exception& ex) {
                send_error(res, 400, ex.what());
                return nullptr;
            }
        }

        const std::string key = config.tau.to_string() + "|k=" + (config.k ? std::to_string(*config.k) : "auto") +
                                "|seed=" + std::to_string(config.seed) + "|sim=" +
                                std::string(depthscope::to_string(config.similarity));
        {
            std::shared_lock lock(e.snap_mutex);
            if (auto it = e.snapshots.find(key); it != e.snapshots.end()) {
                res.set_header("Server-Timing", "cache;desc=hit");
                return it->second;
            }
        }
        try {
            const auto snap = make_snapshot(*e.prepared, config);
            auto c = std::make_shared<CachedBody>();
            c->doc = snap.to_json();
            c->body = c->doc.dump();
            c->etag = etag_of(c->body);
            StageTimings t = snap.timings;
            t.inclusion_cached = true;
            c->server_timing = t.server_timing();
            res.set_header("Server-Timing", c->server_timing);
            std::unique_lock lock(e.snap_mutex);
            return e.snapshots.emplace(key, std::move(c)).first->second;
        } catch (const AnalysisError& ex) {
            send_error(res, 422, ex.what());
            return nullptr;
        }
    }

    void routes()
    {
        server.set_payload_max_length(options.max_body_bytes);

        server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", options.cors_origin);
            res.set_header("Access-Control-Expose-Headers", "ETag, Server-Timing");
        });
        server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
            res.set_header("Access-Control-Max-Age", "600");
        });

        server.Post("/api/datasets", [this](const httplib::Request& req, httplib::Response& res) {
            if (req.body.size() > options.max_body_bytes) {
                send_error(res, 413, "dataset exceeds the upload size limit");
                return;
            }
            Dataset ds;
            try {
                ds = parse_dataset(req.body, DataFormat::JsonV1);
            } catch (const std::exception& ex) {
                send_error(res, 400, ex.what());
                return;
            }
            auto [e, created] = add(std::move(ds), true);
            auto j = status_json(*e);
            send_json(res, created ? 201 : 200, j);
            res.set_header("Location", "/api/datasets/" + e->id);
        });

        server.Get("/api/datasets", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json list = nlohmann::json::array();
            std::shared_lock lock(entries_mutex);
            for (const auto& [id, e] : entries) list.push_back(status_json(*e));
            send_json(res, 200, {{"datasets", std::move(list)}});
        });

        server.Get(R"(/api/datasets/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto e = lookup(req.matches[1]);
            if (!e) return send_error(res, 404, "unknown dataset id");
            send_json(res, 200, status_json(*e));
        });

        server.Get(R"(/api/datasets/([0-9a-f]+)/snapshot)", [this](const httplib::Request& req, httplib::Response& res) {
            auto e = ready_entry(req, res);
            if (!e) return;
            auto c = snapshot_for(*e, req, res);
            if (!c) return;
            send_tagged(req, res, c->body, c->etag);
        });

        server.Get(R"(/api/datasets/([0-9a-f]+)/similarity)", [this](const httplib::Request& req, httplib::Response& res) {
            auto e = ready_entry(req, res);
            if (!e) return;
            auto c = snapshot_for(*e, req, res);
            if (!c) return;
            nlohmann::json j = c->doc.at("similarity");
            j["labels"] = c->doc.at("spectral").at("labels");
            const auto body = j.dump();
            send_tagged(req, res, body, etag_of(body));
        });

        server.Get(R"(/api/datasets/([0-9a-f]+)/summaries)", [this](const httplib::Request& req, httplib::Response& res) {
            auto e = ready_entry(req, res);
            if (!e) return;
            auto c = snapshot_for(*e, req, res);
            if (!c) return;
            nlohmann::json j{{"tau", c->doc.at("tau")},
                             {"coloring", c->doc.at("coloring")},
                             {"labels", c->doc.at("spectral").at("labels")},
                             {"summaries", c->doc.at("summaries")}};
            const auto body = j.dump();
            send_tagged(req, res, body, etag_of(body));
        });

        server.Get(R"(/api/datasets/([0-9a-f]+)/histogram)", [this](const httplib::Request& req, httplib::Response& res) {
            auto e = ready_entry(req, res);
            if (!e) return;
            std::size_t bins = kDefaultHistogramBins;
            if (req.has_param("bins")) {
                auto b = parse_uint(req.get_param_value("bins"));
                if (!b || *b < 1 || *b > 10000) return send_error(res, 400, "bins must be an integer in [1, 10000]");
                bins = static_cast<std::size_t>(*b);
            }
            const std::string log = req.has_param("log") ? req.get_param_value("log") : "0";
            if (log != "0" && log != "1" && log != "true" && log != "false")
                return send_error(res, 400, "log must be 0, 1, true or false");
            const auto& m = e->prepared->matrix;
            const auto h = band_size_histogram(m.band_sizes, m.log_band_sizes, bins, log == "1" || log == "true");
            const auto body = depthscope::to_json(h).dump();
            send_tagged(req, res, body, etag_of(body));
        });
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port)
{
    // httplib defaults to SO_REUSEPORT, which would let two servers share a port.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host);
        if (p <= 0) throw std::runtime_error("cannot bind " + host);
        return p;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
    return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_for_builds()
{
    std::unique_lock lock(impl_->builds_mutex);
    impl_->builds_cv.wait(lock, [&] { return impl_->running_builds == 0; });
}

} // namespace depthscope

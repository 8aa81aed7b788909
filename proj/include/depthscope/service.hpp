#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "depthscope/signatures.hpp"

namespace depthscope {

inline constexpr std::size_t kDefaultMaxBody = 32u << 20;

struct ServiceOptions {
    std::filesystem::path data_dir;
    std::size_t max_body_bytes = kDefaultMaxBody;
    std::optional<std::size_t> budget;
    std::uint64_t seed = 0;
    BuildOptions build;
    std::string cors_origin = "*";
};

/// HTTP API over datasets and analysis snapshots.
///
///   POST /api/datasets                      upload (201 new, 200 duplicate)
///   GET  /api/datasets                      list
///   GET  /api/datasets/{id}                 build status
///   GET  /api/datasets/{id}/snapshot        ?tau=&k=&seed=&similarity=
///   GET  /api/datasets/{id}/histogram       ?bins=&log=
///   GET  /api/datasets/{id}/similarity      ?tau=&k=&seed=&similarity=
///   GET  /api/datasets/{id}/summaries       ?tau=&k=&seed=&similarity=
class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds `host:port` (0 picks a free port) and returns the bound port.
    /// Throws std::runtime_error when the address is unavailable.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    /// Blocks until no dataset build is running.
    void wait_for_builds();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace depthscope

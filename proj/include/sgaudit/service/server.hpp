#pragma once

#include "sgaudit/adapters/adapters.hpp"
#include "sgaudit/engine/engine.hpp"
#include "sgaudit/guidance/guidance.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace sgaudit::service {

using AdapterFactory = std::function<adapters::AdapterSet(std::uint64_t session_seed)>;

struct ServerConfig {
    std::filesystem::path data_dir;
    AdapterFactory adapters;
    std::uint64_t default_seed = 0;  // for sessions created without one
    std::size_t job_workers = 2;
    engine::EngineOptions engine;
    guidance::GuidanceConfig guidance;
    /// Built UI bundle, served under /ui when set.
    std::optional<std::filesystem::path> static_dir;
};

/// HTTP facade over the engine. Sessions found in `data_dir` are loaded at
/// construction and every committed mutation is written back.
///
/// Mutations of one session run one at a time in arrival order. Each works
/// on a copy of the session that replaces the live state only on success,
/// so readers never see a half-applied operation. Generation and labeling
/// run as jobs on a bounded worker pool and are polled via GET /jobs/{id}.
class AuditServer {
public:
    explicit AuditServer(ServerConfig config);
    ~AuditServer();
    AuditServer(const AuditServer&) = delete;
    AuditServer& operator=(const AuditServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port; throws IoError.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Requires bind().
    void listen();
    /// listen() on a background thread; returns once the server accepts requests.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sgaudit::service

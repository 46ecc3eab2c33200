#include "sgaudit/adapters/mock.hpp"
#include "sgaudit/adapters/remote.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/service/plan.hpp"
#include "sgaudit/service/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <pthread.h>

using namespace sgaudit;

namespace {

service::AdapterFactory adapter_factory(const std::string& mode) {
    if (mode == "mock") return [](std::uint64_t seed) { return adapters::make_mock_adapters(seed); };
    auto remote = adapters::make_remote_adapters(adapters::RemoteConfig::from_env());
    return [remote](std::uint64_t) { return remote; };
}

int serve(const std::string& host, int port, const std::string& data_dir, const std::string& mode,
          std::uint64_t seed, std::size_t workers, const std::string& ui_dir) {
    // Block the stop signals before any thread starts so only sigwait sees them.
    std::signal(SIGINT, SIG_DFL);  // a backgrounded shell job inherits SIGINT ignored
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    service::ServerConfig cfg;
    cfg.data_dir = data_dir;
    cfg.adapters = adapter_factory(mode);
    cfg.default_seed = seed;
    cfg.job_workers = workers;
    if (!ui_dir.empty()) cfg.static_dir = ui_dir;
    service::AuditServer server(cfg);
    const int bound = server.bind(host, port);
    server.start();
    std::cout << "listening on http://" << host << ":" << bound << std::endl;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
    return 0;
}

int run_plan(const std::string& file, const std::string& out, const std::string& mode,
             std::optional<std::uint64_t> seed) {
    auto plan = service::load_plan(file);
    if (seed) plan.seed = *seed;
    auto result = service::run_plan(plan, adapter_factory(mode)(plan.seed), out);
    for (std::size_t i = 0; i < result.step_log.size(); ++i) std::cout << i + 1 << " " << result.step_log[i].dump() << "\n";
    std::cout << "report: " << result.report_md.string() << "\n"
              << "structured: " << result.report_json.string() << "\n"
              << "session: " << result.session_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene-graph based auditing of text-to-image models"};
    app.require_subcommand(1);

    std::string adapters_mode = "mock";
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "data";
    std::uint64_t serve_seed = 0;
    std::size_t workers = 2;
    std::string ui_dir;
    serve_cmd->add_option("--host", host, "Interface to bind");
    serve_cmd->add_option("--port", port, "Port (0 picks a free one)");
    serve_cmd->add_option("--data-dir", data_dir, "Where sessions are stored");
    serve_cmd->add_option("--adapters", adapters_mode, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
    serve_cmd->add_option("--seed", serve_seed, "Seed for sessions created without one");
    serve_cmd->add_option("--workers", workers, "Job worker threads")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--ui-dir", ui_dir, "Built UI bundle to serve under /ui")->check(CLI::ExistingDirectory);

    auto* plan_cmd = app.add_subcommand("run-plan", "Replay an audit plan headlessly");
    std::string plan_file;
    std::string out_dir = "out";
    std::optional<std::uint64_t> plan_seed;
    plan_cmd->add_option("plan", plan_file, "Plan file (JSON)")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("--out", out_dir, "Output directory");
    plan_cmd->add_option("--adapters", adapters_mode, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
    plan_cmd->add_option("--seed", plan_seed, "Overrides the plan's seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve_cmd->parsed()) return serve(host, port, data_dir, adapters_mode, serve_seed, workers, ui_dir);
        return run_plan(plan_file, out_dir, adapters_mode, plan_seed);
    } catch (const service::PlanStepError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "yosida/commands.hpp"
#include "yosida/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace yosida;

namespace {

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Timestamps live here only, so the main outputs stay byte-identical.
void write_meta(const std::string& dir, const std::string& command, int argc, char** argv, int threads, int code) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["argv"] = std::vector<std::string>(argv, argv + argc);
    j["threads"] = threads;
    j["exit_code"] = code;
    j["finished_utc"] = utc_now();
    std::filesystem::create_directories(dir);
    std::ofstream(std::filesystem::path(dir) / "meta.json") << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Yosida approximation toolkit: resolvents, regularized SPDE runs, extinction statistics"};
    app.require_subcommand(1);

    const char* env_out = std::getenv("YOSIDA_OUT_DIR");
    std::string out_dir = env_out && *env_out ? env_out : ".";
    int threads = default_threads();
    std::uint64_t seed = 0;
    app.add_option("--out", out_dir, "output directory (default $YOSIDA_OUT_DIR or .)");
    app.add_option("--threads", threads, "worker threads (default: logical cores)")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "override the configured base seed");

    auto* resolve = app.add_subcommand("resolve", "scalar generalized resolvent and Yosida value");
    std::string graph;
    double s = 0.0, lambda = 1.0, alpha = 2.0;
    resolve->add_option("--graph", graph, "graph spec, e.g. 'power(1.5, 0)'")->required();
    resolve->add_option("--s", s, "point")->required();
    resolve->add_option("--lambda", lambda, "regularization parameter");
    resolve->add_option("--alpha", alpha, "duality gauge");

    std::string config;
    auto* simulate = app.add_subcommand("simulate", "simulate trajectories and write CSV");
    simulate->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    auto* extinction = app.add_subcommand("extinction", "Monte Carlo extinction report");
    extinction->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    auto* sweep = app.add_subcommand("sweep", "coupled regularization sweep");
    sweep->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    std::vector<double> mus;
    sweep->add_option("--mu", mus, "mu list overriding the config (decreasing)");
    auto* verify = app.add_subcommand("verify", "built-in property suite");
    std::string level = "fast";
    verify->add_option("level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    CommandContext ctx;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    if (seed_opt->count()) ctx.seed = seed;

    std::string name = app.get_subcommands().front()->get_name();
    int code = kExitPass;
    try {
        if (*resolve) code = cmd_resolve(graph, s, lambda, alpha, ctx);
        else if (*simulate) code = cmd_simulate(load_run_config(config), ctx);
        else if (*extinction) code = cmd_extinction(load_run_config(config), ctx);
        else if (*sweep) code = cmd_sweep(load_run_config(config), mus.empty() ? std::nullopt : std::optional(mus), ctx);
        else if (*verify) code = cmd_verify(level == "full" ? VerifyLevel::Full : VerifyLevel::Fast, ctx);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = kExitFailure;
    }
    if (name != "resolve") write_meta(out_dir, name, argc, argv, threads, code);
    return code;
}

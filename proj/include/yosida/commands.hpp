#pragma once

#include "yosida/config.hpp"
#include "yosida/extinction.hpp"
#include "yosida/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace yosida {

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitUsage = 2 };

struct CommandContext {
    std::string out_dir = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

/// Prints R, A_lambda, A0 and the gauge identity residual for one scalar point.
int cmd_resolve(const std::string& graph_spec, double s, double lambda, double alpha, const CommandContext& ctx);
int cmd_simulate(RunConfig cfg, const CommandContext& ctx);
int cmd_extinction(RunConfig cfg, const CommandContext& ctx);
/// Extinction report for a run config; a target floor fixes T on the step grid.
ExtinctionReport run_extinction(const RunConfig& cfg, int threads);
nlohmann::ordered_json to_json(const ExtinctionReport& r);
int cmd_sweep(RunConfig cfg, const std::optional<std::vector<double>>& mus, const CommandContext& ctx);
int cmd_verify(VerifyLevel level, const CommandContext& ctx);

/// Shortest round-trip decimal form, used by every CSV writer.
std::string format_double(double x);

}  // namespace yosida

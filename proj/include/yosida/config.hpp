#pragma once

#include "yosida/error.hpp"
#include "yosida/sde.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace yosida {

inline constexpr int kSchemaVersion = 1;

/// Syntax errors carry line/column; schema errors carry the JSON path.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct RunConfig {
    int schema_version = kSchemaVersion;

    // grid and model
    int d = 1;
    int n = 32;
    std::string model = "porous_media";
    std::string graph = "power(1.5, 0)";
    double p = 1.5;
    double alpha = 1.5;

    // drift B
    std::string drift = "zero";
    std::string reaction = "none";
    double reaction_a = 0.0;

    std::vector<NoiseModel::Mode> noise;

    // initial field
    std::string initial = "sine";
    double amplitude = 1.0;
    std::vector<double> initial_values;

    // time stepping
    double T = 1.0;
    double dt = 1e-3;
    double mu = 1e-2;
    std::string scheme = "explicit";
    double epsilon = 0.0;
    int record_stride = 1;
    bool snapshots = false;
    std::uint64_t seed = 1;

    // simulate
    int trajectories = 1;
    std::string trajectory_output = "combined";

    // extinction
    int extinction_N = 400;
    int extinction_checkpoints = 10;
    std::optional<double> c0;
    std::optional<double> target_floor;
    bool epsilon_sensitivity = true;

    // sweep
    std::vector<double> sweep_mus = {1e-1, 1e-2, 1e-3, 1e-4};
    int sweep_N = 100;
    std::vector<double> sweep_checkpoints;  // empty -> {T}

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& c);
std::string serialize(const RunConfig& c);

/// Builds the simulation config; `T` overrides the configured horizon when set.
SimConfig build_sim_config(const RunConfig& c, std::optional<double> T = std::nullopt);
Field build_initial(const RunConfig& c, const Grid& g);

}  // namespace yosida

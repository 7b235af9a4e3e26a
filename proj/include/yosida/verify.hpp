#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace yosida {

enum class VerifyLevel { Fast, Full };

struct PropertyResult {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // worst slack against the property's tolerance; >= 0 passes
    int samples = 0;
    std::string detail;
};

struct SuiteResult {
    VerifyLevel level = VerifyLevel::Fast;
    std::uint64_t seed = 0;
    std::vector<PropertyResult> properties;
    bool all_pass() const;
};

/// Runs every property block. Results depend only on (level, seed); the
/// thread count changes wall time, never output.
SuiteResult run_verify(VerifyLevel level, std::uint64_t seed = 2024, int threads = 1);

nlohmann::ordered_json to_json(const SuiteResult& r);

}  // namespace yosida

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "kubediag/engine.hpp"
#include "kubediag/harness.hpp"

namespace kubediag::cli {

inline constexpr const char* kEnvPrefix = "KUBEDIAG_";

struct CliConfig {
    std::filesystem::path memory_path;      // episodes, JSON lines
    std::filesystem::path patterns_path;    // pattern snapshot
    std::filesystem::path graph_path;
    std::filesystem::path controller_path;  // controller checkpoint
    std::filesystem::path scenarios_path;
    std::string synthesis_url;              // empty: built-in deterministic client
    std::uint64_t seed = 42;
    EngineConfig engine;
    harness::SimulationConfig simulation;
};

nlohmann::json to_json(const CliConfig& c);

/// Defaults, then the JSON file (if any), then KUBEDIAG_* variables. Every
/// leaf key has a variable named after its path, e.g. memory.theta_sim ->
/// KUBEDIAG_ENGINE_MEMORY_THETA_SIM. Values are parsed as JSON, falling back
/// to a plain string.
CliConfig load_config(const std::filesystem::path& file, const std::map<std::string, std::string>& env);

/// Snapshot of the process environment restricted to the prefix.
std::map<std::string, std::string> prefixed_environment();

}  // namespace kubediag::cli

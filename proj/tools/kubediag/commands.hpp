#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace kubediag::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoEvidence = 2;

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool json = false;
    bool trace = false;
    bool learn = false;
    bool ablation = false;
};

struct DiagnoseOptions {
    std::vector<std::string> symptoms;
    std::vector<std::string> context;
    std::string query_id = "cli-query";
    std::string scenario_file;
    std::string outcome;  // required with --learn for free-text queries
    std::string root_cause;
};

struct IngestOptions {
    std::string dir;
    std::string graph_out;      // defaults to graph_path from the config
    std::string documents_out;  // JSON lines; skipped when empty
};

struct SimulateOptions {
    std::string scenarios;  // overrides scenarios_path
    std::optional<std::size_t> generate;
    std::optional<std::size_t> epochs;
    std::optional<double> recurrence;
    std::optional<std::size_t> window;
    std::string out;
    std::string trace_out;
};

struct GenerateOptions {
    std::size_t total = 100;
    std::string out;
};

int cmd_diagnose(const CliConfig& cfg, const GlobalOptions& g, const DiagnoseOptions& o, std::ostream& out,
                 std::ostream& err);
int cmd_ingest(const CliConfig& cfg, const GlobalOptions& g, const IngestOptions& o, std::ostream& out,
               std::ostream& err);
int cmd_simulate(const CliConfig& cfg, const GlobalOptions& g, const SimulateOptions& o, std::ostream& out,
                 std::ostream& err);
int cmd_generate(const CliConfig& cfg, const GlobalOptions& g, const GenerateOptions& o, std::ostream& out);

}  // namespace kubediag::cli

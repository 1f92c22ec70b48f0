#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "kubediag/epmn.hpp"

namespace kubediag::epmn {

nlohmann::json to_json(const Episode& e);
/// Throws SchemaViolation (missing/mistyped fields or broken invariants).
Episode episode_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Pattern& p);
Pattern pattern_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EpmnConfig& cfg);
/// Missing keys keep their defaults.
EpmnConfig config_from_json(const nlohmann::json& j, EpmnConfig base = {});

/// One episode object per line. Blank lines are skipped.
/// Throws LineError(SchemaViolation) naming the first offending line.
std::vector<Episode> read_episodes(std::istream& in);
std::vector<Episode> load_episodes(const std::filesystem::path& path);
void write_episodes(std::ostream& out, const MemoryPool& pool);
void save_episodes(const std::filesystem::path& path, const MemoryPool& pool);

/// {"config": {...}, "patterns": [...]}
nlohmann::json pattern_snapshot(const MemoryPool& pool, const EpmnConfig& cfg);
std::vector<Pattern> patterns_from_snapshot(const nlohmann::json& j);

}  // namespace kubediag::epmn

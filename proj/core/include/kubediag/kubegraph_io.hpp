#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "kubediag/kubegraph.hpp"

namespace kubediag::graph {

nlohmann::json to_json(const GraphNode& n);
GraphNode node_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GraphEdge& e);
GraphEdge edge_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Triple& t);
Triple triple_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CausalChain& c);
CausalChain chain_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Document& d);
Document document_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SearchConfig& c);
SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base = {});

/// {"nodes": [...], "edges": [...]} with enum names as strings. Nodes and
/// edges are emitted in id order so the file is byte-stable.
nlohmann::json to_json(const KnowledgeGraph& g);
/// Throws SchemaViolation for unknown enum names or dangling edges.
KnowledgeGraph graph_from_json(const nlohmann::json& j, std::shared_ptr<const Embedder> embedder);

KnowledgeGraph load_graph(const std::filesystem::path& path, std::shared_ptr<const Embedder> embedder);
void save_graph(const std::filesystem::path& path, const KnowledgeGraph& g);

}  // namespace kubediag::graph

#pragma once

// Causal knowledge graph over Kubernetes objects, document categorization
// for ingestion, and memory-biased causal-chain search.

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "kubediag/common.hpp"
#include "kubediag/embedder.hpp"

namespace kubediag::graph {

enum class NodeType {
    Pod,
    Service,
    Node,
    Deployment,
    Container,
    Volume,
    ConfigMap,
    Secret,
    Ingress,
    Namespace,
    Event,
    RootCause,
};
inline constexpr std::size_t kNodeTypeCount = 12;

enum class Relation {
    DependsOn,
    Manages,
    Causes,
    Mounts,
    SchedulesOn,
    Exposes,
    Configures,
    Evicts,
};
inline constexpr std::size_t kRelationCount = 8;

enum class Category {
    Explanations,
    ResourceErrors,
    NetworkErrors,
    SchedulingErrors,
    ImageErrors,
    ConfigurationErrors,
    SystemErrors,
};
inline constexpr std::size_t kCategoryCount = 7;

const char* to_string(NodeType t) noexcept;
const char* to_string(Relation r) noexcept;
const char* to_string(Category c) noexcept;
/// Throw Error(SchemaViolation) for names outside the closed sets.
NodeType node_type_from_string(std::string_view s);
Relation relation_from_string(std::string_view s);
Category category_from_string(std::string_view s);

const std::array<Category, 6>& fault_categories() noexcept;

struct GraphNode {
    std::string id;
    NodeType type = NodeType::Event;
    std::string label;
    std::map<std::string, std::string> attributes;
    std::optional<Category> category;
};

struct GraphEdge {
    std::string src;
    std::string dst;
    Relation relation = Relation::Causes;
    double weight = 1.0;  // (0, 1]
};

struct Triple {
    GraphNode src;
    GraphEdge edge;
    GraphNode dst;
};

struct SearchConfig {
    std::array<double, 3> alpha{0.5, 0.3, 0.2};  // prior, path score, novelty
    std::size_t max_hops = 3;
    std::size_t beam = 32;
    std::size_t n_chains = 5;
    double seed_threshold = 0.5;

    void validate() const;
};

/// Directed multigraph keyed by (src, relation, dst). Node labels are
/// embedded once on insert for seed matching.
class KnowledgeGraph {
public:
    explicit KnowledgeGraph(std::shared_ptr<const Embedder> embedder);

    /// Upserts both endpoints and inserts the edge; a repeated
    /// (src, relation, dst) keeps the larger weight. Throws SchemaViolation.
    void add_triple(const GraphNode& src, const GraphEdge& edge, const GraphNode& dst);

    /// Inserts or replaces a node (attributes merge, category kept when the update has none).
    void upsert_node(const GraphNode& node);
    /// Edge between existing nodes; same dedup rule as add_triple.
    void add_edge(const GraphEdge& edge);

    /// Feedback rule for confirmed relations: new edges enter at 0.5 and each
    /// reconfirmation adds 0.1, capped at 1. Returns the resulting weight.
    double reinforce(const Triple& t);

    const GraphNode* node(const std::string& id) const;
    const GraphEdge* edge(const std::string& src, Relation rel, const std::string& dst) const;
    /// Outgoing edges of `id` ordered by (relation, dst).
    std::span<const GraphEdge> out_edges(const std::string& id) const;

    const std::map<std::string, GraphNode>& nodes() const noexcept { return nodes_; }
    std::vector<GraphEdge> edges() const;
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept;
    std::size_t max_out_degree() const noexcept;

    const Vector& label_embedding(const std::string& id) const;
    const Embedder& embedder() const noexcept { return *embedder_; }
    std::shared_ptr<const Embedder> embedder_ptr() const noexcept { return embedder_; }

private:
    std::shared_ptr<const Embedder> embedder_;
    std::map<std::string, GraphNode> nodes_;
    std::map<std::string, Vector> label_vecs_;
    std::map<std::string, std::vector<GraphEdge>> out_;
};

struct ChainStep {
    std::string node;
    std::optional<Relation> via;  // relation of the incoming edge; empty for the first step
};

struct CausalChain {
    std::vector<ChainStep> steps;
    double score = 0.0;  // search priority
    double path_score = 0.0;
    double prior = 0.0;
    double novelty = 0.0;
    std::size_t hop_count = 0;

    std::vector<std::string> node_ids() const;
    /// Stable identifier derived from the node/relation sequence.
    std::string id() const;
};

/// Node ids whose label cosine to `query` is >= threshold, best first (ties by id).
std::vector<std::string> seed_nodes(const KnowledgeGraph& g, std::span<const double> query, double threshold = 0.5);

/// max over memory paths of |E(p) ∩ E(m)| / |E(p)| with E the directed node-pair edges.
double path_prior(std::span<const ChainStep> path, const std::vector<std::vector<std::string>>& memory_paths);
/// Geometric mean of edge weights. Throws InvalidPath for a missing edge or an edgeless path.
double path_score(std::span<const ChainStep> path, const KnowledgeGraph& g);
/// Fraction of the path's nodes outside `visited`.
double path_novelty(std::span<const ChainStep> path, const std::set<std::string>& visited);
double priority(std::span<const ChainStep> path, const std::vector<std::vector<std::string>>& memory_paths,
                const std::set<std::string>& visited, const KnowledgeGraph& g, const SearchConfig& cfg);

/// Chain ordering used by explore: priority desc, path score desc, then the
/// node-id sequence and relation sequence ascending.
bool chain_before(const CausalChain& a, const CausalChain& b);

/// Builds a scored chain from a path (used by explore and by reference enumerations).
CausalChain make_chain(std::vector<ChainStep> steps, const std::vector<std::vector<std::string>>& memory_paths,
                       const std::set<std::string>& visited, const KnowledgeGraph& g, const SearchConfig& cfg);

struct ExploreStats {
    std::size_t expanded = 0;  // frontier paths extended
    std::size_t visited = 0;   // distinct (depth, node) pairs generated
};

/// Level-wise best-first expansion from the seed nodes. At every depth the
/// frontier keeps the `beam` end nodes with the best path priority (all
/// their paths); every generated path ending at a RootCause node is a
/// candidate chain. Paths are simple and have 1..max_hops edges. `visited`
/// is the historical node set (memory hints) used by the novelty term.
std::vector<CausalChain> explore(const KnowledgeGraph& g, std::span<const double> query,
                                 const std::vector<std::vector<std::string>>& memory_paths,
                                 const std::set<std::string>& visited, const SearchConfig& cfg,
                                 ExploreStats* stats = nullptr);

// ---- documents ---------------------------------------------------------------

struct DocumentMetadata {
    std::string source;
    Timestamp timestamp = 0.0;
    double confidence = 0.0;
};

struct Document {
    std::string id;
    std::string raw_text;
    std::string cleaned_text;
    Category category = Category::Explanations;
    DocumentMetadata metadata;
};

struct Classification {
    Category category = Category::Explanations;
    double confidence = 0.0;
};

class DocumentClassifier {
public:
    virtual ~DocumentClassifier() = default;
    virtual Classification classify(std::string_view cleaned_text) const = 0;
};

/// Keyword tables per fault category; the category with the most keyword
/// hits wins (ties go to the earlier category). No hits -> Explanations.
class KeywordClassifier final : public DocumentClassifier {
public:
    KeywordClassifier();
    Classification classify(std::string_view cleaned_text) const override;

    const std::vector<std::pair<Category, std::vector<std::string>>>& tables() const noexcept { return tables_; }

private:
    std::vector<std::pair<Category, std::vector<std::string>>> tables_;
};

/// Removes markup and navigation/advertisement/comment boilerplate lines
/// and collapses whitespace.
std::string clean_text(std::string_view raw);

/// Throws InvalidArgument for empty input and ClassificationFailure when
/// cleaning leaves nothing or the classifier throws.
Document classify_document(std::string_view raw, const DocumentClassifier& classifier, std::string id = {},
                           DocumentMetadata metadata = {});

/// Relation statements of the form "<subject> <relation phrase> <object>"
/// (e.g. "memory leak causes OOMKilled restarts"), one per clause.
/// "X causes Y" becomes the edge Y -causes-> X, matching the graph's
/// symptom-to-cause direction; X is a RootCause unless its label names a
/// Kubernetes object. Other node types are guessed from object words.
/// Edge weight is the document's classification confidence, floored at 0.1.
std::vector<Triple> extract_triples(const Document& doc);

}  // namespace kubediag::graph

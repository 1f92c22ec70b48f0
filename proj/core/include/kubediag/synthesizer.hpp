#pragma once

// Solution synthesis over a structured prompt context. Clients receive the
// context as JSON and answer with a Solution as JSON; the bundled stub is a
// pure function of the context.

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kubediag/common.hpp"
#include "kubediag/epmn.hpp"
#include "kubediag/kubegraph.hpp"

namespace kubediag::synth {

enum class ContextMode { Template, Analytical };
const char* to_string(ContextMode m) noexcept;
ContextMode context_mode_from_string(std::string_view s);

struct MemoryBlock {
    epmn::MemoryKind kind = epmn::MemoryKind::Episode;
    std::string id;
    double score = 0.0;
    double confidence = 0.0;
    std::vector<std::string> symptoms;
    std::string root_cause;
    std::vector<std::string> actions;
    std::vector<std::string> resolution_path;
};

struct ChainLink {
    std::string node;
    std::string label;
    std::optional<graph::Relation> via;
};

struct ChainBlock {
    std::string id;
    double score = 0.0;
    double path_score = 0.0;
    std::vector<ChainLink> links;
};

struct PromptContext {
    Query query;
    std::string logs;
    std::vector<MemoryBlock> memories;  // retrieval order
    std::vector<ChainBlock> chains;     // search order; non-empty iff analytical
    ContextMode mode = ContextMode::Template;
    std::size_t token_budget = 0;
    std::size_t dropped_memories = 0;
    std::size_t dropped_chains = 0;

    /// Memory and chain ids present in the context.
    std::set<std::string> ids() const;
    /// Rendered text document (query block, memories, chains).
    std::string document() const;
};

struct Solution {
    std::string root_cause;
    std::vector<std::string> steps;
    std::vector<std::string> reasoning;
    double confidence = 0.0;
    std::vector<std::string> sources;
};

struct ContextConfig {
    std::size_t token_budget = 8192;
};

/// Memory blocks for retrieved memories, in retrieval order. Memories that
/// are no longer in the pool are skipped.
std::vector<MemoryBlock> memory_blocks(const std::vector<epmn::RetrievedMemory>& memories, const epmn::MemoryPool& pool);
std::vector<ChainBlock> chain_blocks(const std::vector<graph::CausalChain>& chains, const graph::KnowledgeGraph& g);

/// Assembles the context within the token budget. The query block always
/// stays; memories are kept as a rank prefix of what fits next to it (the
/// same in both modes); chains then fill what is left, the top chain
/// always kept. Throws InvalidContext for an analytical context without
/// chains or a template context with chains.
PromptContext build_context(const Query& q, std::vector<MemoryBlock> memories, std::vector<ChainBlock> chains,
                            ContextMode mode, const ContextConfig& cfg = {}, std::string logs = {});

/// Token count of a rendered block, as used by the budget.
std::size_t block_tokens(const MemoryBlock& m);
std::size_t block_tokens(const ChainBlock& c);
std::size_t query_tokens(const Query& q, const std::string& logs);

class SynthesisClient {
public:
    virtual ~SynthesisClient() = default;
    /// Request: serialized PromptContext. Response: serialized Solution.
    /// Transport problems throw SynthesisFailure.
    virtual std::string complete(const std::string& request) = 0;
    /// Requests the client accepts in parallel; 0 means unbounded.
    virtual std::size_t max_concurrency() const noexcept { return 0; }
};

/// Deterministic client. Template mode copies root cause and steps from the
/// top memory; analytical mode adds one reasoning entry per step of the top
/// chain and takes the root cause from the chain's terminal node.
class TemplateStubClient final : public SynthesisClient {
public:
    std::string complete(const std::string& request) override;
    static Solution solve(const PromptContext& ctx);
};

struct SynthesisOptions {
    std::size_t max_retries = 2;
    double timeout_seconds = 30.0;  // honored by network clients
};

/// Sends the context to the client, retrying retryable failures, and
/// validates the answer. Throws NoEvidence for a context with neither
/// memories nor chains, SynthesisFailure otherwise.
Solution synthesize(const PromptContext& ctx, SynthesisClient& client, const SynthesisOptions& opts = {});

nlohmann::json to_json(const PromptContext& ctx);
PromptContext context_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Solution& s);
/// Throws SchemaViolation.
Solution solution_from_json(const nlohmann::json& j);
/// Throws SchemaViolation when steps are empty or confidence is outside [0, 1].
void validate(const Solution& s);

}  // namespace kubediag::synth

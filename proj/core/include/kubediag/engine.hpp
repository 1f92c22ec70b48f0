#pragma once

// Dual-pathway diagnosis and the feedback loop that feeds outcomes back into
// memory, the controller and the knowledge graph.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kubediag/common.hpp"
#include "kubediag/controller.hpp"
#include "kubediag/embedder.hpp"
#include "kubediag/epmn.hpp"
#include "kubediag/kubegraph.hpp"
#include "kubediag/synthesizer.hpp"

namespace kubediag {

inline constexpr const char* kTraceSchema = "kubediag.session/1";

struct EngineConfig {
    epmn::EpmnConfig memory;
    graph::SearchConfig search;
    synth::ContextConfig context;
    synth::SynthesisOptions synthesis;
    control::OptParams control;
    double tau0 = 0.75;
    std::size_t pool_capacity = 5000;
    bool memory_enabled = true;     // false pins c_max to 0 and stores no episodes
    double match_threshold = 0.6;   // token overlap at which two root causes agree

    void validate() const;
};

struct FeedbackSummary {
    Outcome outcome = Outcome::Failure;
    double tau_after = 0.0;
};

struct DiagnosisSession {
    std::string id;
    Query query;
    std::string logs;
    epmn::RetrievalResult retrieval;
    control::RoutingDecision decision;
    std::optional<std::vector<graph::CausalChain>> chains;  // present iff analytical
    synth::PromptContext context;
    synth::Solution solution;  // confidence is the reported (clamped) value
    double client_confidence = 0.0;
    double latency_units = 0.0;
    double wall_latency = 0.0;  // seconds; not part of the exported trace
    Timestamp created = 0.0;
    std::optional<FeedbackSummary> feedback;
};

struct Feedback {
    std::string session_id;
    Outcome outcome = Outcome::Failure;
    std::optional<std::string> confirmed_root_cause;
    std::vector<graph::Triple> discovered_relations;
};

struct LearningReport {
    std::string session_id;
    std::string episode_id;  // empty when memory is disabled
    std::vector<std::string> evicted;
    std::vector<std::pair<std::string, double>> source_updates;  // episode id, new memory_value
    control::SessionRecord record;
    double tau_before = 0.0;
    double tau_after = 0.0;
    epmn::FactorWeights weights_before{};
    epmn::FactorWeights weights_after{};
    bool threshold_adapted = false;
    bool weights_updated = false;
    std::vector<graph::GraphEdge> reinforced;
    epmn::PatternUpdate patterns;
};

/// Thread-safe orchestration. diagnose() runs against a shared snapshot;
/// feedback() takes exclusive access, so no diagnosis sees half an update.
class Engine {
public:
    Engine(EngineConfig cfg, std::shared_ptr<const Embedder> embedder, graph::KnowledgeGraph graph,
           std::shared_ptr<synth::SynthesisClient> client);

    /// Routes on confidence and records the session. Errors carry the stage
    /// name; NoEvidence when neither memory nor graph yields anything.
    DiagnosisSession diagnose(const Query& q, Timestamp now, const std::string& logs = {});

    /// Runs the requested pathway regardless of the routing decision. The
    /// session is returned but not recorded.
    DiagnosisSession diagnose_via(const Query& q, Pathway pathway, Timestamp now, const std::string& logs = {}) const;

    /// Applies one feedback per session. Throws NotFound / AlreadyRecorded.
    LearningReport feedback(const Feedback& fb, Timestamp now);

    void insert_episode(epmn::Episode e);
    void restore_patterns(std::vector<epmn::Pattern> patterns);
    /// Full clustering pass over the stored episodes.
    epmn::PatternUpdate rebuild_patterns();
    void set_controller(control::ControllerState state);

    epmn::MemoryPool memory() const;
    control::ControllerState controller() const;
    std::shared_ptr<const graph::KnowledgeGraph> graph() const;
    const EngineConfig& config() const noexcept { return cfg_; }
    const Embedder& embedder() const noexcept { return *embedder_; }

    std::optional<DiagnosisSession> session(const std::string& id) const;
    std::size_t session_count() const;
    /// One trace line per session, in session order.
    void write_trace(std::ostream& out) const;

private:
    DiagnosisSession run(const Query& q, std::optional<Pathway> forced, Timestamp now, const std::string& logs,
                         std::string id) const;
    std::vector<std::string> resolution_path_for(const DiagnosisSession& s, const Feedback& fb,
                                                 const std::string& truth) const;

    EngineConfig cfg_;
    std::shared_ptr<const Embedder> embedder_;
    std::shared_ptr<synth::SynthesisClient> client_;

    mutable std::shared_mutex state_mutex_;
    epmn::MemoryPool pool_;
    control::ControllerState controller_;
    std::shared_ptr<const graph::KnowledgeGraph> graph_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, DiagnosisSession> sessions_;
    std::atomic<std::uint64_t> next_session_{1};
};

/// Trace line for a session (schema kTraceSchema). Everything except wall_latency.
nlohmann::json trace_json(const DiagnosisSession& s);
nlohmann::json to_json(const LearningReport& r);
nlohmann::json to_json(const EngineConfig& cfg);
/// Missing keys keep the values from `base`.
EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig base = {});

}  // namespace kubediag

#include "kubediag/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <ostream>

#include "kubediag/epmn_io.hpp"
#include "kubediag/errors.hpp"
#include "kubediag/kubegraph_io.hpp"
#include "kubediag/query_io.hpp"
#include "kubediag/text.hpp"

namespace kubediag {

using nlohmann::json;

namespace {

template <class F>
void staged(const char* stage, F&& f) {
    try {
        f();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

std::string session_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s-%06llu", static_cast<unsigned long long>(n));
    return buf;
}

bool agrees(const std::string& a, const std::string& b, double threshold) {
    if (text::token_set(a).empty() || text::token_set(b).empty()) return false;
    return text::token_overlap(a, b) >= threshold;
}

}  // namespace

void EngineConfig::validate() const {
    memory.validate();
    search.validate();
    if (!(tau0 >= 0.0 && tau0 <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau0 must be in [0, 1]");
    if (pool_capacity == 0) throw Error(ErrorCode::InvalidArgument, "pool_capacity must be positive");
    if (!(match_threshold > 0.0 && match_threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "match_threshold must be in (0, 1]");
    if (context.token_budget == 0) throw Error(ErrorCode::InvalidArgument, "token_budget must be positive");
    control::ControllerState probe;
    probe.tau = tau0;
    probe.opt_params = control;
    try {
        probe.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidArgument, e.what());
    }
}

Engine::Engine(EngineConfig cfg, std::shared_ptr<const Embedder> embedder, graph::KnowledgeGraph graph,
               std::shared_ptr<synth::SynthesisClient> client)
    : cfg_(std::move(cfg)),
      embedder_(std::move(embedder)),
      client_(std::move(client)),
      pool_(cfg_.pool_capacity),
      graph_(std::make_shared<const graph::KnowledgeGraph>(std::move(graph))) {
    cfg_.validate();
    if (!embedder_ || !client_) throw Error(ErrorCode::InvalidArgument, "engine needs an embedder and a client");
    if (embedder_->dim() != cfg_.memory.embedding_dim)
        throw Error(ErrorCode::InvalidArgument, "embedder dimension differs from memory.embedding_dim");
    controller_.tau = cfg_.tau0;
    controller_.opt_params = cfg_.control;
}

DiagnosisSession Engine::run(const Query& q, std::optional<Pathway> forced, Timestamp now, const std::string& logs,
                             std::string id) const {
    const auto started = std::chrono::steady_clock::now();
    DiagnosisSession s;
    s.id = std::move(id);
    s.query = q;
    s.logs = logs;
    s.created = now;

    epmn::Probe probe;
    staged("retrieve", [&] {
        probe = epmn::make_probe(q, *embedder_);
        if (cfg_.memory_enabled) {
            s.retrieval = epmn::retrieve(probe, pool_, controller_.factor_weights, cfg_.memory, now);
        } else {
            s.retrieval.novelty = 1.0;
            s.retrieval.complexity = epmn::complexity(probe.symptoms);
            s.retrieval.psi = epmn::mixing(s.retrieval.novelty, s.retrieval.complexity, cfg_.memory);
        }
    });

    staged("route", [&] {
        const double c_max = control::aggregate_confidence(s.retrieval);
        s.decision = control::route(c_max, controller_, control::meta_signal(s.retrieval, probe, pool_));
    });
    const Pathway pathway = forced.value_or(s.decision.pathway);
    s.decision.pathway = pathway;
    const double c_max = s.decision.c_max;

    std::vector<synth::MemoryBlock> memories;
    staged("context", [&] { memories = synth::memory_blocks(s.retrieval.memories, pool_); });

    if (pathway == Pathway::Intuitive) {
        staged("context", [&] {
            s.context = synth::build_context(q, std::move(memories), {}, synth::ContextMode::Template, cfg_.context, logs);
        });
    } else {
        std::vector<graph::CausalChain> chains;
        staged("explore", [&] {
            std::vector<std::vector<std::string>> memory_paths;
            std::set<std::string> visited;
            const std::size_t n = std::min(cfg_.memory.k_hint, s.retrieval.memories.size());
            for (std::size_t i = 0; i < n; ++i) {
                const auto& m = s.retrieval.memories[i];
                const auto* path = epmn::resolution_path_of(pool_, m.kind, m.id);
                if (!path || path->empty()) continue;
                memory_paths.push_back(*path);
                visited.insert(path->begin(), path->end());
            }
            chains = graph::explore(*graph_, probe.embedding, memory_paths, visited, cfg_.search);
        });
        staged("context", [&] {
            if (!chains.empty()) {
                s.context = synth::build_context(q, std::move(memories), synth::chain_blocks(chains, *graph_),
                                                 synth::ContextMode::Analytical, cfg_.context, logs);
            } else if (!memories.empty()) {
                // Nothing reachable in the graph: answer from memory alone.
                s.context = synth::build_context(q, std::move(memories), {}, synth::ContextMode::Template, cfg_.context,
                                                 logs);
            } else {
                throw Error(ErrorCode::NoEvidence, "no memories retrieved and no causal chain reaches a root cause");
            }
        });
        s.chains = std::move(chains);
    }

    staged("synthesize", [&] { s.solution = synth::synthesize(s.context, *client_, cfg_.synthesis); });
    s.client_confidence = s.solution.confidence;
    s.solution.confidence = pathway == Pathway::Analytical ? std::max(s.client_confidence, c_max)
                                                           : std::min(s.client_confidence, c_max);
    s.latency_units = pathway == Pathway::Intuitive ? 1.0 : controller_.opt_params.analytic_cost;
    s.wall_latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return s;
}

DiagnosisSession Engine::diagnose(const Query& q, Timestamp now, const std::string& logs) {
    std::shared_lock lock(state_mutex_);
    auto s = run(q, std::nullopt, now, logs, session_id(next_session_.fetch_add(1)));
    std::lock_guard guard(sessions_mutex_);
    sessions_.emplace(s.id, s);
    return s;
}

DiagnosisSession Engine::diagnose_via(const Query& q, Pathway pathway, Timestamp now, const std::string& logs) const {
    std::shared_lock lock(state_mutex_);
    return run(q, pathway, now, logs, "probe");
}

std::vector<std::string> Engine::resolution_path_for(const DiagnosisSession& s, const Feedback& fb,
                                                     const std::string& truth) const {
    if (!truth.empty() && s.chains) {
        for (const auto& c : *s.chains) {
            const auto* terminal = graph_->node(c.steps.back().node);
            if (terminal && agrees(terminal->label, truth, cfg_.match_threshold)) return c.node_ids();
        }
    }
    if (!fb.discovered_relations.empty()) {
        std::vector<std::string> path;
        for (const auto& t : fb.discovered_relations) {
            if (path.empty() || path.back() != t.edge.src) path.push_back(t.edge.src);
            path.push_back(t.edge.dst);
        }
        return path;
    }
    if (!truth.empty() && agrees(s.solution.root_cause, truth, cfg_.match_threshold)) {
        for (const auto& src : s.solution.sources) {
            for (const auto kind : {epmn::MemoryKind::Episode, epmn::MemoryKind::Pattern})
                if (const auto* path = epmn::resolution_path_of(pool_, kind, src); path && !path->empty()) return *path;
        }
    }
    return {};
}

LearningReport Engine::feedback(const Feedback& fb, Timestamp now) {
    std::unique_lock lock(state_mutex_);
    DiagnosisSession s;
    {
        std::lock_guard guard(sessions_mutex_);
        auto it = sessions_.find(fb.session_id);
        if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "session '" + fb.session_id + "' not found");
        if (it->second.feedback) throw Error(ErrorCode::AlreadyRecorded, "session '" + fb.session_id + "' already has feedback");
        s = it->second;
    }

    LearningReport report;
    report.session_id = s.id;
    const bool success = fb.outcome == Outcome::Success;
    const std::string truth = fb.confirmed_root_cause ? *fb.confirmed_root_cause
                                                      : (success ? s.solution.root_cause : std::string{});

    if (cfg_.memory_enabled) {
        const auto probe = epmn::make_probe(s.query, *embedder_);
        epmn::Episode e;
        e.id = "ep-" + s.id;
        for (int n = 2; pool_.known_episode_id(e.id); ++n) e.id = "ep-" + s.id + "-" + std::to_string(n);
        e.symptoms = probe.symptoms;
        e.context = s.query.context;
        e.actions = s.solution.steps;
        e.outcome = fb.outcome;
        e.timestamp = now;
        e.embedding = probe.embedding;
        e.resolution_path = resolution_path_for(s, fb, truth);
        e.root_cause = truth.empty() ? s.solution.root_cause : truth;
        e.trials = 1;
        e.successes = success ? 1 : 0;
        auto inserted = pool_.insert(std::move(e));
        report.episode_id = inserted.id;
        report.evicted = std::move(inserted.evicted);

        for (const auto& src : s.solution.sources) {
            if (!pool_.find_episode(src)) continue;
            const auto& updated = pool_.update_outcome(src, fb.outcome, success, cfg_.memory.update_rate);
            report.source_updates.emplace_back(src, updated.memory_value);
        }
    }

    control::SessionRecord rec;
    rec.query_id = s.query.id;
    rec.c_max = s.decision.c_max;
    rec.pathway = s.decision.pathway;
    rec.latency_units = s.latency_units;
    rec.outcome = fb.outcome;
    const epmn::RetrievedMemory* best = nullptr;
    for (const auto& m : s.retrieval.memories)
        if (!best || m.confidence > best->confidence) best = &m;
    if (best) rec.factors_of_best = best->factors;
    if (s.decision.pathway == Pathway::Intuitive)
        rec.fast_sufficient = success;
    else
        rec.fast_sufficient = !s.context.memories.empty() &&
                              agrees(s.context.memories.front().root_cause, truth, cfg_.match_threshold);

    report.tau_before = controller_.tau;
    report.weights_before = controller_.factor_weights;
    controller_.record(rec);
    report.record = rec;
    report.threshold_adapted = control::adapt_threshold(controller_);
    report.weights_updated = control::update_factor_weights(controller_);
    report.tau_after = controller_.tau;
    report.weights_after = controller_.factor_weights;

    if (!fb.discovered_relations.empty()) {
        auto next = std::make_shared<graph::KnowledgeGraph>(*graph_);
        for (const auto& t : fb.discovered_relations) {
            const double w = next->reinforce(t);
            graph::GraphEdge e = t.edge;
            e.weight = w;
            report.reinforced.push_back(e);
        }
        graph_ = std::move(next);
    }

    if (cfg_.memory_enabled && pool_.find_episode(report.episode_id))
        report.patterns = epmn::form_patterns_from(pool_, cfg_.memory, {report.episode_id});

    {
        std::lock_guard guard(sessions_mutex_);
        sessions_.at(s.id).feedback = FeedbackSummary{fb.outcome, controller_.tau};
    }
    return report;
}

void Engine::insert_episode(epmn::Episode e) {
    std::unique_lock lock(state_mutex_);
    validate(e, cfg_.memory.embedding_dim);
    pool_.insert(std::move(e));
}

void Engine::restore_patterns(std::vector<epmn::Pattern> patterns) {
    std::unique_lock lock(state_mutex_);
    pool_.upsert_patterns(std::move(patterns));
}

epmn::PatternUpdate Engine::rebuild_patterns() {
    std::unique_lock lock(state_mutex_);
    return epmn::form_patterns(pool_, cfg_.memory);
}

void Engine::set_controller(control::ControllerState state) {
    state.validate();
    std::unique_lock lock(state_mutex_);
    controller_ = std::move(state);
}

epmn::MemoryPool Engine::memory() const {
    std::shared_lock lock(state_mutex_);
    return pool_;
}

control::ControllerState Engine::controller() const {
    std::shared_lock lock(state_mutex_);
    return controller_;
}

std::shared_ptr<const graph::KnowledgeGraph> Engine::graph() const {
    std::shared_lock lock(state_mutex_);
    return graph_;
}

std::optional<DiagnosisSession> Engine::session(const std::string& id) const {
    std::lock_guard guard(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

std::size_t Engine::session_count() const {
    std::lock_guard guard(sessions_mutex_);
    return sessions_.size();
}

void Engine::write_trace(std::ostream& out) const {
    std::lock_guard guard(sessions_mutex_);
    for (const auto& [id, s] : sessions_) out << trace_json(s).dump() << '\n';
}

// ---- JSON ----------------------------------------------------------------------

json trace_json(const DiagnosisSession& s) {
    json memories = json::array();
    for (const auto& m : s.retrieval.memories)
        memories.push_back({{"kind", epmn::to_string(m.kind)},
                            {"id", m.id},
                            {"score", m.score},
                            {"raw_score", m.raw_score},
                            {"confidence", m.confidence},
                            {"factors", m.factors}});
    json chains = nullptr;
    if (s.chains) {
        chains = json::array();
        for (const auto& c : *s.chains) chains.push_back(graph::to_json(c));
    }
    json ctx_memories = json::array();
    for (const auto& m : s.context.memories) ctx_memories.push_back(m.id);
    json ctx_chains = json::array();
    for (const auto& c : s.context.chains) ctx_chains.push_back(c.id);

    json j{{"schema", kTraceSchema},
           {"id", s.id},
           {"created", s.created},
           {"query", to_json(s.query)},
           {"retrieval",
            {{"c_max", s.retrieval.c_max},
             {"psi", s.retrieval.psi},
             {"novelty", s.retrieval.novelty},
             {"complexity", s.retrieval.complexity},
             {"memories", std::move(memories)}}},
           {"decision", control::to_json(s.decision)},
           {"chains", std::move(chains)},
           {"context",
            {{"mode", synth::to_string(s.context.mode)},
             {"memories", std::move(ctx_memories)},
             {"chains", std::move(ctx_chains)},
             {"dropped_memories", s.context.dropped_memories},
             {"dropped_chains", s.context.dropped_chains}}},
           {"solution", synth::to_json(s.solution)},
           {"client_confidence", s.client_confidence},
           {"latency_units", s.latency_units}};
    j["feedback"] = s.feedback ? json{{"outcome", to_string(s.feedback->outcome)}, {"tau_after", s.feedback->tau_after}}
                               : json(nullptr);
    return j;
}

json to_json(const LearningReport& r) {
    json updates = json::array();
    for (const auto& [id, v] : r.source_updates) updates.push_back({{"id", id}, {"memory_value", v}});
    json reinforced = json::array();
    for (const auto& e : r.reinforced) reinforced.push_back(graph::to_json(e));
    return json{{"session_id", r.session_id},
                {"episode_id", r.episode_id},
                {"evicted", r.evicted},
                {"source_updates", std::move(updates)},
                {"record", control::to_json(r.record)},
                {"tau_before", r.tau_before},
                {"tau_after", r.tau_after},
                {"weights_before", r.weights_before},
                {"weights_after", r.weights_after},
                {"threshold_adapted", r.threshold_adapted},
                {"weights_updated", r.weights_updated},
                {"reinforced", std::move(reinforced)},
                {"patterns_created", r.patterns.created},
                {"patterns_updated", r.patterns.updated}};
}

json to_json(const EngineConfig& c) {
    return json{{"memory", epmn::to_json(c.memory)},
                {"search", graph::to_json(c.search)},
                {"token_budget", c.context.token_budget},
                {"max_retries", c.synthesis.max_retries},
                {"timeout_seconds", c.synthesis.timeout_seconds},
                {"control",
                 {{"eta_meta", c.control.eta_meta},
                  {"xi", c.control.xi},
                  {"delta_probe", c.control.delta_probe},
                  {"analytic_cost", c.control.analytic_cost},
                  {"weight_lr", c.control.weight_lr}}},
                {"tau0", c.tau0},
                {"pool_capacity", c.pool_capacity},
                {"memory_enabled", c.memory_enabled},
                {"match_threshold", c.match_threshold}};
}

EngineConfig engine_config_from_json(const json& j, EngineConfig c) {
    try {
        if (j.contains("memory")) c.memory = epmn::config_from_json(j.at("memory"), c.memory);
        if (j.contains("search")) c.search = graph::search_config_from_json(j.at("search"), c.search);
        c.context.token_budget = j.value("token_budget", c.context.token_budget);
        c.synthesis.max_retries = j.value("max_retries", c.synthesis.max_retries);
        c.synthesis.timeout_seconds = j.value("timeout_seconds", c.synthesis.timeout_seconds);
        if (j.contains("control")) {
            const auto& o = j.at("control");
            c.control.eta_meta = o.value("eta_meta", c.control.eta_meta);
            c.control.xi = o.value("xi", c.control.xi);
            c.control.delta_probe = o.value("delta_probe", c.control.delta_probe);
            c.control.analytic_cost = o.value("analytic_cost", c.control.analytic_cost);
            c.control.weight_lr = o.value("weight_lr", c.control.weight_lr);
        }
        c.tau0 = j.value("tau0", c.tau0);
        c.pool_capacity = j.value("pool_capacity", c.pool_capacity);
        c.memory_enabled = j.value("memory_enabled", c.memory_enabled);
        c.match_threshold = j.value("match_threshold", c.match_threshold);
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("engine config: ") + ex.what());
    }
    c.validate();
    return c;
}

}  // namespace kubediag

#include "kubediag/synthesizer.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "kubediag/errors.hpp"
#include "kubediag/query_io.hpp"
#include "kubediag/text.hpp"

namespace kubediag::synth {

using nlohmann::json;

namespace {

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string render(const Query& q, const std::string& logs) {
    std::ostringstream out;
    out << "query " << q.id << '\n';
    out << "symptoms: " << text::join(q.symptoms, " | ") << '\n';
    out << "context: " << text::join(std::vector<std::string>(q.context.begin(), q.context.end()), ", ") << '\n';
    if (!logs.empty()) out << "logs: " << logs << '\n';
    return out.str();
}

std::string render(const MemoryBlock& m, std::size_t rank) {
    std::ostringstream out;
    out << "memory " << rank << ' ' << epmn::to_string(m.kind) << ' ' << m.id << " score=" << fixed6(m.score)
        << " confidence=" << fixed6(m.confidence) << '\n';
    out << "  symptoms: " << text::join(m.symptoms, " | ") << '\n';
    out << "  root_cause: " << m.root_cause << '\n';
    out << "  actions: " << text::join(m.actions, " | ") << '\n';
    out << "  path: " << text::join(m.resolution_path, " -> ") << '\n';
    return out.str();
}

std::string render(const ChainBlock& c, std::size_t rank) {
    std::ostringstream out;
    out << "chain " << rank << ' ' << c.id << " score=" << fixed6(c.score) << " path_score=" << fixed6(c.path_score)
        << "\n ";
    for (const auto& l : c.links) {
        if (l.via) out << " -" << graph::to_string(*l.via) << "->";
        out << ' ' << l.label << " [" << l.node << ']';
    }
    out << '\n';
    return out.str();
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "': " + ex.what());
    }
}

}  // namespace

const char* to_string(ContextMode m) noexcept { return m == ContextMode::Template ? "template" : "analytical"; }

ContextMode context_mode_from_string(std::string_view s) {
    if (s == "template") return ContextMode::Template;
    if (s == "analytical") return ContextMode::Analytical;
    throw Error(ErrorCode::SchemaViolation, "unknown context mode '" + std::string(s) + "'");
}

std::set<std::string> PromptContext::ids() const {
    std::set<std::string> out;
    for (const auto& m : memories) out.insert(m.id);
    for (const auto& c : chains) out.insert(c.id);
    return out;
}

std::string PromptContext::document() const {
    std::string out = "mode " + std::string(to_string(mode)) + '\n' + render(query, logs);
    for (std::size_t i = 0; i < memories.size(); ++i) out += render(memories[i], i + 1);
    for (std::size_t i = 0; i < chains.size(); ++i) out += render(chains[i], i + 1);
    return out;
}

std::vector<MemoryBlock> memory_blocks(const std::vector<epmn::RetrievedMemory>& memories,
                                       const epmn::MemoryPool& pool) {
    std::vector<MemoryBlock> out;
    for (const auto& m : memories) {
        MemoryBlock b;
        b.kind = m.kind;
        b.id = m.id;
        b.score = m.score;
        b.confidence = m.confidence;
        if (m.kind == epmn::MemoryKind::Episode) {
            const auto* e = pool.find_episode(m.id);
            if (!e) continue;
            b.symptoms = e->symptoms;
            b.root_cause = e->root_cause;
            b.actions = e->actions;
            b.resolution_path = e->resolution_path;
        } else {
            const auto* p = pool.find_pattern(m.id);
            if (!p) continue;
            b.symptoms = p->symptoms;
            b.root_cause = p->strategy.root_cause;
            b.actions = p->strategy.actions;
            b.resolution_path = p->strategy.resolution_path;
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<ChainBlock> chain_blocks(const std::vector<graph::CausalChain>& chains, const graph::KnowledgeGraph& g) {
    std::vector<ChainBlock> out;
    out.reserve(chains.size());
    for (const auto& c : chains) {
        ChainBlock b;
        b.id = c.id();
        b.score = c.score;
        b.path_score = c.path_score;
        for (const auto& s : c.steps) {
            const auto* n = g.node(s.node);
            b.links.push_back(ChainLink{s.node, n ? n->label : s.node, s.via});
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::size_t block_tokens(const MemoryBlock& m) { return text::count_tokens(render(m, 0)); }
std::size_t block_tokens(const ChainBlock& c) { return text::count_tokens(render(c, 0)); }
std::size_t query_tokens(const Query& q, const std::string& logs) { return text::count_tokens(render(q, logs)); }

PromptContext build_context(const Query& q, std::vector<MemoryBlock> memories, std::vector<ChainBlock> chains,
                            ContextMode mode, const ContextConfig& cfg, std::string logs) {
    if (mode == ContextMode::Analytical && chains.empty())
        throw Error(ErrorCode::InvalidContext, "analytical context needs at least one causal chain");
    if (mode == ContextMode::Template && !chains.empty())
        throw Error(ErrorCode::InvalidContext, "template context cannot carry causal chains");

    PromptContext ctx;
    ctx.query = q;
    ctx.logs = std::move(logs);
    ctx.mode = mode;
    ctx.token_budget = cfg.token_budget;

    const std::size_t fixed = query_tokens(q, ctx.logs);
    std::size_t left = cfg.token_budget > fixed ? cfg.token_budget - fixed : 0;

    for (auto& m : memories) {
        const std::size_t t = block_tokens(m);
        if (t > left) break;
        left -= t;
        ctx.memories.push_back(std::move(m));
    }
    ctx.dropped_memories = memories.size() - ctx.memories.size();

    for (auto& c : chains) {
        const std::size_t t = block_tokens(c);
        if (!ctx.chains.empty() && t > left) break;
        left = t > left ? 0 : left - t;
        ctx.chains.push_back(std::move(c));
    }
    ctx.dropped_chains = chains.size() - ctx.chains.size();
    return ctx;
}

// ---- stub client -------------------------------------------------------------

Solution TemplateStubClient::solve(const PromptContext& ctx) {
    if (ctx.memories.empty() && ctx.chains.empty())
        throw Error(ErrorCode::NoEvidence, "no memories and no causal chains to synthesize from");

    Solution s;
    if (!ctx.memories.empty()) {
        const auto& top = ctx.memories.front();
        s.root_cause = top.root_cause;
        s.steps = top.actions;
        s.sources.push_back(top.id);
        s.confidence = std::clamp(top.confidence, 0.0, 1.0);
    }

    if (ctx.mode == ContextMode::Analytical && !ctx.chains.empty()) {
        const auto& chain = ctx.chains.front();
        for (std::size_t i = 0; i < chain.links.size(); ++i) {
            const auto& l = chain.links[i];
            if (i == 0)
                s.reasoning.push_back("observed: " + l.label);
            else
                s.reasoning.push_back(chain.links[i - 1].label + " " + graph::to_string(*l.via) + " " + l.label);
        }
        if (!chain.links.empty()) s.root_cause = chain.links.back().label;
        if (s.steps.empty()) {
            for (std::size_t i = 0; i + 1 < chain.links.size(); ++i) s.steps.push_back("inspect " + chain.links[i].label);
            s.steps.push_back("remediate " + s.root_cause);
        }
        s.sources.push_back(chain.id);
        s.confidence = std::max(s.confidence, std::clamp(chain.path_score, 0.0, 1.0));
    }

    if (s.root_cause.empty()) s.root_cause = "unspecified";
    if (s.steps.empty()) s.steps.push_back("review the resolution recorded for " + s.sources.front());
    return s;
}

std::string TemplateStubClient::complete(const std::string& request) {
    json j;
    try {
        j = json::parse(request);
    } catch (const json::exception& ex) {
        throw SynthesisFailure(std::string("stub: malformed request: ") + ex.what(), false);
    }
    return to_json(solve(context_from_json(j))).dump();
}

Solution synthesize(const PromptContext& ctx, SynthesisClient& client, const SynthesisOptions& opts) {
    if (ctx.memories.empty() && ctx.chains.empty())
        throw Error(ErrorCode::NoEvidence, "no memories and no causal chains to synthesize from");
    const std::string request = to_json(ctx).dump();

    for (std::size_t attempt = 0;; ++attempt) {
        std::string response;
        try {
            response = client.complete(request);
        } catch (const SynthesisFailure& f) {
            if (!f.retryable() || attempt >= opts.max_retries) throw;
            continue;
        }
        Solution s;
        try {
            s = solution_from_json(json::parse(response));
        } catch (const json::exception& ex) {
            throw SynthesisFailure(std::string("malformed solution: ") + ex.what(), false);
        } catch (const Error& ex) {
            if (ex.code() == ErrorCode::NoEvidence) throw;
            throw SynthesisFailure(std::string("malformed solution: ") + ex.what(), false);
        }
        const auto ids = ctx.ids();
        for (const auto& src : s.sources)
            if (!ids.count(src)) throw SynthesisFailure("solution cites '" + src + "', which is not in the context", false);
        return s;
    }
}

// ---- JSON ----------------------------------------------------------------------

json to_json(const PromptContext& ctx) {
    json memories = json::array();
    for (const auto& m : ctx.memories)
        memories.push_back({{"kind", epmn::to_string(m.kind)},
                            {"id", m.id},
                            {"score", m.score},
                            {"confidence", m.confidence},
                            {"symptoms", m.symptoms},
                            {"root_cause", m.root_cause},
                            {"actions", m.actions},
                            {"resolution_path", m.resolution_path}});
    json chains = json::array();
    for (const auto& c : ctx.chains) {
        json links = json::array();
        for (const auto& l : c.links)
            links.push_back({{"node", l.node},
                             {"label", l.label},
                             {"via", l.via ? json(graph::to_string(*l.via)) : json(nullptr)}});
        chains.push_back({{"id", c.id}, {"score", c.score}, {"path_score", c.path_score}, {"links", std::move(links)}});
    }
    return json{{"mode", to_string(ctx.mode)},
                {"query", kubediag::to_json(ctx.query)},
                {"logs", ctx.logs},
                {"memories", std::move(memories)},
                {"chains", std::move(chains)},
                {"token_budget", ctx.token_budget},
                {"dropped_memories", ctx.dropped_memories},
                {"dropped_chains", ctx.dropped_chains},
                {"document", ctx.document()}};
}

PromptContext context_from_json(const json& j) {
    PromptContext ctx;
    ctx.mode = context_mode_from_string(field<std::string>(j, "mode"));
    ctx.query = query_from_json(field<json>(j, "query"));
    ctx.logs = j.value("logs", std::string{});
    for (const auto& m : field<json>(j, "memories")) {
        MemoryBlock b;
        const auto kind = field<std::string>(m, "kind");
        if (kind != "episode" && kind != "pattern") throw Error(ErrorCode::SchemaViolation, "unknown memory kind");
        b.kind = kind == "episode" ? epmn::MemoryKind::Episode : epmn::MemoryKind::Pattern;
        b.id = field<std::string>(m, "id");
        b.score = field<double>(m, "score");
        b.confidence = field<double>(m, "confidence");
        b.symptoms = field<std::vector<std::string>>(m, "symptoms");
        b.root_cause = field<std::string>(m, "root_cause");
        b.actions = field<std::vector<std::string>>(m, "actions");
        b.resolution_path = field<std::vector<std::string>>(m, "resolution_path");
        ctx.memories.push_back(std::move(b));
    }
    for (const auto& c : field<json>(j, "chains")) {
        ChainBlock b;
        b.id = field<std::string>(c, "id");
        b.score = field<double>(c, "score");
        b.path_score = field<double>(c, "path_score");
        for (const auto& l : field<json>(c, "links")) {
            ChainLink link{field<std::string>(l, "node"), field<std::string>(l, "label"), std::nullopt};
            if (l.contains("via") && !l.at("via").is_null())
                link.via = graph::relation_from_string(field<std::string>(l, "via"));
            b.links.push_back(std::move(link));
        }
        ctx.chains.push_back(std::move(b));
    }
    ctx.token_budget = j.value("token_budget", std::size_t{0});
    ctx.dropped_memories = j.value("dropped_memories", std::size_t{0});
    ctx.dropped_chains = j.value("dropped_chains", std::size_t{0});
    if ((ctx.mode == ContextMode::Analytical) != !ctx.chains.empty())
        throw Error(ErrorCode::InvalidContext, "mode and chains disagree");
    return ctx;
}

json to_json(const Solution& s) {
    return json{{"root_cause", s.root_cause},
                {"steps", s.steps},
                {"reasoning", s.reasoning},
                {"confidence", s.confidence},
                {"sources", s.sources}};
}

void validate(const Solution& s) {
    if (s.steps.empty()) throw Error(ErrorCode::SchemaViolation, "solution has no steps");
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0))
        throw Error(ErrorCode::SchemaViolation, "solution confidence outside [0, 1]");
}

Solution solution_from_json(const json& j) {
    Solution s;
    s.root_cause = field<std::string>(j, "root_cause");
    s.steps = field<std::vector<std::string>>(j, "steps");
    s.reasoning = j.contains("reasoning") ? field<std::vector<std::string>>(j, "reasoning") : std::vector<std::string>{};
    s.confidence = field<double>(j, "confidence");
    s.sources = j.contains("sources") ? field<std::vector<std::string>>(j, "sources") : std::vector<std::string>{};
    validate(s);
    return s;
}

}  // namespace kubediag::synth

#include "kubediag/kubegraph.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "kubediag/errors.hpp"
#include "kubediag/text.hpp"

namespace kubediag::graph {

namespace {

constexpr std::array<const char*, kNodeTypeCount> kNodeTypeNames{
    "Pod", "Service", "Node", "Deployment", "Container", "Volume",
    "ConfigMap", "Secret", "Ingress", "Namespace", "Event", "RootCause"};

constexpr std::array<const char*, kRelationCount> kRelationNames{
    "depends_on", "manages", "causes", "mounts", "schedules_on", "exposes", "configures", "evicts"};

constexpr std::array<const char*, kCategoryCount> kCategoryNames{
    "Explanations", "ResourceErrors", "NetworkErrors", "SchedulingErrors",
    "ImageErrors", "ConfigurationErrors", "SystemErrors"};

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<const char*, N>& names, const char* what) {
    for (std::size_t i = 0; i < N; ++i)
        if (s == names[i]) return static_cast<E>(i);
    throw Error(ErrorCode::SchemaViolation, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

const char* to_string(NodeType t) noexcept { return kNodeTypeNames[static_cast<std::size_t>(t)]; }
const char* to_string(Relation r) noexcept { return kRelationNames[static_cast<std::size_t>(r)]; }
const char* to_string(Category c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }

NodeType node_type_from_string(std::string_view s) { return parse_enum<NodeType>(s, kNodeTypeNames, "node type"); }
Relation relation_from_string(std::string_view s) { return parse_enum<Relation>(s, kRelationNames, "relation"); }
Category category_from_string(std::string_view s) { return parse_enum<Category>(s, kCategoryNames, "category"); }

const std::array<Category, 6>& fault_categories() noexcept {
    static constexpr std::array<Category, 6> kFaults{Category::ResourceErrors,   Category::NetworkErrors,
                                                     Category::SchedulingErrors, Category::ImageErrors,
                                                     Category::ConfigurationErrors, Category::SystemErrors};
    return kFaults;
}

void SearchConfig::validate() const {
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "search config: alpha components must be >= 0");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "search config: alpha must sum to 1");
    if (max_hops < 1) throw Error(ErrorCode::InvalidArgument, "search config: max_hops must be >= 1");
    if (beam < 1) throw Error(ErrorCode::InvalidArgument, "search config: beam must be >= 1");
}

// ---- KnowledgeGraph -----------------------------------------------------------

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {
    if (!embedder_) throw Error(ErrorCode::InvalidArgument, "knowledge graph needs an embedder");
}

void KnowledgeGraph::upsert_node(const GraphNode& node) {
    if (node.id.empty()) throw Error(ErrorCode::SchemaViolation, "node without id");
    if (static_cast<std::size_t>(node.type) >= kNodeTypeCount)
        throw Error(ErrorCode::SchemaViolation, "node '" + node.id + "': invalid node type");
    if (node.category && static_cast<std::size_t>(*node.category) >= kCategoryCount)
        throw Error(ErrorCode::SchemaViolation, "node '" + node.id + "': invalid category");

    auto it = nodes_.find(node.id);
    if (it == nodes_.end()) {
        nodes_.emplace(node.id, node);
    } else {
        GraphNode merged = node;
        for (const auto& [k, v] : it->second.attributes) merged.attributes.emplace(k, v);
        if (!merged.category) merged.category = it->second.category;
        it->second = std::move(merged);
    }
    const std::string& label = node.label.empty() ? node.id : node.label;
    label_vecs_[node.id] = text::trim(label).empty() ? Vector(embedder_->dim(), 0.0) : embedder_->embed(label);
}

void KnowledgeGraph::add_edge(const GraphEdge& e) {
    if (static_cast<std::size_t>(e.relation) >= kRelationCount)
        throw Error(ErrorCode::SchemaViolation, "edge " + e.src + "->" + e.dst + ": invalid relation");
    if (!(e.weight > 0.0 && e.weight <= 1.0))
        throw Error(ErrorCode::SchemaViolation, "edge " + e.src + "->" + e.dst + ": weight outside (0, 1]");
    if (e.src == e.dst) throw Error(ErrorCode::SchemaViolation, "edge " + e.src + ": self loop");
    if (!nodes_.count(e.src) || !nodes_.count(e.dst))
        throw Error(ErrorCode::SchemaViolation, "edge " + e.src + "->" + e.dst + ": unknown endpoint");

    auto& list = out_[e.src];
    auto pos = std::lower_bound(list.begin(), list.end(), e, [](const GraphEdge& a, const GraphEdge& b) {
        return std::tie(a.relation, a.dst) < std::tie(b.relation, b.dst);
    });
    if (pos != list.end() && pos->relation == e.relation && pos->dst == e.dst) {
        pos->weight = std::max(pos->weight, e.weight);
    } else {
        list.insert(pos, e);
    }
}

void KnowledgeGraph::add_triple(const GraphNode& src, const GraphEdge& edge, const GraphNode& dst) {
    if (edge.src != src.id || edge.dst != dst.id)
        throw Error(ErrorCode::SchemaViolation, "triple endpoints do not match the edge");
    if (src.id == dst.id) throw Error(ErrorCode::SchemaViolation, "edge " + src.id + ": self loop");
    if (!(edge.weight > 0.0 && edge.weight <= 1.0))
        throw Error(ErrorCode::SchemaViolation, "edge " + edge.src + "->" + edge.dst + ": weight outside (0, 1]");
    upsert_node(src);
    upsert_node(dst);
    add_edge(edge);
}

double KnowledgeGraph::reinforce(const Triple& t) {
    if (!nodes_.count(t.src.id)) upsert_node(t.src);
    if (!nodes_.count(t.dst.id)) upsert_node(t.dst);
    if (const GraphEdge* existing = edge(t.edge.src, t.edge.relation, t.edge.dst)) {
        GraphEdge bumped = *existing;
        bumped.weight = std::min(1.0, existing->weight + 0.1);
        add_edge(bumped);
        return bumped.weight;
    }
    GraphEdge fresh = t.edge;
    fresh.weight = 0.5;
    add_edge(fresh);
    return fresh.weight;
}

const GraphNode* KnowledgeGraph::node(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const GraphEdge* KnowledgeGraph::edge(const std::string& src, Relation rel, const std::string& dst) const {
    for (const auto& e : out_edges(src))
        if (e.relation == rel && e.dst == dst) return &e;
    return nullptr;
}

std::span<const GraphEdge> KnowledgeGraph::out_edges(const std::string& id) const {
    auto it = out_.find(id);
    if (it == out_.end()) return {};
    return it->second;
}

std::vector<GraphEdge> KnowledgeGraph::edges() const {
    std::vector<GraphEdge> all;
    for (const auto& [src, list] : out_) all.insert(all.end(), list.begin(), list.end());
    return all;
}

std::size_t KnowledgeGraph::edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [src, list] : out_) n += list.size();
    return n;
}

std::size_t KnowledgeGraph::max_out_degree() const noexcept {
    std::size_t m = 0;
    for (const auto& [src, list] : out_) m = std::max(m, list.size());
    return m;
}

const Vector& KnowledgeGraph::label_embedding(const std::string& id) const {
    auto it = label_vecs_.find(id);
    if (it == label_vecs_.end()) throw Error(ErrorCode::NotFound, "node '" + id + "' not in graph");
    return it->second;
}

// ---- chains -------------------------------------------------------------------

std::vector<std::string> CausalChain::node_ids() const {
    std::vector<std::string> ids;
    ids.reserve(steps.size());
    for (const auto& s : steps) ids.push_back(s.node);
    return ids;
}

std::string CausalChain::id() const {
    std::string key;
    for (const auto& s : steps) {
        if (s.via) key += std::string("|") + to_string(*s.via) + "|";
        key += s.node;
    }
    return "chain-" + text::hex64(text::fnv1a64(key));
}

std::vector<std::string> seed_nodes(const KnowledgeGraph& g, std::span<const double> query, double threshold) {
    std::vector<std::pair<double, std::string>> hits;
    for (const auto& [id, n] : g.nodes()) {
        const double sim = cosine(g.label_embedding(id), query);
        if (sim >= threshold) hits.emplace_back(sim, id);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> out;
    out.reserve(hits.size());
    for (auto& h : hits) out.push_back(std::move(h.second));
    return out;
}

namespace {

using EdgeKey = std::pair<std::string, std::string>;

std::set<EdgeKey> edge_pairs(std::span<const ChainStep> p) {
    std::set<EdgeKey> e;
    for (std::size_t i = 1; i < p.size(); ++i) e.emplace(p[i - 1].node, p[i].node);
    return e;
}

}  // namespace

double path_prior(std::span<const ChainStep> path, const std::vector<std::vector<std::string>>& memory_paths) {
    const auto pe = edge_pairs(path);
    if (pe.empty()) return 0.0;
    double best = 0.0;
    for (const auto& mp : memory_paths) {
        std::set<EdgeKey> me;
        for (std::size_t i = 1; i < mp.size(); ++i) me.emplace(mp[i - 1], mp[i]);
        std::size_t common = 0;
        for (const auto& e : pe) common += me.count(e);
        best = std::max(best, static_cast<double>(common) / static_cast<double>(pe.size()));
    }
    return best;
}

double path_score(std::span<const ChainStep> path, const KnowledgeGraph& g) {
    if (path.size() < 2) throw Error(ErrorCode::InvalidPath, "path has no edges");
    double log_sum = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (!path[i].via) throw Error(ErrorCode::InvalidPath, "step " + path[i].node + " has no relation");
        const GraphEdge* e = g.edge(path[i - 1].node, *path[i].via, path[i].node);
        if (!e)
            throw Error(ErrorCode::InvalidPath, "missing edge " + path[i - 1].node + " -" + to_string(*path[i].via) +
                                                    "-> " + path[i].node);
        log_sum += std::log(e->weight);
    }
    return std::exp(log_sum / static_cast<double>(path.size() - 1));
}

double path_novelty(std::span<const ChainStep> path, const std::set<std::string>& visited) {
    if (path.empty()) return 0.0;
    std::size_t fresh = 0;
    for (const auto& s : path) fresh += visited.count(s.node) ? 0 : 1;
    return static_cast<double>(fresh) / static_cast<double>(path.size());
}

double priority(std::span<const ChainStep> path, const std::vector<std::vector<std::string>>& memory_paths,
                const std::set<std::string>& visited, const KnowledgeGraph& g, const SearchConfig& cfg) {
    return cfg.alpha[0] * path_prior(path, memory_paths) + cfg.alpha[1] * path_score(path, g) +
           cfg.alpha[2] * path_novelty(path, visited);
}

CausalChain make_chain(std::vector<ChainStep> steps, const std::vector<std::vector<std::string>>& memory_paths,
                       const std::set<std::string>& visited, const KnowledgeGraph& g, const SearchConfig& cfg) {
    CausalChain c;
    c.steps = std::move(steps);
    c.prior = path_prior(c.steps, memory_paths);
    c.path_score = path_score(c.steps, g);
    c.novelty = path_novelty(c.steps, visited);
    c.score = cfg.alpha[0] * c.prior + cfg.alpha[1] * c.path_score + cfg.alpha[2] * c.novelty;
    c.hop_count = c.steps.size() - 1;
    return c;
}

bool chain_before(const CausalChain& a, const CausalChain& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.path_score != b.path_score) return a.path_score > b.path_score;
    const std::size_t n = std::min(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < n; ++i)
        if (a.steps[i].node != b.steps[i].node) return a.steps[i].node < b.steps[i].node;
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    for (std::size_t i = 0; i < n; ++i)
        if (a.steps[i].via != b.steps[i].via) return a.steps[i].via < b.steps[i].via;
    return false;
}

std::vector<CausalChain> explore(const KnowledgeGraph& g, std::span<const double> query,
                                 const std::vector<std::vector<std::string>>& memory_paths,
                                 const std::set<std::string>& visited, const SearchConfig& cfg, ExploreStats* stats) {
    cfg.validate();
    ExploreStats local;
    ExploreStats& st = stats ? *stats : local;

    auto seeds = seed_nodes(g, query, cfg.seed_threshold);
    if (seeds.size() > cfg.beam) seeds.resize(cfg.beam);

    std::vector<CausalChain> frontier;
    for (const auto& s : seeds) {
        CausalChain c;
        c.steps.push_back({s, std::nullopt});
        frontier.push_back(std::move(c));
    }

    std::vector<CausalChain> results;
    for (std::size_t depth = 1; depth <= cfg.max_hops && !frontier.empty(); ++depth) {
        std::vector<CausalChain> generated;
        std::set<std::string> reached;
        for (const auto& path : frontier) {
            ++st.expanded;
            const std::string& tail = path.steps.back().node;
            for (const auto& e : g.out_edges(tail)) {
                const bool cycle = std::any_of(path.steps.begin(), path.steps.end(),
                                               [&](const ChainStep& s) { return s.node == e.dst; });
                if (cycle) continue;
                auto steps = path.steps;
                steps.push_back({e.dst, e.relation});
                generated.push_back(make_chain(std::move(steps), memory_paths, visited, g, cfg));
                reached.insert(e.dst);
                const GraphNode* n = g.node(e.dst);
                if (n && n->type == NodeType::RootCause) results.push_back(generated.back());
            }
        }
        st.visited += reached.size();
        if (depth == cfg.max_hops) break;

        // Rank end nodes by the best path reaching them; keep the top `beam` nodes.
        std::map<std::string, const CausalChain*> best_at;
        for (const auto& c : generated) {
            auto& slot = best_at[c.steps.back().node];
            if (!slot || chain_before(c, *slot)) slot = &c;
        }
        std::vector<std::pair<const CausalChain*, std::string>> ranked;
        for (const auto& [node, c] : best_at) ranked.emplace_back(c, node);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (chain_before(*a.first, *b.first)) return true;
            if (chain_before(*b.first, *a.first)) return false;
            return a.second < b.second;
        });
        std::set<std::string> keep;
        for (std::size_t i = 0; i < ranked.size() && i < cfg.beam; ++i) keep.insert(ranked[i].second);

        std::vector<CausalChain> next;
        for (auto& c : generated)
            if (keep.count(c.steps.back().node)) next.push_back(std::move(c));
        frontier = std::move(next);
    }

    std::sort(results.begin(), results.end(), chain_before);
    if (results.size() > cfg.n_chains) results.resize(cfg.n_chains);
    return results;
}

// ---- documents ----------------------------------------------------------------

KeywordClassifier::KeywordClassifier() {
    tables_ = {
        {Category::ResourceErrors,
         {"oomkilled", "out of memory", "cpu throttling", "throttled", "resource quota", "resourcequota",
          "exceeded quota", "memory leak", "memory limit", "pvc", "persistentvolumeclaim", "autoscaler", "hpa",
          "evicted", "disk pressure", "memory pressure"}},
        {Category::NetworkErrors,
         {"dns", "coredns", "service discovery", "network policy", "networkpolicy", "ingress", "load balancer",
          "loadbalancer", "cni", "connection refused", "connection timed out", "endpoints", "kube-proxy",
          "no route to host"}},
        {Category::SchedulingErrors,
         {"failedscheduling", "unschedulable", "node affinity", "affinity", "taint", "toleration",
          "insufficient cpu", "insufficient memory", "pod priority", "preemption", "daemonset", "nodeselector",
          "pending"}},
        {Category::ImageErrors,
         {"imagepullbackoff", "errimagepull", "image pull", "registry", "manifest unknown", "rate limit",
          "toomanyrequests", "private registry", "imagepullsecret", "multi-arch", "exec format error",
          "layer", "digest"}},
        {Category::ConfigurationErrors,
         {"configmap", "secret", "rbac", "forbidden", "admission webhook", "webhook", "environment variable",
          "env var", "helm", "values.yaml", "operator", "createcontainerconfigerror", "serviceaccount",
          "invalid configuration"}},
        {Category::SystemErrors,
         {"container runtime", "containerd", "dockerd", "kubelet", "etcd", "certificate", "x509",
          "kernel panic", "filesystem corruption", "read-only file system", "nodenotready", "notready",
          "api server", "apiserver"}},
    };
}

namespace {

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

Classification KeywordClassifier::classify(std::string_view cleaned) const {
    const std::string hay = text::lower(cleaned);
    std::size_t total = 0;
    std::size_t best_hits = 0;
    Category best = Category::Explanations;
    for (const auto& [cat, words] : tables_) {
        std::size_t hits = 0;
        for (const auto& w : words) hits += count_occurrences(hay, w);
        total += hits;
        if (hits > best_hits) {
            best_hits = hits;
            best = cat;
        }
    }
    if (best_hits == 0) return {Category::Explanations, 0.5};
    return {best, static_cast<double>(best_hits) / static_cast<double>(total)};
}

std::string clean_text(std::string_view raw) {
    static const std::regex tags("<[^>]*>");
    static const std::regex boilerplate(
        R"(^\s*(\[(nav|ad|advert|advertisement|comment|comments|footer|header|menu|cookie)\][^\n]*|)"
        R"((advertisement|sponsored|skip to (main )?content|share this( article| post)?|subscribe to [^\n]*|)"
        R"(accept (all )?cookies[^\n]*|sign in|log in|home\s*[>/|][^\n]*|leave a comment[^\n]*|\d+ comments?)\s*$))",
        std::regex::icase);

    std::string stripped = std::regex_replace(std::string(raw), tags, " ");
    std::istringstream lines(stripped);
    std::string line;
    std::string out;
    while (std::getline(lines, line)) {
        if (std::regex_match(line, boilerplate)) continue;
        std::istringstream words(line);
        std::string w;
        while (words >> w) {
            if (!out.empty()) out.push_back(' ');
            out += w;
        }
    }
    return out;
}

Document classify_document(std::string_view raw, const DocumentClassifier& classifier, std::string id,
                           DocumentMetadata metadata) {
    if (text::trim(raw).empty()) throw Error(ErrorCode::InvalidArgument, "classify_document: empty text");
    Document doc;
    doc.id = id.empty() ? "doc-" + text::hex64(text::fnv1a64(raw)) : std::move(id);
    doc.raw_text = std::string(raw);
    doc.cleaned_text = clean_text(raw);
    if (doc.cleaned_text.empty()) throw ClassificationFailure(doc.id, "document '" + doc.id + "' is empty after cleaning");
    Classification c;
    try {
        c = classifier.classify(doc.cleaned_text);
    } catch (const ClassificationFailure&) {
        throw;
    } catch (const std::exception& ex) {
        throw ClassificationFailure(doc.id, "document '" + doc.id + "': " + ex.what());
    }
    if (static_cast<std::size_t>(c.category) >= kCategoryCount || !(c.confidence >= 0.0 && c.confidence <= 1.0))
        throw ClassificationFailure(doc.id, "document '" + doc.id + "': classifier returned an invalid result");
    doc.category = c.category;
    doc.metadata = std::move(metadata);
    doc.metadata.confidence = c.confidence;
    return doc;
}

namespace {

std::string slug(const std::string& label) {
    std::string out;
    for (const auto& t : text::tokenize(label)) out += (out.empty() ? "" : "-") + t;
    return out;
}

std::optional<NodeType> object_type(const std::string& label) {
    static const std::vector<std::pair<const char*, NodeType>> words{
        {"pod", NodeType::Pod},           {"service", NodeType::Service},     {"node", NodeType::Node},
        {"deployment", NodeType::Deployment}, {"container", NodeType::Container}, {"volume", NodeType::Volume},
        {"pvc", NodeType::Volume},        {"configmap", NodeType::ConfigMap}, {"secret", NodeType::Secret},
        {"ingress", NodeType::Ingress},   {"namespace", NodeType::Namespace},
    };
    const auto tokens = text::tokenize(label);
    for (const auto& [w, type] : words)
        if (std::find(tokens.begin(), tokens.end(), w) != tokens.end()) return type;
    return std::nullopt;
}

std::string strip_article(std::string s) {
    s = text::trim(s);
    for (const char* a : {"the ", "a ", "an "}) {
        const std::size_t n = std::char_traits<char>::length(a);
        if (s.size() > n && text::lower(s.substr(0, n)) == a) return text::trim(s.substr(n));
    }
    return s;
}

}  // namespace

std::vector<Triple> extract_triples(const Document& doc) {
    static const std::regex statement(
        R"(^(.+?)\s+(causes|depends on|manages|mounts|schedules on|exposes|configures|evicts)\s+(.+)$)",
        std::regex::icase);
    static const std::map<std::string, Relation> relations{
        {"causes", Relation::Causes},         {"depends on", Relation::DependsOn},
        {"manages", Relation::Manages},       {"mounts", Relation::Mounts},     {"schedules on", Relation::SchedulesOn},
        {"exposes", Relation::Exposes},       {"configures", Relation::Configures}, {"evicts", Relation::Evicts},
    };
    const double weight = std::clamp(doc.metadata.confidence, 0.1, 1.0);
    std::optional<Category> category;
    if (doc.category != Category::Explanations) category = doc.category;

    std::vector<Triple> out;
    std::string sentence;
    std::istringstream in(doc.cleaned_text);
    while (std::getline(in, sentence, '.')) {
        std::istringstream parts(sentence);
        std::string clause;
        while (std::getline(parts, clause, ';')) {
            std::smatch m;
            const std::string c = text::trim(clause);
            if (!std::regex_match(c, m, statement)) continue;
            const Relation rel = relations.at(text::lower(m[2].str()));
            // Search walks from symptoms towards causes, so "X causes Y" is stored as Y -> X.
            const bool flip = rel == Relation::Causes;
            const std::string src_label = strip_article(m[flip ? 3 : 1].str());
            const std::string dst_label = strip_article(m[flip ? 1 : 3].str());
            if (slug(src_label).empty() || slug(dst_label).empty()) continue;

            GraphNode src{"n-" + slug(src_label), object_type(src_label).value_or(NodeType::Event), src_label, {}, category};
            const auto dst_kind = object_type(dst_label);
            GraphNode dst{"n-" + slug(dst_label),
                          dst_kind.value_or(rel == Relation::Causes ? NodeType::RootCause : NodeType::Event), dst_label,
                          {}, category};
            if (src.id == dst.id) continue;
            out.push_back(Triple{src, GraphEdge{src.id, dst.id, rel, weight}, dst});
        }
    }
    return out;
}

}  // namespace kubediag::graph

#include "kubediag/kubegraph_io.hpp"

#include <fstream>

#include "kubediag/errors.hpp"

namespace kubediag::graph {

using nlohmann::json;

namespace {

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

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

}  // namespace

json to_json(const GraphNode& n) {
    json j{{"id", n.id}, {"type", to_string(n.type)}, {"label", n.label}, {"attributes", n.attributes}};
    if (n.category) j["category"] = to_string(*n.category);
    return j;
}

GraphNode node_from_json(const json& j) {
    GraphNode n;
    n.id = field<std::string>(j, "id");
    n.type = node_type_from_string(field<std::string>(j, "type"));
    n.label = field_or<std::string>(j, "label", "");
    n.attributes = field_or<std::map<std::string, std::string>>(j, "attributes", {});
    if (j.contains("category") && !j.at("category").is_null())
        n.category = category_from_string(field<std::string>(j, "category"));
    return n;
}

json to_json(const GraphEdge& e) {
    return json{{"src", e.src}, {"dst", e.dst}, {"relation", to_string(e.relation)}, {"weight", e.weight}};
}

GraphEdge edge_from_json(const json& j) {
    GraphEdge e;
    e.src = field<std::string>(j, "src");
    e.dst = field<std::string>(j, "dst");
    e.relation = relation_from_string(field<std::string>(j, "relation"));
    e.weight = field_or<double>(j, "weight", 1.0);
    return e;
}

json to_json(const Triple& t) { return json{{"src", to_json(t.src)}, {"edge", to_json(t.edge)}, {"dst", to_json(t.dst)}}; }

Triple triple_from_json(const json& j) {
    Triple t;
    t.src = node_from_json(field<json>(j, "src"));
    t.dst = node_from_json(field<json>(j, "dst"));
    if (j.contains("edge")) {
        t.edge = edge_from_json(j.at("edge"));
    } else {
        t.edge.src = t.src.id;
        t.edge.dst = t.dst.id;
        t.edge.relation = relation_from_string(field<std::string>(j, "relation"));
        t.edge.weight = field_or<double>(j, "weight", 1.0);
    }
    return t;
}

json to_json(const CausalChain& c) {
    json steps = json::array();
    for (const auto& s : c.steps) {
        json step{{"node", s.node}};
        step["via"] = s.via ? json(to_string(*s.via)) : json(nullptr);
        steps.push_back(std::move(step));
    }
    return json{{"id", c.id()},         {"steps", std::move(steps)}, {"score", c.score},
                {"path_score", c.path_score}, {"prior", c.prior},   {"novelty", c.novelty},
                {"hop_count", c.hop_count}};
}

CausalChain chain_from_json(const json& j) {
    CausalChain c;
    for (const auto& s : field<json>(j, "steps")) {
        ChainStep step{field<std::string>(s, "node"), std::nullopt};
        if (s.contains("via") && !s.at("via").is_null()) step.via = relation_from_string(field<std::string>(s, "via"));
        c.steps.push_back(std::move(step));
    }
    c.score = field<double>(j, "score");
    c.path_score = field_or<double>(j, "path_score", 0.0);
    c.prior = field_or<double>(j, "prior", 0.0);
    c.novelty = field_or<double>(j, "novelty", 0.0);
    c.hop_count = c.steps.empty() ? 0 : c.steps.size() - 1;
    return c;
}

json to_json(const Document& d) {
    return json{{"id", d.id},
                {"raw_text", d.raw_text},
                {"cleaned_text", d.cleaned_text},
                {"category", to_string(d.category)},
                {"metadata",
                 {{"source", d.metadata.source},
                  {"timestamp", d.metadata.timestamp},
                  {"confidence", d.metadata.confidence}}}};
}

Document document_from_json(const json& j) {
    Document d;
    d.id = field<std::string>(j, "id");
    d.raw_text = field<std::string>(j, "raw_text");
    d.cleaned_text = field<std::string>(j, "cleaned_text");
    d.category = category_from_string(field<std::string>(j, "category"));
    const json m = field<json>(j, "metadata");
    d.metadata.source = field_or<std::string>(m, "source", "");
    d.metadata.timestamp = field_or<double>(m, "timestamp", 0.0);
    d.metadata.confidence = field<double>(m, "confidence");
    if (d.cleaned_text.empty()) throw Error(ErrorCode::SchemaViolation, "document '" + d.id + "': empty cleaned_text");
    if (!(d.metadata.confidence >= 0.0 && d.metadata.confidence <= 1.0))
        throw Error(ErrorCode::SchemaViolation, "document '" + d.id + "': confidence outside [0, 1]");
    return d;
}

json to_json(const SearchConfig& c) {
    return json{{"alpha", c.alpha},
                {"max_hops", c.max_hops},
                {"beam", c.beam},
                {"n_chains", c.n_chains},
                {"seed_threshold", c.seed_threshold}};
}

SearchConfig search_config_from_json(const json& j, SearchConfig c) {
    c.alpha = field_or(j, "alpha", c.alpha);
    c.max_hops = field_or(j, "max_hops", c.max_hops);
    c.beam = field_or(j, "beam", c.beam);
    c.n_chains = field_or(j, "n_chains", c.n_chains);
    c.seed_threshold = field_or(j, "seed_threshold", c.seed_threshold);
    c.validate();
    return c;
}

json to_json(const KnowledgeGraph& g) {
    json nodes = json::array();
    for (const auto& [id, n] : g.nodes()) nodes.push_back(to_json(n));
    json edges = json::array();
    for (const auto& e : g.edges()) edges.push_back(to_json(e));
    return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

KnowledgeGraph graph_from_json(const json& j, std::shared_ptr<const Embedder> embedder) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges") || !j.at("nodes").is_array() ||
        !j.at("edges").is_array())
        throw Error(ErrorCode::SchemaViolation, "graph file needs 'nodes' and 'edges' arrays");
    KnowledgeGraph g(std::move(embedder));
    for (const auto& n : j.at("nodes")) g.upsert_node(node_from_json(n));
    for (const auto& e : j.at("edges")) g.add_edge(edge_from_json(e));
    return g;
}

KnowledgeGraph load_graph(const std::filesystem::path& path, std::shared_ptr<const Embedder> embedder) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + ex.what());
    }
    return graph_from_json(j, std::move(embedder));
}

void save_graph(const std::filesystem::path& path, const KnowledgeGraph& g) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << to_json(g).dump(2) << '\n';
}

}  // namespace kubediag::graph

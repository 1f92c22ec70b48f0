#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "kubediag/controller.hpp"
#include "kubediag/embedder.hpp"
#include "kubediag/engine.hpp"
#include "kubediag/epmn.hpp"
#include "kubediag/kubegraph.hpp"
#include "kubediag/synthesizer.hpp"
#include "kubediag/text.hpp"

namespace testsupport {

using kubediag::Vector;

inline Vector random_unit(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> n;
    Vector v(d);
    double s = 0.0;
    for (auto& x : v) {
        x = n(rng);
        s += x * x;
    }
    s = std::sqrt(s);
    for (auto& x : v) x /= s;
    return v;
}

/// Unit vector at roughly `spread` angular noise around `center`.
inline Vector near(std::mt19937_64& rng, const Vector& center, double spread) {
    auto noise = random_unit(rng, center.size());
    Vector v(center.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = center[i] + spread * noise[i];
        s += v[i] * v[i];
    }
    s = std::sqrt(s);
    for (auto& x : v) x /= s;
    return v;
}

inline kubediag::epmn::Episode episode(std::string id, Vector embedding, double timestamp = 0.0,
                                       std::vector<std::string> symptoms = {"symptom"}) {
    kubediag::epmn::Episode e;
    e.id = std::move(id);
    e.symptoms = std::move(symptoms);
    e.embedding = std::move(embedding);
    e.timestamp = timestamp;
    e.actions = {"inspect"};
    e.root_cause = "cause";
    return e;
}

inline kubediag::epmn::Episode text_episode(const kubediag::Embedder& emb, std::string id,
                                            std::vector<std::string> symptoms, std::string root_cause,
                                            std::vector<std::string> actions, double timestamp,
                                            std::set<std::string> context = {}) {
    kubediag::epmn::Episode e;
    e.id = std::move(id);
    e.symptoms = std::move(symptoms);
    e.embedding = emb.embed(kubediag::text::join(e.symptoms, " "));
    e.root_cause = std::move(root_cause);
    e.actions = std::move(actions);
    e.timestamp = timestamp;
    e.context = std::move(context);
    return e;
}

inline std::shared_ptr<kubediag::HashEmbedder> embedder() { return std::make_shared<kubediag::HashEmbedder>(256); }

/// symptom event -> pod -> root cause, plus an unrelated branch.
inline kubediag::graph::KnowledgeGraph small_graph(std::shared_ptr<const kubediag::Embedder> emb) {
    using namespace kubediag::graph;
    KnowledgeGraph g(std::move(emb));
    const GraphNode ev{"ev", NodeType::Event, "pod crash loop back off restarting", {}, std::nullopt};
    const GraphNode pod{"pod", NodeType::Pod, "application pod", {}, std::nullopt};
    const GraphNode rc{"rc", NodeType::RootCause, "missing environment variable", {}, std::nullopt};
    const GraphNode other{"other", NodeType::Event, "disk latency alarms", {}, std::nullopt};
    const GraphNode rc2{"rc2", NodeType::RootCause, "slow disk", {}, std::nullopt};
    g.add_triple(ev, GraphEdge{"ev", "pod", Relation::DependsOn, 0.8}, pod);
    g.add_triple(pod, GraphEdge{"pod", "rc", Relation::Causes, 0.7}, rc);
    g.add_triple(other, GraphEdge{"other", "rc2", Relation::Causes, 0.9}, rc2);
    return g;
}

inline kubediag::Engine make_engine(kubediag::graph::KnowledgeGraph g, kubediag::EngineConfig cfg = {},
                                    std::shared_ptr<kubediag::HashEmbedder> emb = embedder()) {
    return kubediag::Engine(cfg, emb, std::move(g), std::make_shared<kubediag::synth::TemplateStubClient>());
}

/// Random labelled multigraph with roughly a third of the nodes typed
/// RootCause. Labels come from a small vocabulary so several nodes can match
/// the same query. Returns the query embedding through `query`.
inline kubediag::graph::KnowledgeGraph random_graph(std::mt19937_64& rng, std::shared_ptr<const kubediag::Embedder> emb,
                                                     std::size_t n_nodes, std::size_t n_edges, Vector& query) {
    using namespace kubediag::graph;
    static const std::vector<std::string> words{"pod",   "crash", "node",    "disk", "image", "dns",
                                                "quota", "probe", "restart", "oom",  "taint", "secret"};
    KnowledgeGraph g(emb);
    std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        GraphNode n;
        n.id = "v" + std::to_string(i);
        n.label = words[word(rng)] + " " + words[word(rng)];
        n.type = rng() % 3 == 0 ? NodeType::RootCause : static_cast<NodeType>(rng() % 10);
        g.upsert_node(n);
        ids.push_back(n.id);
    }
    std::uniform_int_distribution<std::size_t> pick(0, n_nodes - 1);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    for (std::size_t i = 0; i < n_edges; ++i) {
        const auto a = pick(rng), b = pick(rng);
        if (a == b) continue;
        g.add_edge(GraphEdge{ids[a], ids[b], static_cast<Relation>(rng() % kRelationCount), w(rng)});
    }
    query = emb->embed(g.node(ids[pick(rng)])->label);
    return g;
}

/// Replay buffer with c_max ~ U[0,1] and P(fast_sufficient | c) = sigmoid(k (c - c0)).
inline kubediag::control::History threshold_history(std::mt19937_64& rng, std::size_t n, double c0, double k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    kubediag::control::History h;
    for (std::size_t i = 0; i < n; ++i) {
        kubediag::control::SessionRecord r;
        r.query_id = "q" + std::to_string(i);
        r.c_max = u(rng);
        r.fast_sufficient = u(rng) < 1.0 / (1.0 + std::exp(-k * (r.c_max - c0)));
        r.pathway = r.c_max > 0.75 ? kubediag::Pathway::Intuitive : kubediag::Pathway::Analytical;
        r.outcome = r.fast_sufficient ? kubediag::Outcome::Success : kubediag::Outcome::Failure;
        h.push_back(r);
    }
    return h;
}

/// Same shape with stratified c_max and golden-ratio labels instead of
/// Bernoulli draws, so the replay loss has a single well-separated minimum.
inline kubediag::control::History stratified_threshold_history(std::mt19937_64& rng, std::size_t n, double c0,
                                                               double k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double offset = u(rng);
    kubediag::control::History h;
    for (std::size_t i = 0; i < n; ++i) {
        kubediag::control::SessionRecord r;
        r.query_id = "q" + std::to_string(i);
        r.c_max = (static_cast<double>(i) + u(rng)) / static_cast<double>(n);
        const double level = std::fmod(offset + 0.6180339887498949 * static_cast<double>(i), 1.0);
        r.fast_sufficient = level < 1.0 / (1.0 + std::exp(-k * (r.c_max - c0)));
        r.outcome = r.fast_sufficient ? kubediag::Outcome::Success : kubediag::Outcome::Failure;
        h.push_back(r);
    }
    return h;
}

/// Records whose sufficiency depends strongly on similarity and not at all
/// on context, so the all-ones exponents start out miscalibrated.
inline kubediag::control::History calibration_history(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    kubediag::control::History h;
    for (std::size_t i = 0; i < n; ++i) {
        kubediag::control::SessionRecord r;
        r.query_id = "q" + std::to_string(i);
        kubediag::epmn::Factors f{0.4 + 0.6 * u(rng), 0.5 + 0.5 * u(rng), 0.3 + 0.7 * u(rng), 0.05 + 0.95 * u(rng)};
        r.factors_of_best = f;
        r.c_max = f[0] * f[1] * f[2] * f[3];
        r.fast_sufficient = u(rng) < std::pow(f[0], 3.0);
        h.push_back(r);
    }
    return h;
}

}  // namespace testsupport

#include <doctest.h>

#include <cmath>
#include <random>

#include "kubediag/errors.hpp"
#include "kubediag/kubegraph.hpp"
#include "kubediag/kubegraph_io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kubediag;
using namespace kubediag::graph;

namespace {

std::vector<ChainStep> steps(std::initializer_list<std::pair<const char*, std::optional<Relation>>> s) {
    std::vector<ChainStep> out;
    for (const auto& [n, r] : s) out.push_back({n, r});
    return out;
}

}  // namespace

TEST_CASE("enum names round-trip and unknown names are rejected") {
    for (std::size_t i = 0; i < kRelationCount; ++i) {
        const auto r = static_cast<Relation>(i);
        CHECK(relation_from_string(to_string(r)) == r);
    }
    for (std::size_t i = 0; i < kNodeTypeCount; ++i) {
        const auto t = static_cast<NodeType>(i);
        CHECK(node_type_from_string(to_string(t)) == t);
    }
    CHECK_THROWS_AS(relation_from_string("Teleports"), Error);
    CHECK_THROWS_AS(category_from_string("Nope"), Error);
}

TEST_CASE("add_triple upserts nodes and keeps the larger duplicate weight") {
    auto g = testsupport::small_graph(testsupport::embedder());
    CHECK(g.node_count() == 5);
    CHECK(g.edge_count() == 3);
    g.add_edge(GraphEdge{"ev", "pod", Relation::DependsOn, 0.3});
    CHECK(g.edge("ev", Relation::DependsOn, "pod")->weight == doctest::Approx(0.8));
    g.add_edge(GraphEdge{"ev", "pod", Relation::DependsOn, 0.95});
    CHECK(g.edge("ev", Relation::DependsOn, "pod")->weight == doctest::Approx(0.95));
    g.add_edge(GraphEdge{"ev", "pod", Relation::Manages, 0.2});
    CHECK(g.edge_count() == 4);
    CHECK_THROWS_AS(g.add_edge(GraphEdge{"ev", "ghost", Relation::Causes, 0.5}), Error);
    CHECK_THROWS_AS(g.add_edge(GraphEdge{"ev", "pod", Relation::Causes, 0.0}), Error);
    CHECK_THROWS_AS(g.add_edge(GraphEdge{"ev", "pod", Relation::Causes, 1.5}), Error);
}

TEST_CASE("reinforce starts new edges at 0.5, adds 0.1 per confirmation, caps at 1") {
    auto g = testsupport::small_graph(testsupport::embedder());
    const GraphNode a{"a", NodeType::Pod, "a pod", {}, std::nullopt};
    const GraphNode b{"b", NodeType::RootCause, "b cause", {}, std::nullopt};
    const Triple t{a, GraphEdge{"a", "b", Relation::Causes, 0.9}, b};
    CHECK(g.reinforce(t) == doctest::Approx(0.5));
    CHECK(g.reinforce(t) == doctest::Approx(0.6));
    for (int i = 0; i < 10; ++i) g.reinforce(t);
    CHECK(g.edge("a", Relation::Causes, "b")->weight == doctest::Approx(1.0));
}

TEST_CASE("path formulas") {
    auto g = testsupport::small_graph(testsupport::embedder());
    const auto p = steps({{"ev", std::nullopt}, {"pod", Relation::DependsOn}, {"rc", Relation::Causes}});
    CHECK(path_score(p, g) == doctest::Approx(std::sqrt(0.8 * 0.7)));
    CHECK(path_prior(p, {{"ev", "pod"}, {"x", "pod", "rc"}}) == doctest::Approx(0.5));
    CHECK(path_prior(p, {}) == doctest::Approx(0.0));
    CHECK(path_novelty(p, {"pod"}) == doctest::Approx(2.0 / 3.0));
    SearchConfig cfg;
    CHECK(priority(p, {{"ev", "pod", "rc"}}, {"ev"}, g, cfg) ==
          doctest::Approx(0.5 * 1.0 + 0.3 * std::sqrt(0.56) + 0.2 * (2.0 / 3.0)));
    CHECK_THROWS_AS(path_score(steps({{"ev", std::nullopt}}), g), Error);
    CHECK_THROWS_AS(path_score(steps({{"ev", std::nullopt}, {"rc", Relation::Causes}}), g), Error);
}

TEST_CASE("explore finds the chain from the matching symptom") {
    auto emb = testsupport::embedder();
    auto g = testsupport::small_graph(emb);
    const auto q = emb->embed("pod crash loop back off restarting");
    const auto chains = explore(g, q, {}, {}, SearchConfig{});
    REQUIRE(chains.size() == 1);
    CHECK(chains[0].node_ids() == std::vector<std::string>{"ev", "pod", "rc"});
    CHECK(chains[0].hop_count == 2);
    CHECK(chains[0].id() == explore(g, q, {}, {}, SearchConfig{})[0].id());
    CHECK(explore(g, emb->embed("unrelated words entirely"), {}, {}, SearchConfig{}).empty());
}

TEST_CASE("memory paths bias the ranking") {
    auto emb = testsupport::embedder();
    KnowledgeGraph g(emb);
    const GraphNode ev{"ev", NodeType::Event, "probe failures", {}, std::nullopt};
    const GraphNode r1{"r1", NodeType::RootCause, "first", {}, std::nullopt};
    const GraphNode r2{"r2", NodeType::RootCause, "second", {}, std::nullopt};
    g.add_triple(ev, GraphEdge{"ev", "r1", Relation::Causes, 0.9}, r1);
    g.add_triple(ev, GraphEdge{"ev", "r2", Relation::Causes, 0.6}, r2);
    const auto q = emb->embed("probe failures");
    CHECK(explore(g, q, {}, {}, SearchConfig{})[0].steps.back().node == "r1");
    CHECK(explore(g, q, {{"ev", "r2"}}, {}, SearchConfig{})[0].steps.back().node == "r2");
}

TEST_CASE("explore equals exhaustive enumeration when the beam covers the graph") {
    std::mt19937_64 rng(5);
    auto emb = testsupport::embedder();
    for (int trial = 0; trial < 40; ++trial) {
        Vector q;
        const std::size_t n = 5 + rng() % 30;
        auto g = testsupport::random_graph(rng, emb, n, n * 2, q);
        SearchConfig cfg;
        cfg.beam = n;
        cfg.n_chains = 1 + rng() % 8;
        std::vector<std::vector<std::string>> mem{{"v0", "v1", "v2"}, {"v3", "v1"}};
        const std::set<std::string> visited{"v1", "v4"};
        CHECK(oracle::same_chains(explore(g, q, mem, visited, cfg), oracle::enumerate_chains(g, q, mem, visited, cfg)));
    }
}

TEST_CASE("a narrow beam bounds the frontier") {
    std::mt19937_64 rng(9);
    auto emb = testsupport::embedder();
    Vector q;
    auto g = testsupport::random_graph(rng, emb, 40, 160, q);
    SearchConfig cfg;
    cfg.beam = 2;
    ExploreStats st;
    explore(g, q, {}, {}, cfg, &st);
    // at most beam end nodes survive each level, and at most beam seeds start
    CHECK(st.visited <= 40 * cfg.max_hops);
    CHECK(st.expanded > 0);
}

TEST_CASE("keyword classifier and document cleaning") {
    KeywordClassifier clf;
    CHECK(clf.classify("Pod stuck in ImagePullBackOff after registry change").category == Category::ImageErrors);
    CHECK(clf.classify("CoreDNS lookups fail with connection refused").category == Category::NetworkErrors);
    const auto none = clf.classify("a general introduction to containers");
    CHECK(none.category == Category::Explanations);
    CHECK(clean_text("<p>Hello</p>\n[nav] Home Docs\n  world   again \nAdvertisement\n") == "Hello world again");
    CHECK_THROWS_AS(classify_document("   ", clf), Error);
    CHECK_THROWS_AS(classify_document("<div></div>\nAdvertisement", clf), ClassificationFailure);
    const auto doc = classify_document("The pod was OOMKilled: memory limit too low.", clf, "d1");
    CHECK(doc.category == Category::ResourceErrors);
    CHECK(doc.metadata.confidence == doctest::Approx(1.0));
}

TEST_CASE("extract_triples reads relation statements") {
    Document doc;
    doc.id = "d";
    doc.category = Category::ResourceErrors;
    doc.metadata.confidence = 0.8;
    doc.cleaned_text = "A memory leak causes OOMKilled restarts. The deployment manages the pod; nothing here.";
    const auto ts = extract_triples(doc);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].edge.relation == Relation::Causes);
    CHECK(ts[0].src.label == "OOMKilled restarts");
    CHECK(ts[0].dst.label == "memory leak");
    CHECK(ts[0].dst.type == NodeType::RootCause);
    CHECK(ts[0].edge.weight == doctest::Approx(0.8));
    CHECK(ts[1].edge.relation == Relation::Manages);
    CHECK(ts[1].src.type == NodeType::Deployment);
    CHECK(ts[1].dst.type == NodeType::Pod);
}

TEST_CASE("graph JSON round-trip is byte-stable") {
    auto emb = testsupport::embedder();
    const auto g = testsupport::small_graph(emb);
    const auto j = to_json(g);
    const auto back = graph_from_json(j, emb);
    CHECK(to_json(back).dump() == j.dump());
    auto bad = j;
    bad["edges"][0]["relation"] = "Teleports";
    CHECK_THROWS_AS(graph_from_json(bad, emb), Error);
}

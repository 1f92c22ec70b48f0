#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "kubediag/embedder.hpp"
#include "kubediag/epmn.hpp"
#include "kubediag/harness.hpp"
#include "kubediag/kubegraph.hpp"

using namespace kubediag;

namespace {

kubediag::Vector random_unit(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> n;
    kubediag::Vector v(d);
    for (auto& x : v) x = n(rng);
    normalize(v);
    return v;
}

// Clustered pool: `clusters` patterns each owning an equal share of episodes.
epmn::MemoryPool clustered_pool(std::size_t size, std::size_t clusters, std::size_t d) {
    std::mt19937_64 rng(7);
    epmn::MemoryPool pool(size + 1);
    std::vector<kubediag::Vector> centers;
    for (std::size_t c = 0; c < clusters; ++c) centers.push_back(random_unit(rng, d));
    std::vector<std::vector<std::string>> members(clusters);
    for (std::size_t i = 0; i < size; ++i) {
        const std::size_t c = i % clusters;
        auto noise = random_unit(rng, d);
        kubediag::Vector v(d);
        for (std::size_t k = 0; k < d; ++k) v[k] = centers[c][k] + 0.3 * noise[k];
        normalize(v);
        epmn::Episode e;
        e.id = "ep-" + std::to_string(i);
        e.symptoms = {"symptom"};
        e.embedding = v;
        e.timestamp = static_cast<double>(i);
        e.trials = 1;
        e.successes = 1;
        pool.insert(std::move(e));
        members[c].push_back("ep-" + std::to_string(i));
    }
    std::vector<epmn::Pattern> patterns;
    for (std::size_t c = 0; c < clusters; ++c) {
        std::vector<const epmn::Episode*> eps;
        for (const auto& id : members[c]) eps.push_back(pool.find_episode(id));
        patterns.push_back(epmn::abstract_pattern(pool.next_pattern_id(), members[c].front(), eps));
    }
    pool.upsert_patterns(std::move(patterns));
    return pool;
}

void run_retrieval(benchmark::State& state, epmn::SearchMode mode) {
    const std::size_t size = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 64;
    const auto pool = clustered_pool(size, std::max<std::size_t>(1, size / 50), d);
    std::mt19937_64 rng(11);
    epmn::EpmnConfig cfg;
    cfg.embedding_dim = d;
    epmn::Probe q{random_unit(rng, d), {"symptom"}, {}};
    const epmn::FactorWeights w{1, 1, 1, 1};
    for (auto _ : state) benchmark::DoNotOptimize(epmn::retrieve(q, pool, w, cfg, 1e6, mode));
}

void BM_RetrieveIndexed(benchmark::State& s) { run_retrieval(s, epmn::SearchMode::Indexed); }
void BM_RetrieveExhaustive(benchmark::State& s) { run_retrieval(s, epmn::SearchMode::Exhaustive); }

void BM_Embed(benchmark::State& state) {
    const HashEmbedder e(256);
    const std::string text = "container terminated with reason OOMKilled exit code 137 reported by kubelet";
    for (auto _ : state) benchmark::DoNotOptimize(e.embed(text));
}

void BM_Explore(benchmark::State& state) {
    auto embedder = std::make_shared<HashEmbedder>(256);
    const auto g = harness::reference_graph(embedder);
    const auto q = embedder->embed("container terminated with reason OOMKilled restart count keeps climbing");
    const graph::SearchConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(graph::explore(g, q, {}, {}, cfg));
}

}  // namespace

BENCHMARK(BM_RetrieveIndexed)->Arg(1000)->Arg(10000);
BENCHMARK(BM_RetrieveExhaustive)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Embed);
BENCHMARK(BM_Explore);

BENCHMARK_MAIN();

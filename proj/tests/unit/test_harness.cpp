#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "kubediag/errors.hpp"
#include "kubediag/harness.hpp"
#include "support.hpp"

using namespace kubediag;
using namespace kubediag::harness;

namespace {

// Hamilton's method written out directly.
std::vector<std::size_t> hamilton(std::size_t total, const std::vector<double>& w) {
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<std::size_t> seats(w.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t given = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double quota = total * w[i] / sum;
        seats[i] = static_cast<std::size_t>(std::floor(quota));
        given += seats[i];
        rema.emplace_back(quota - std::floor(quota), i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; given < total; ++k, ++given) seats[rema[k].second]++;
    return seats;
}

Engine reference_engine(bool memory = true) {
    auto emb = testsupport::embedder();
    EngineConfig cfg;
    cfg.memory_enabled = memory;
    return testsupport::make_engine(reference_graph(emb), cfg, emb);
}

std::map<graph::Category, std::size_t> counts(const std::vector<FaultScenario>& s) {
    std::map<graph::Category, std::size_t> c;
    for (const auto& x : s) c[x.category]++;
    return c;
}

}  // namespace

TEST_CASE("scenario lines load with per-line errors") {
    std::stringstream empty;
    CHECK(read_scenarios(empty).scenarios.empty());
    auto s = generate_scenarios(1, 1)[0];
    std::stringstream in(to_json(s).dump() + "\n\n{\"id\":\"x\"}\n");
    const auto load = read_scenarios(in);
    CHECK(load.scenarios.size() == 1);
    REQUIRE(load.errors.size() == 1);
    CHECK(load.errors[0].line() == 3);
    CHECK(load.errors[0].code() == ErrorCode::ScenarioParseError);
    CHECK_THROWS_AS(load_scenarios("/nonexistent/scenarios.jsonl"), Error);
}

TEST_CASE("save and load round-trip") {
    const auto corpus = generate_scenarios(9, 30);
    std::stringstream buf;
    write_scenarios(buf, corpus);
    const auto back = read_scenarios(buf);
    REQUIRE(back.scenarios.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(to_json(back.scenarios[i]) == to_json(corpus[i]));
}

TEST_CASE("scenario validation and log truncation") {
    auto s = generate_scenarios(1, 1)[0];
    auto bad = s;
    bad.symptoms.clear();
    CHECK_THROWS_AS(validate(bad), Error);
    bad = s;
    bad.category = graph::Category::Explanations;
    CHECK_THROWS_AS(validate(bad), Error);
    auto j = to_json(s);
    std::string long_log;
    for (int i = 0; i < 3000; ++i) long_log += "tok ";
    j["logs"] = long_log;
    const auto t = scenario_from_json(j);
    CHECK(text::tokenize(t.logs).size() == kMaxLogTokens);
}

TEST_CASE("apportionment matches Hamilton's method") {
    std::vector<double> w;
    for (const auto& [c, share] : default_mix()) w.push_back(share);
    for (std::size_t total : {1, 7, 50, 100, 200, 1873, 5000}) CHECK(apportion(total, w) == hamilton(total, w));
    CHECK(apportion(1873, w) == std::vector<std::size_t>{412, 387, 298, 276, 315, 185});
    CHECK(apportion(3, {1, 1, 1, 1}) == std::vector<std::size_t>{1, 1, 1, 0});
}

TEST_CASE("generated corpora follow the mix and are deterministic") {
    const auto a = generate_scenarios(42, 100);
    std::vector<double> w;
    for (const auto& [c, share] : default_mix()) w.push_back(share);
    const auto want = hamilton(100, w);
    const auto got = counts(a);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(got.at(default_mix()[i].first) == want[i]);
    std::stringstream x, y;
    write_scenarios(x, a);
    write_scenarios(y, generate_scenarios(42, 100));
    CHECK(x.str() == y.str());
    std::stringstream z;
    write_scenarios(z, generate_scenarios(43, 100));
    CHECK(z.str() != x.str());

    const auto one = generate_scenarios(3, 1, {{graph::Category::ImageErrors, 1.0}});
    REQUIRE(one.size() == 1);
    CHECK(one[0].category == graph::Category::ImageErrors);
    CHECK_THROWS_AS(generate_scenarios(3, 0), Error);
    CHECK_THROWS_AS(generate_scenarios(3, 10, {{graph::Category::ImageErrors, 0.5}}), Error);
}

TEST_CASE("template bank shape") {
    const auto& ts = scenario_templates();
    CHECK(ts.size() == 30);
    std::size_t decoys = 0;
    for (const auto& t : ts) {
        CHECK(t.symptoms.size() == 4);
        decoys += t.decoy.has_value();
    }
    CHECK(decoys == 12);
}

TEST_CASE("symptom events of different templates are far apart") {
    auto emb = testsupport::embedder();
    const auto& ts = scenario_templates();
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
            const auto a = emb->embed(text::join(ts[i].symptoms, " "));
            const auto b = emb->embed(text::join(ts[j].symptoms, " "));
            CHECK_MESSAGE(cosine(a, b) < 0.5, ts[i].key << " vs " << ts[j].key);
        }
}

TEST_CASE("graph search alone is right on plain templates and misled by decoys") {
    auto engine = reference_engine(false);
    const auto corpus = generate_scenarios(11, 200);
    std::map<std::string, const ScenarioTemplate*> by_cause;
    for (const auto& t : scenario_templates()) by_cause[t.root_cause] = &t;
    for (const auto& s : corpus) {
        const auto d = engine.diagnose_via(to_query(s), Pathway::Analytical, 0.0);
        const auto* t = by_cause.at(s.ground_truth_root_cause);
        CHECK_MESSAGE(root_cause_matches(d.solution.root_cause, s.ground_truth_root_cause) == !t->decoy.has_value(),
                      t->key);
    }
}

TEST_CASE("root cause scoring is symmetric") {
    CHECK(root_cause_score("memory limit too low", "memory limit too low") == doctest::Approx(1.0));
    CHECK(root_cause_score("a b c", "a b") == doctest::Approx(2.0 / 3.0));
    CHECK(root_cause_score("a b", "a b c") == doctest::Approx(2.0 / 3.0));
    CHECK(root_cause_score("", "x") == doctest::Approx(0.0));
    CHECK(root_cause_matches("a b c", "a b"));
    CHECK_FALSE(root_cause_matches("a b c d", "a b"));
}

TEST_CASE("no recurrence and empty memory starts analytical") {
    auto engine = reference_engine();
    SimulationConfig cfg;
    cfg.recurrence = 0.0;
    cfg.window = 20;
    const auto r = run_continuous(engine, generate_scenarios(5, 60), cfg);
    REQUIRE_FALSE(r.curve.windows.empty());
    CHECK(r.curve.windows[0].intuitive_rate <= 0.05);
    CHECK(r.sessions.size() == 60);
}

TEST_CASE("full recurrence of one scenario ends fully intuitive") {
    auto engine = reference_engine();
    SimulationConfig cfg;
    cfg.recurrence = 1.0;
    cfg.epochs = 60;
    cfg.window = 10;
    const auto r = run_continuous(engine, generate_scenarios(6, 1), cfg);
    CHECK(r.curve.windows.back().intuitive_rate == doctest::Approx(1.0));
}

TEST_CASE("simulation is deterministic and the trace reproduces the curve") {
    const auto corpus = generate_scenarios(8, 80);
    SimulationConfig cfg;
    cfg.window = 20;
    auto e1 = reference_engine();
    auto e2 = reference_engine();
    const auto r1 = run_continuous(e1, corpus, cfg);
    const auto r2 = run_continuous(e2, corpus, cfg);
    CHECK(r1.curve.to_csv() == r2.curve.to_csv());
    std::stringstream t1, t2;
    e1.write_trace(t1);
    e2.write_trace(t2);
    CHECK(t1.str() == t2.str());
    CHECK(curve_from_trace(t1, cfg.window).to_csv() == r1.curve.to_csv());
    CHECK(r1.curve.to_csv().rfind("window,accuracy,intuitive_rate,mean_latency_units,tau\n", 0) == 0);
}

TEST_CASE("ablation of two memoryless engines has zero delta") {
    auto a = reference_engine(false);
    auto b = reference_engine(false);
    const auto rep = evaluate_ablation(a, b, generate_scenarios(4, 60), SimulationConfig{});
    CHECK(rep.accuracy_gain == doctest::Approx(0.0));
    CHECK(rep.latency_change == doctest::Approx(0.0));
    CHECK(rep.sessions == 60);
}

TEST_CASE("memory does not help a corpus with one scenario per template") {
    std::vector<FaultScenario> disjoint;
    std::set<std::string> seen;
    for (const auto& s : generate_scenarios(4, 600))
        if (seen.insert(s.ground_truth_root_cause).second) disjoint.push_back(s);
    REQUIRE(disjoint.size() == scenario_templates().size());
    auto a = reference_engine(true);
    auto b = reference_engine(false);
    SimulationConfig cfg;
    cfg.recurrence = 0.0;
    const auto rep = evaluate_ablation(a, b, disjoint, cfg);
    CHECK(std::abs(rep.accuracy_gain) <= 0.05);
}

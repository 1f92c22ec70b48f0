#include <doctest.h>

#include <algorithm>
#include <functional>

#include "kubediag/errors.hpp"
#include "kubediag/synthesizer.hpp"
#include "support.hpp"

using namespace kubediag;
using namespace kubediag::synth;

namespace {

Query query() {
    Query q;
    q.id = "q1";
    q.symptoms = {"pod restarting", "oom killed"};
    q.context = {"ns:prod"};
    return q;
}

MemoryBlock block(std::string id, double score) {
    MemoryBlock m;
    m.id = std::move(id);
    m.score = score;
    m.confidence = 0.6;
    m.symptoms = {"pod restarting with exit code 137"};
    m.root_cause = "memory limit too low";
    m.actions = {"kubectl describe pod", "increase memory limit"};
    return m;
}

ChainBlock chain2() {
    ChainBlock c;
    c.id = "chain-1";
    c.score = 0.7;
    c.path_score = 0.8;
    c.links = {{"ev", "oom events", std::nullopt}, {"rc", "leaking cache", graph::Relation::Causes}};
    return c;
}

struct ScriptedClient : SynthesisClient {
    std::vector<std::function<std::string()>> script;
    std::size_t calls = 0;
    std::string complete(const std::string&) override { return script.at(calls++)(); }
};

std::string good_answer() {
    Solution s;
    s.root_cause = "x";
    s.steps = {"y"};
    s.confidence = 0.5;
    s.sources = {"m0"};
    return to_json(s).dump();
}

}  // namespace

TEST_CASE("template context with one memory") {
    const auto ctx = build_context(query(), {block("m0", 0.9)}, {}, ContextMode::Template);
    CHECK(ctx.memories.size() == 1);
    CHECK(ctx.chains.empty());
    CHECK(ctx.ids() == std::set<std::string>{"m0"});
}

TEST_CASE("budget keeps the top-ranked memories") {
    std::vector<MemoryBlock> ms;
    for (int i = 0; i < 20; ++i) ms.push_back(block("m" + std::to_string(i), 1.0 - 0.01 * i));
    const std::size_t per = block_tokens(ms[0]);
    ContextConfig cfg;
    cfg.token_budget = query_tokens(query(), "") + 5 * per + per / 2;
    const auto ctx = build_context(query(), ms, {}, ContextMode::Template, cfg);
    REQUIRE(ctx.memories.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(ctx.memories[i].id == "m" + std::to_string(i));
    CHECK(ctx.dropped_memories == 15);
}

TEST_CASE("both modes keep the same memory prefix and the top chain survives a tiny budget") {
    std::vector<MemoryBlock> ms{block("m0", 0.9), block("m1", 0.8)};
    ContextConfig cfg;
    cfg.token_budget = query_tokens(query(), "") + block_tokens(ms[0]);
    const auto t = build_context(query(), ms, {}, ContextMode::Template, cfg);
    const auto a = build_context(query(), ms, {chain2(), chain2()}, ContextMode::Analytical, cfg);
    REQUIRE(t.memories.size() == 1);
    CHECK(a.memories.size() == 1);
    CHECK(a.chains.size() == 1);
    CHECK(a.dropped_chains == 1);
}

TEST_CASE("mode and chains must agree") {
    CHECK_THROWS_AS(build_context(query(), {block("m0", 1)}, {}, ContextMode::Analytical), Error);
    CHECK_THROWS_AS(build_context(query(), {block("m0", 1)}, {chain2()}, ContextMode::Template), Error);
}

TEST_CASE("context serialization is deterministic and round-trips") {
    const auto a = build_context(query(), {block("m0", 0.9)}, {chain2()}, ContextMode::Analytical, {}, "log line");
    const auto b = build_context(query(), {block("m0", 0.9)}, {chain2()}, ContextMode::Analytical, {}, "log line");
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(a.document() == b.document());
    CHECK(to_json(context_from_json(to_json(a))).dump() == to_json(a).dump());
}

TEST_CASE("stub copies the top memory in template mode") {
    const auto ctx = build_context(query(), {block("m0", 0.9), block("m1", 0.5)}, {}, ContextMode::Template);
    const auto s = TemplateStubClient::solve(ctx);
    CHECK(s.steps == std::vector<std::string>{"kubectl describe pod", "increase memory limit"});
    CHECK(s.root_cause == "memory limit too low");
    CHECK(s.sources == std::vector<std::string>{"m0"});
    CHECK(s.reasoning.empty());
}

TEST_CASE("stub adds chain reasoning in analytical mode and contains the template answer") {
    const auto t = TemplateStubClient::solve(build_context(query(), {block("m0", 0.9)}, {}, ContextMode::Template));
    const auto a =
        TemplateStubClient::solve(build_context(query(), {block("m0", 0.9)}, {chain2()}, ContextMode::Analytical));
    CHECK(a.steps == t.steps);
    CHECK(a.reasoning.size() == 2);
    CHECK(a.root_cause == "leaking cache");
    CHECK(std::find(a.sources.begin(), a.sources.end(), "chain-1") != a.sources.end());
    for (const auto& src : t.sources) CHECK(std::find(a.sources.begin(), a.sources.end(), src) != a.sources.end());
    CHECK(a.confidence >= t.confidence);
}

TEST_CASE("stub is pure and synthesize cites only context items") {
    const auto ctx = build_context(query(), {block("m0", 0.9)}, {chain2()}, ContextMode::Analytical);
    TemplateStubClient stub;
    const auto s1 = synthesize(ctx, stub);
    const auto s2 = synthesize(ctx, stub);
    CHECK(to_json(s1).dump() == to_json(s2).dump());
    for (const auto& src : s1.sources) CHECK(ctx.ids().count(src) == 1);
}

TEST_CASE("empty evidence is NoEvidence") {
    const auto ctx = build_context(query(), {}, {}, ContextMode::Template);
    TemplateStubClient stub;
    try {
        synthesize(ctx, stub);
        FAIL("expected NoEvidence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoEvidence);
    }
}

TEST_CASE("retryable failures are retried up to the limit") {
    const auto ctx = build_context(query(), {block("m0", 0.9)}, {}, ContextMode::Template);
    auto fail = []() -> std::string { throw SynthesisFailure("down", true); };
    ScriptedClient c;
    c.script = {fail, fail, good_answer};
    CHECK(synthesize(ctx, c).root_cause == "x");
    CHECK(c.calls == 3);

    ScriptedClient d;
    d.script = {fail, fail, fail, good_answer};
    CHECK_THROWS_AS(synthesize(ctx, d), SynthesisFailure);
    CHECK(d.calls == 3);

    ScriptedClient e;
    e.script = {[]() -> std::string { throw SynthesisFailure("bad request", false); }, good_answer};
    CHECK_THROWS_AS(synthesize(ctx, e), SynthesisFailure);
    CHECK(e.calls == 1);
}

TEST_CASE("malformed or unsourced answers are rejected") {
    const auto ctx = build_context(query(), {block("m0", 0.9)}, {}, ContextMode::Template);
    ScriptedClient junk;
    junk.script = {[] { return std::string("not json"); }};
    CHECK_THROWS_AS(synthesize(ctx, junk), SynthesisFailure);
    ScriptedClient stray;
    stray.script = {[] {
        Solution s;
        s.root_cause = "x";
        s.steps = {"y"};
        s.sources = {"elsewhere"};
        return to_json(s).dump();
    }};
    CHECK_THROWS_AS(synthesize(ctx, stray), SynthesisFailure);
    ScriptedClient nosteps;
    nosteps.script = {[] { return std::string(R"({"root_cause":"x","steps":[],"reasoning":[],"confidence":0.5,"sources":[]})"); }};
    CHECK_THROWS_AS(synthesize(ctx, nosteps), SynthesisFailure);
}

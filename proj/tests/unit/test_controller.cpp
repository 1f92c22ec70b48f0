#include <doctest.h>

#include <cmath>
#include <random>

#include "kubediag/controller.hpp"
#include "kubediag/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kubediag;
using namespace kubediag::control;

namespace {

SessionRecord rec(double c, bool fs) {
    SessionRecord r;
    r.query_id = "q";
    r.c_max = c;
    r.fast_sufficient = fs;
    return r;
}

epmn::RetrievedMemory mem(std::string id, double conf) {
    epmn::RetrievedMemory m;
    m.id = std::move(id);
    m.confidence = conf;
    return m;
}

}  // namespace

TEST_CASE("aggregate confidence is the max") {
    epmn::RetrievalResult r;
    CHECK(aggregate_confidence(r) == 0.0);
    r.memories = {mem("a", 0.2), mem("b", 0.9), mem("c", 0.5)};
    CHECK(aggregate_confidence(r) == doctest::Approx(0.9));
}

TEST_CASE("routing uses a strict threshold") {
    ControllerState s;
    CHECK(route(0.8, s).pathway == Pathway::Intuitive);
    CHECK(route(0.75, s).pathway == Pathway::Analytical);
    CHECK(route(0.0, s).pathway == Pathway::Analytical);
    s.tau = 0.0;
    CHECK(route(0.0, s).pathway == Pathway::Analytical);
    CHECK(route(0.8, s).tau_snapshot == 0.0);
}

TEST_CASE("routing is invariant under a monotone rescaling of c_max and tau") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 200; ++i) {
        const double c = u(rng), t = u(rng);
        ControllerState a, b;
        a.tau = t;
        b.tau = t * t;
        CHECK(route(c, a).pathway == route(c * c, b).pathway);
    }
}

TEST_CASE("meta signal statistics and coverage") {
    epmn::MemoryPool pool;
    auto a = testsupport::episode("a", Vector{1, 0}, 0.0, {"pod crash loop"});
    auto b = testsupport::episode("b", Vector{0, 1}, 0.0, {"disk full"});
    pool.insert(a);
    pool.insert(b);
    epmn::Probe q{Vector{1, 0}, {"pod crash", "oom"}, {}};
    epmn::RetrievalResult r;
    const auto empty = meta_signal(r, q, pool);
    CHECK(empty.c_max == 0.0);
    CHECK(empty.coverage == 0.0);
    r.memories = {mem("a", 0.7)};
    auto s = meta_signal(r, q, pool);
    CHECK(s.c_avg == doctest::Approx(0.7));
    CHECK(s.c_std == doctest::Approx(0.0));
    CHECK(s.coverage == doctest::Approx(2.0 / 3.0));
    r.memories = {mem("a", 0.4), mem("b", 0.8)};
    s = meta_signal(r, q, pool);
    CHECK(s.c_max == doctest::Approx(0.8));
    CHECK(s.c_avg == doctest::Approx(0.6));
    CHECK(s.c_std == doctest::Approx(0.2));
}

TEST_CASE("replay loss examples") {
    const OptParams p;
    History h;
    for (int i = 0; i < 5; ++i) h.push_back(rec(0.2 * i + 0.1, true));
    CHECK(replay_loss(0.0, h, p) == doctest::Approx(0.04));
    CHECK(replay_loss(1.0, h, p) == doctest::Approx(0.4));
    CHECK_THROWS_AS(replay_loss(0.5, History{}, p), Error);

    // 4-record fixture at tau = 0.5: records 1 and 2 go intuitive, record 2 misroutes.
    History mixed{rec(0.9, true), rec(0.6, false), rec(0.5, false), rec(0.1, true)};
    const auto b = replay_breakdown(0.5, mixed, p);
    CHECK(b.error == doctest::Approx(0.25));
    CHECK(b.latency == doctest::Approx((1 + 1 + 10 + 10) / 4.0 / 10.0));
    CHECK(b.loss == doctest::Approx(0.6 * 0.25 + 0.4 * 0.55));
}

TEST_CASE("replay loss stays in [0, 1] and intuitive share falls with tau") {
    std::mt19937_64 rng(2);
    const auto h = testsupport::threshold_history(rng, 300, 0.5, 10);
    double prev_share = 1e9;
    for (int i = 0; i <= 100; ++i) {
        const double tau = i / 100.0;
        const auto b = replay_breakdown(tau, h, OptParams{});
        CHECK(b.loss >= 0.0);
        CHECK(b.loss <= 1.0);
        CHECK(b.latency >= 0.1 - 1e-12);
        CHECK(b.loss == doctest::Approx(oracle::direct_replay_loss(tau, h, OptParams{})).epsilon(1e-12));
        double share = 0;
        for (const auto& r : h) share += r.c_max > tau;
        CHECK(share <= prev_share);
        prev_share = share;
    }
}

TEST_CASE("adaptation direction") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.55, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        ControllerState fail, ok;
        for (int i = 0; i < 100; ++i) {
            const double c = u(rng);
            fail.record(rec(c, false));
            ok.record(rec(c, true));
        }
        CHECK(adapt_threshold(fail));
        CHECK(fail.tau > 0.75);
        CHECK(adapt_threshold(ok));
        CHECK(ok.tau < 0.75);
    }
}

TEST_CASE("adaptation needs a minimum history and clamps tau") {
    ControllerState s;
    for (std::size_t i = 0; i + 1 < kMinHistory; ++i) s.record(rec(0.76, false));
    CHECK_FALSE(adapt_threshold(s));
    CHECK(s.tau == 0.75);
    ControllerState high;
    high.tau = 0.999;
    high.opt_params.eta_meta = 10.0;
    for (int i = 0; i < 20; ++i) high.record(rec(0.99 + 0.0005 * i, false));
    adapt_threshold(high);
    CHECK(high.tau <= 1.0);
}

TEST_CASE("finite difference matches the analytic slope on a locally linear loss") {
    // Evenly spaced c_max values make the misroute count linear in tau over the probe window.
    ControllerState s;
    s.tau = 0.5;
    const int n = 10000;
    s.history_cap = n;
    for (int i = 0; i < n; ++i) s.record(rec((i + 0.5) / n, false));
    const double g = threshold_gradient(s);
    // d/dtau [0.6 (1 - tau) + 0.4 (tau + (1 - tau) * 0.1)] = -0.6 + 0.4 * 0.9
    CHECK(g == doctest::Approx(-0.24).epsilon(1e-6));
}

TEST_CASE("repeated adaptation approaches the grid-search optimum") {
    std::mt19937_64 rng(4);
    ControllerState s;
    s.history = testsupport::stratified_threshold_history(rng, 1000, 0.45, 20);
    const double star = oracle::grid_tau_star(s.history, s.opt_params);
    for (int i = 0; i < 500; ++i) adapt_threshold(s);
    CHECK(std::abs(s.tau - star) <= 0.04);
}

TEST_CASE("calibration loss values") {
    CHECK(calibration_loss(0.5, true) == doctest::Approx(std::log(2.0)));
    CHECK(calibration_loss(0.5, false) == doctest::Approx(std::log(2.0)));
    CHECK(calibration_loss(1.0 - 1e-7, true) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(calibration_loss(0.9, false) == doctest::Approx(2.302585092994046));
    CHECK(std::isfinite(calibration_loss(1.0, false)));
    CHECK(std::isfinite(calibration_loss(0.0, true)));
}

TEST_CASE("a calibrated history is a stationary point") {
    ControllerState s;
    // Every factor is 1, so C = 1 = y for each record.
    for (int i = 0; i < 20; ++i) {
        auto r = rec(1.0, true);
        r.factors_of_best = epmn::Factors{1, 1, 1, 1};
        s.record(r);
    }
    const auto before = s.factor_weights;
    CHECK(update_factor_weights(s));
    for (std::size_t j = 0; j < 4; ++j) CHECK(s.factor_weights[j] == doctest::Approx(before[j]).epsilon(1e-6));
}

TEST_CASE("similarity exponent grows when similarity separates outcomes") {
    ControllerState s;
    for (int i = 0; i < 50; ++i) {
        auto hi = rec(0, true);
        hi.factors_of_best = epmn::Factors{0.95, 0.9, 0.9, 0.9};
        auto lo = rec(0, false);
        lo.factors_of_best = epmn::Factors{0.3, 0.9, 0.9, 0.9};
        s.record(hi);
        s.record(lo);
    }
    for (int i = 0; i < 20; ++i) update_factor_weights(s);
    CHECK(s.factor_weights[epmn::kSimilarity] > 1.0);
}

TEST_CASE("factor updates reduce mean calibration loss and keep weights non-negative") {
    std::mt19937_64 rng(6);
    ControllerState s;
    s.history = testsupport::calibration_history(rng, 200);
    const double before = mean_calibration_loss(s.history, s.factor_weights);
    double oracle_before = 0.0;
    for (const auto& r : s.history) {
        double c = 1.0;
        for (double f : *r.factors_of_best) c *= f;
        oracle_before += oracle::bce(c, r.fast_sufficient) / 200.0;
    }
    CHECK(before == doctest::Approx(oracle_before).epsilon(1e-9));
    for (int i = 0; i < 100; ++i) update_factor_weights(s);
    CHECK(mean_calibration_loss(s.history, s.factor_weights) <= 0.9 * before);
    for (double w : s.factor_weights) CHECK(w >= 0.0);
}

TEST_CASE("history is capped and the checkpoint round-trips") {
    ControllerState s;
    s.history_cap = 3;
    for (int i = 0; i < 5; ++i) s.record(rec(0.1 * i, i % 2 == 0));
    CHECK(s.history.size() == 3);
    CHECK(s.history.front().c_max == doctest::Approx(0.2));
    s.tau = 0.61;
    s.factor_weights = {1.2, 0.5, 1, 0};
    s.history.back().factors_of_best = epmn::Factors{0.5, 0.5, 0.5, 0.5};
    const auto back = state_from_json(to_json(s));
    CHECK(to_json(back).dump() == to_json(s).dump());
    auto j = to_json(s);
    j["tau"] = 1.5;
    CHECK_THROWS_AS(state_from_json(j), Error);
}

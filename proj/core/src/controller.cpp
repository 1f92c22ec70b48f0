#include "kubediag/controller.hpp"

#include <algorithm>
#include <cmath>

#include "kubediag/errors.hpp"
#include "kubediag/text.hpp"

namespace kubediag::control {

using nlohmann::json;

namespace {
constexpr double kEps = 1e-7;
}

void ControllerState::record(SessionRecord r) {
    history.push_back(std::move(r));
    while (history.size() > history_cap) history.pop_front();
}

void ControllerState::validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::SchemaViolation, "controller state: " + why); };
    if (!(tau >= 0.0 && tau <= 1.0)) fail("tau outside [0, 1]");
    for (double w : factor_weights)
        if (!(w >= 0.0) || !std::isfinite(w)) fail("negative factor weight");
    if (!(opt_params.xi >= 0.0 && opt_params.xi <= 1.0)) fail("xi outside [0, 1]");
    if (!(opt_params.delta_probe > 0.0)) fail("delta_probe must be positive");
    if (!(opt_params.analytic_cost >= 1.0)) fail("analytic_cost must be >= 1");
    if (!(opt_params.eta_meta >= 0.0) || !(opt_params.weight_lr >= 0.0)) fail("learning rates must be >= 0");
    if (history_cap == 0) fail("history_cap must be positive");
    if (history.size() > history_cap) fail("history exceeds its cap");
    for (const auto& r : history) {
        if (!(r.c_max >= 0.0 && r.c_max <= 1.0)) fail("record c_max outside [0, 1]");
        if (r.factors_of_best)
            for (double f : *r.factors_of_best)
                if (!(f >= 0.0 && f <= 1.0)) fail("record factor outside [0, 1]");
    }
}

double aggregate_confidence(const epmn::RetrievalResult& result) noexcept {
    double best = 0.0;
    for (const auto& m : result.memories) best = std::max(best, m.confidence);
    return best;
}

RoutingDecision route(double c_max, const ControllerState& state, const MetaSignal& signal) {
    if (!(c_max >= 0.0 && c_max <= 1.0)) throw Error(ErrorCode::InvalidArgument, "route: c_max outside [0, 1]");
    RoutingDecision d;
    d.c_max = c_max;
    d.tau_snapshot = state.tau;
    d.pathway = c_max > state.tau ? Pathway::Intuitive : Pathway::Analytical;
    d.signal = signal;
    return d;
}

MetaSignal meta_signal(const epmn::RetrievalResult& result, const epmn::Probe& query, const epmn::MemoryPool& pool) {
    MetaSignal s;
    if (result.memories.empty()) return s;
    const double n = static_cast<double>(result.memories.size());
    for (const auto& m : result.memories) {
        s.c_max = std::max(s.c_max, m.confidence);
        s.c_avg += m.confidence / n;
    }
    double var = 0.0;
    for (const auto& m : result.memories) var += (m.confidence - s.c_avg) * (m.confidence - s.c_avg) / n;
    s.c_std = std::sqrt(var);

    const auto wanted_list = text::tokenize_all(query.symptoms);
    const std::set<std::string> wanted(wanted_list.begin(), wanted_list.end());
    if (wanted.empty()) return s;
    std::set<std::string> seen;
    for (const auto& m : result.memories) {
        const std::vector<std::string>* symptoms = nullptr;
        if (m.kind == epmn::MemoryKind::Episode) {
            if (const auto* e = pool.find_episode(m.id)) symptoms = &e->symptoms;
        } else if (const auto* p = pool.find_pattern(m.id)) {
            symptoms = &p->symptoms;
        }
        if (!symptoms) continue;
        for (const auto& t : text::tokenize_all(*symptoms))
            if (wanted.count(t)) seen.insert(t);
    }
    s.coverage = static_cast<double>(seen.size()) / static_cast<double>(wanted.size());
    return s;
}

ReplayBreakdown replay_breakdown(double tau, const History& history, const OptParams& p) {
    if (history.empty()) throw Error(ErrorCode::EmptyHistory, "replay over an empty history");
    std::size_t misrouted = 0;
    double cost = 0.0;
    for (const auto& r : history) {
        const bool intuitive = r.c_max > tau;
        if (intuitive && !r.fast_sufficient) ++misrouted;
        cost += intuitive ? 1.0 : p.analytic_cost;
    }
    const double n = static_cast<double>(history.size());
    ReplayBreakdown b;
    b.error = static_cast<double>(misrouted) / n;
    b.latency = cost / n / p.analytic_cost;
    b.loss = p.xi * b.error + (1.0 - p.xi) * b.latency;
    return b;
}

double replay_loss(double tau, const History& history, const OptParams& p) {
    return replay_breakdown(tau, history, p).loss;
}

double threshold_gradient(const ControllerState& s) {
    const double d = s.opt_params.delta_probe;
    return (replay_loss(s.tau + d, s.history, s.opt_params) - replay_loss(s.tau - d, s.history, s.opt_params)) /
           (2.0 * d);
}

bool adapt_threshold(ControllerState& s) {
    if (s.history.size() < kMinHistory) return false;
    s.tau = std::clamp(s.tau - s.opt_params.eta_meta * threshold_gradient(s), 0.0, 1.0);
    return true;
}

double calibration_loss(double c, bool y) {
    const double p = std::clamp(c, kEps, 1.0 - kEps);
    return y ? -std::log(p) : -std::log(1.0 - p);
}

double mean_calibration_loss(const History& history, const epmn::FactorWeights& weights) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : history) {
        if (!r.factors_of_best) continue;
        sum += calibration_loss(epmn::confidence(*r.factors_of_best, weights), r.fast_sufficient);
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

epmn::FactorWeights calibration_gradient(const History& history, const epmn::FactorWeights& weights) {
    epmn::FactorWeights g{};
    std::size_t n = 0;
    for (const auto& r : history) {
        if (!r.factors_of_best) continue;
        const double c = epmn::confidence(*r.factors_of_best, weights);
        const double residual = c - (r.fast_sufficient ? 1.0 : 0.0);
        for (std::size_t j = 0; j < epmn::kFactorCount; ++j)
            g[j] += residual * std::log(std::max((*r.factors_of_best)[j], kEps));
        ++n;
    }
    if (n)
        for (auto& x : g) x /= static_cast<double>(n);
    return g;
}

bool update_factor_weights(ControllerState& s) {
    const auto usable = std::count_if(s.history.begin(), s.history.end(),
                                      [](const SessionRecord& r) { return r.factors_of_best.has_value(); });
    if (static_cast<std::size_t>(usable) < kMinHistory) return false;
    const auto g = calibration_gradient(s.history, s.factor_weights);
    for (std::size_t j = 0; j < epmn::kFactorCount; ++j)
        s.factor_weights[j] = std::max(0.0, s.factor_weights[j] - s.opt_params.weight_lr * g[j]);
    return true;
}

// ---- JSON ----------------------------------------------------------------------

json to_json(const SessionRecord& r) {
    json j{{"query_id", r.query_id},
           {"c_max", r.c_max},
           {"pathway", to_string(r.pathway)},
           {"fast_sufficient", r.fast_sufficient},
           {"latency_units", r.latency_units},
           {"outcome", to_string(r.outcome)}};
    j["factors_of_best"] = r.factors_of_best ? json(*r.factors_of_best) : json(nullptr);
    return j;
}

SessionRecord record_from_json(const json& j) {
    try {
        SessionRecord r;
        r.query_id = j.at("query_id").get<std::string>();
        r.c_max = j.at("c_max").get<double>();
        r.pathway = pathway_from_string(j.at("pathway").get<std::string>());
        r.fast_sufficient = j.at("fast_sufficient").get<bool>();
        r.latency_units = j.at("latency_units").get<double>();
        r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        if (j.contains("factors_of_best") && !j.at("factors_of_best").is_null())
            r.factors_of_best = j.at("factors_of_best").get<epmn::Factors>();
        return r;
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("session record: ") + ex.what());
    }
}

json to_json(const ControllerState& s) {
    json history = json::array();
    for (const auto& r : s.history) history.push_back(to_json(r));
    return json{{"tau", s.tau},
                {"factor_weights", s.factor_weights},
                {"opt_params",
                 {{"eta_meta", s.opt_params.eta_meta},
                  {"xi", s.opt_params.xi},
                  {"delta_probe", s.opt_params.delta_probe},
                  {"analytic_cost", s.opt_params.analytic_cost},
                  {"weight_lr", s.opt_params.weight_lr}}},
                {"history_cap", s.history_cap},
                {"history", std::move(history)}};
}

ControllerState state_from_json(const json& j) {
    ControllerState s;
    try {
        s.tau = j.at("tau").get<double>();
        s.factor_weights = j.at("factor_weights").get<epmn::FactorWeights>();
        const auto& o = j.at("opt_params");
        s.opt_params.eta_meta = o.value("eta_meta", s.opt_params.eta_meta);
        s.opt_params.xi = o.value("xi", s.opt_params.xi);
        s.opt_params.delta_probe = o.value("delta_probe", s.opt_params.delta_probe);
        s.opt_params.analytic_cost = o.value("analytic_cost", s.opt_params.analytic_cost);
        s.opt_params.weight_lr = o.value("weight_lr", s.opt_params.weight_lr);
        s.history_cap = j.value("history_cap", s.history_cap);
        for (const auto& r : j.at("history")) s.history.push_back(record_from_json(r));
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("controller checkpoint: ") + ex.what());
    }
    s.validate();
    return s;
}

json to_json(const MetaSignal& s) {
    return json{{"c_max", s.c_max}, {"c_avg", s.c_avg}, {"c_std", s.c_std}, {"coverage", s.coverage}};
}

json to_json(const RoutingDecision& d) {
    return json{{"pathway", to_string(d.pathway)},
                {"c_max", d.c_max},
                {"tau_snapshot", d.tau_snapshot},
                {"signal", to_json(d.signal)}};
}

}  // namespace kubediag::control

#pragma once

// Confidence-driven routing between the intuitive and analytical pathways,
// with threshold adaptation on a replay buffer and calibration of the
// confidence-factor exponents.

#include <cstddef>
#include <deque>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "kubediag/common.hpp"
#include "kubediag/epmn.hpp"

namespace kubediag::control {

struct OptParams {
    double eta_meta = 0.01;
    double xi = 0.6;
    double delta_probe = 0.02;
    double analytic_cost = 10.0;  // analytical latency in units of one intuitive pass
    double weight_lr = 0.05;
};

struct SessionRecord {
    std::string query_id;
    double c_max = 0.0;
    std::optional<epmn::Factors> factors_of_best;  // absent when nothing was retrieved
    Pathway pathway = Pathway::Analytical;
    bool fast_sufficient = false;
    double latency_units = 0.0;
    Outcome outcome = Outcome::Failure;
};

using History = std::deque<SessionRecord>;

/// Adaptation needs at least this many records; below it updates are no-ops.
inline constexpr std::size_t kMinHistory = 10;

struct ControllerState {
    double tau = 0.75;
    epmn::FactorWeights factor_weights{1.0, 1.0, 1.0, 1.0};
    OptParams opt_params;
    History history;
    std::size_t history_cap = 1000;

    /// Appends, dropping the oldest records beyond history_cap.
    void record(SessionRecord r);
    /// Throws InvalidArgument / SchemaViolation on broken invariants.
    void validate() const;
};

struct MetaSignal {
    double c_max = 0.0;
    double c_avg = 0.0;
    double c_std = 0.0;
    double coverage = 0.0;
};

struct RoutingDecision {
    Pathway pathway = Pathway::Analytical;
    double c_max = 0.0;
    double tau_snapshot = 0.0;
    MetaSignal signal;
};

/// Max per-memory confidence; 0 for an empty result.
double aggregate_confidence(const epmn::RetrievalResult& result) noexcept;

/// Intuitive iff c_max > tau (strict).
RoutingDecision route(double c_max, const ControllerState& state, const MetaSignal& signal = {});

/// Confidence statistics over the returned memories (population std) and
/// the fraction of distinct query symptom tokens found in any returned
/// memory's symptoms.
MetaSignal meta_signal(const epmn::RetrievalResult& result, const epmn::Probe& query, const epmn::MemoryPool& pool);

struct ReplayBreakdown {
    double error = 0.0;    // share of records routed intuitive that were not fast-sufficient
    double latency = 0.0;  // mean pathway cost / analytic_cost
    double loss = 0.0;
};

/// Replays the history under `tau`. Throws EmptyHistory.
ReplayBreakdown replay_breakdown(double tau, const History& history, const OptParams& p);
double replay_loss(double tau, const History& history, const OptParams& p);

/// Central finite difference of replay_loss at state.tau with step delta_probe.
double threshold_gradient(const ControllerState& state);

/// tau <- clamp(tau - eta_meta * gradient, 0, 1). No-op (returns false)
/// with fewer than kMinHistory records.
bool adapt_threshold(ControllerState& state);

/// Binary cross-entropy with the prediction clamped to [1e-7, 1 - 1e-7].
double calibration_loss(double c_predicted, bool fast_sufficient);

/// Mean BCE of prod_j f_j^weight_j over records that carry factors.
double mean_calibration_loss(const History& history, const epmn::FactorWeights& weights);

/// Per-weight gradient mean((C - y) * log f_j) under the log-linear model.
epmn::FactorWeights calibration_gradient(const History& history, const epmn::FactorWeights& weights);

/// One gradient step of size weight_lr, weights clamped >= 0. No-op
/// (returns false) with fewer than kMinHistory records carrying factors.
bool update_factor_weights(ControllerState& state);

nlohmann::json to_json(const SessionRecord& r);
SessionRecord record_from_json(const nlohmann::json& j);
/// Checkpoint: {tau, factor_weights, opt_params, history}.
nlohmann::json to_json(const ControllerState& s);
ControllerState state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetaSignal& s);
nlohmann::json to_json(const RoutingDecision& d);

}  // namespace kubediag::control

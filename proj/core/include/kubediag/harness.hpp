#pragma once

// Fault-scenario corpus (load, save, generate), the reference causal graph
// behind the generated corpus, and the continuous-learning simulator.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kubediag/common.hpp"
#include "kubediag/engine.hpp"
#include "kubediag/errors.hpp"
#include "kubediag/kubegraph.hpp"

namespace kubediag::harness {

inline constexpr std::size_t kMaxLogTokens = 2048;

struct FaultScenario {
    std::string id;
    graph::Category category = graph::Category::ResourceErrors;
    std::vector<std::string> symptoms;
    std::set<std::string> context;
    std::string logs;
    std::string ground_truth_root_cause;
    std::vector<std::string> resolution_steps;
};

/// Throws Error(ScenarioParseError) when a field is empty or the category is
/// not a fault category.
void validate(const FaultScenario& s);
nlohmann::json to_json(const FaultScenario& s);
/// Parses and validates; logs longer than kMaxLogTokens are truncated.
FaultScenario scenario_from_json(const nlohmann::json& j);
Query to_query(const FaultScenario& s);

struct ScenarioLoad {
    std::vector<FaultScenario> scenarios;
    std::vector<LineError> errors;  // ScenarioParseError, 1-based lines
};

/// JSON-lines; blank lines skipped, bad lines reported and skipped.
ScenarioLoad read_scenarios(std::istream& in);
/// Throws IoError when the file cannot be opened.
ScenarioLoad load_scenarios(const std::filesystem::path& path);
void write_scenarios(std::ostream& out, const std::vector<FaultScenario>& scenarios);
void save_scenarios(const std::filesystem::path& path, const std::vector<FaultScenario>& scenarios);

// ---- generation ------------------------------------------------------------------

/// mt19937_64 with bounded draws defined here, so streams do not depend on
/// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next() { return gen_(); }
    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [0, 1) with 53 random bits.
    double unit();

private:
    std::mt19937_64 gen_;
};

using CategoryMix = std::vector<std::pair<graph::Category, double>>;

/// Proportions of the reference corpus: 412/387/298/276/315/185 scenarios
/// for resource/network/scheduling/image/configuration/system faults.
CategoryMix default_mix();

/// Largest-remainder apportionment of `total` over non-negative weights.
/// Remainder ties go to the earlier entry.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

/// Deterministic corpus from the template bank. Throws InvalidArgument for
/// total == 0, a mix that does not sum to 1 (within 1e-6), negative shares,
/// duplicate or non-fault categories.
std::vector<FaultScenario> generate_scenarios(std::uint64_t seed, std::size_t total,
                                              const CategoryMix& mix = default_mix());

struct ScenarioTemplate {
    std::string key;
    graph::Category category;
    std::string reason;  // event reason shown in the logs
    std::string workload;
    std::vector<std::string> symptoms;  // pool; scenarios draw all but one
    graph::NodeType component_type;
    std::string component;
    graph::Relation via;  // event -> component relation
    std::string root_cause;
    std::vector<std::string> steps;
    // Misleading path whose static edge weights beat the correct one.
    std::optional<std::pair<std::string, std::string>> decoy;  // component label, root cause
};

const std::vector<ScenarioTemplate>& scenario_templates();

/// Symptom event -> component -> root cause for every template, plus the
/// decoy branches. Edge weights: (0.8, 0.7) plain, (0.6, 0.5) correct path
/// of a decoyed template, (0.9, 0.85) decoy path.
graph::KnowledgeGraph reference_graph(std::shared_ptr<const Embedder> embedder);

// ---- simulation --------------------------------------------------------------------

/// |A ∩ B| / max(|A|, |B|) over token sets.
double root_cause_score(const std::string& a, const std::string& b);
inline constexpr double kMatchThreshold = 0.6;
bool root_cause_matches(const std::string& predicted, const std::string& truth);

struct SimulationConfig {
    std::uint64_t seed = 42;
    std::size_t epochs = 1;
    double recurrence = 0.5;  // chance of replaying an already seen scenario
    std::size_t window = 50;
    Timestamp start_time = 1'700'000'000.0;
    double step_seconds = 300.0;

    void validate() const;
};

struct WindowMetrics {
    std::size_t window = 0;  // 1-based
    double accuracy = 0.0;
    double intuitive_rate = 0.0;
    double mean_latency_units = 0.0;
    double tau = 0.0;  // threshold after the window's last feedback
};

struct LearningCurve {
    std::vector<WindowMetrics> windows;
    /// Header plus one "%.6f" row per window.
    std::string to_csv() const;
};

struct SessionOutcome {
    std::string scenario_id;
    std::string session_id;  // empty when diagnosis found no evidence
    bool correct = false;
    Pathway pathway = Pathway::Analytical;
    double latency_units = 0.0;
    double c_max = 0.0;
    double tau_after = 0.0;
};

struct SimulationResult {
    LearningCurve curve;
    std::vector<SessionOutcome> sessions;
};

/// Each epoch issues scenarios.size() sessions. A session replays a seen
/// scenario with probability `recurrence`, otherwise takes the next unseen
/// one. Correct answers feed back success; wrong ones feed back failure with
/// the ground-truth root cause as the confirmed cause.
SimulationResult run_continuous(Engine& engine, const std::vector<FaultScenario>& scenarios,
                                const SimulationConfig& cfg);

LearningCurve curve_from_sessions(const std::vector<SessionOutcome>& sessions, std::size_t window);
/// Rebuilds the curve from an exported session trace.
LearningCurve curve_from_trace(std::istream& trace, std::size_t window);

struct AblationReport {
    double accuracy_with = 0.0;
    double accuracy_without = 0.0;
    double latency_with = 0.0;
    double latency_without = 0.0;
    double accuracy_gain = 0.0;   // relative: (with - without) / without
    double latency_change = 0.0;  // relative: (with - without) / without
    std::size_t sessions = 0;

    std::string to_table() const;
};

/// Runs the same seeded workload through both engines.
AblationReport evaluate_ablation(Engine& with_memory, Engine& without_memory,
                                 const std::vector<FaultScenario>& scenarios, const SimulationConfig& cfg);

}  // namespace kubediag::harness

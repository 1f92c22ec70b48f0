#pragma once

// Episodic/pattern memory: a two-layer store of concrete diagnostic
// episodes and the patterns abstracted from clusters of them, with
// multi-factor confidence scoring and a two-tier similarity index.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kubediag/common.hpp"
#include "kubediag/embedder.hpp"

namespace kubediag::epmn {

/// Canonical resolution carried by an episode or a pattern.
struct Strategy {
    std::string root_cause;
    std::vector<std::string> actions;
    std::vector<std::string> resolution_path;  // graph node ids
};

struct Episode {
    std::string id;
    std::vector<std::string> symptoms;
    std::set<std::string> context;
    std::vector<std::string> actions;
    Outcome outcome = Outcome::Success;
    Timestamp timestamp = 0.0;
    double memory_value = 1.0;
    Vector embedding;
    std::vector<std::string> resolution_path;
    std::string root_cause;
    // Reuse statistics feeding the smoothed success factor.
    int successes = 0;
    int trials = 0;
};

/// Throws Error(SchemaViolation) when an invariant is broken.
void validate(const Episode& episode, std::size_t expected_dim = 0);

struct Pattern {
    std::string id;
    Vector centroid;
    Vector spread;  // per-dimension variance
    Strategy strategy;
    double reliability = 0.0;
    std::size_t member_count = 0;
    std::set<std::string> member_ids;
    Timestamp last_updated = 0.0;
    std::string seed_id;                // episode whose neighborhood formed the pattern
    std::set<std::string> context;      // labels shared by at least half the live members
    std::vector<std::string> symptoms;  // symptoms of the strategy member
};

struct EpmnConfig {
    double theta_sim = 0.85;
    std::size_t theta_pattern = 3;
    std::size_t k = 10;
    double lambda = 0.7;
    double tau_r = 30.0 * kSecondsPerDay;
    double sigma_sim = 1.0;
    double t_temp = 30.0 * kSecondsPerDay;
    std::size_t k_hint = 5;
    std::array<double, 2> psi_weights{1.0, 1.0};
    double psi_bias = 0.0;
    std::size_t embedding_dim = 256;
    std::size_t k_rel = 8;
    double update_rate = 0.1;  // memory_value multiplier step on outcome feedback

    /// Throws Error(InvalidArgument) on out-of-range values.
    void validate() const;
};

enum class MemoryKind { Episode, Pattern };
const char* to_string(MemoryKind kind) noexcept;

enum Factor : std::size_t { kSimilarity = 0, kTemporal = 1, kSuccess = 2, kContext = 3 };
inline constexpr std::size_t kFactorCount = 4;
using Factors = std::array<double, kFactorCount>;
using FactorWeights = std::array<double, kFactorCount>;

struct RetrievedMemory {
    MemoryKind kind = MemoryKind::Episode;
    std::string id;
    double score = 0.0;  // tier-scaled: psi * raw for patterns, (1 - psi) * raw for episodes
    double raw_score = 0.0;
    double confidence = 0.0;
    Factors factors{};
};

struct RetrievalResult {
    std::vector<RetrievedMemory> memories;
    double c_max = 0.0;
    double psi = 0.5;
    double novelty = 1.0;
    double complexity = 0.0;
};

/// Everything retrieval needs to know about a query.
struct Probe {
    Vector embedding;
    std::vector<std::string> symptoms;
    std::set<std::string> context;
};

/// Embeds the joined symptom text. Throws InvalidQuery on empty symptoms.
Probe make_probe(const Query& query, const Embedder& embedder);

// ---- scoring primitives ---------------------------------------------------

/// exp(-delta_t / tau_r). Throws InvalidArgument for negative delta_t or non-positive tau_r.
double recency(double delta_t, double tau_r);

/// lambda * cosine(m, q) + (1 - lambda) * recency. Memories timestamped after
/// `now` count as fresh.
double score_memory(const Episode& m, std::span<const double> q, Timestamp now, const EpmnConfig& cfg);
double score_memory(const Pattern& m, std::span<const double> q, Timestamp now, const EpmnConfig& cfg);

/// Shannon entropy of the symptom token distribution divided by log(#distinct tokens).
double complexity(const std::vector<std::string>& symptoms);

double sigmoid(double x) noexcept;
/// sigmoid(w0 * novelty + w1 * complexity + bias)
double mixing(double novelty, double complexity, const EpmnConfig& cfg) noexcept;

/// Laplace-smoothed success rate.
double smoothed_success(double successes, double trials) noexcept;
/// Jaccard overlap; both empty -> 1.
double context_overlap(const std::set<std::string>& a, const std::set<std::string>& b);

Factors confidence_factors(const Episode& m, const Probe& q, const EpmnConfig& cfg, Timestamp now);
Factors confidence_factors(const Pattern& m, const Probe& q, const EpmnConfig& cfg, Timestamp now);

/// prod_j factors[j]^weights[j]. Throws InvalidArgument for a negative weight.
double confidence(const Factors& factors, const FactorWeights& weights);

// ---- the pool ---------------------------------------------------------------

struct InsertResult {
    std::string id;
    std::vector<std::string> evicted;
};

/// Episode and pattern store with a two-tier similarity index.
///
/// Episode tier buckets: each pattern owns the live members not already
/// owned by an earlier pattern (id order); everything else is unclustered.
/// Each bucket keeps a conservative angular radius around its centroid and
/// its newest timestamp, which bound the best score any member can reach.
///
/// Not internally synchronized: callers provide reader/writer exclusion.
class MemoryPool {
public:
    explicit MemoryPool(std::size_t capacity = 5000);

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return episodes_.size(); }
    bool empty() const noexcept { return episodes_.empty() && patterns_.empty(); }

    /// Stores the episode, then evicts lowest memory_value (oldest first on
    /// ties) while over capacity. Throws DuplicateId / SchemaViolation.
    InsertResult insert(Episode episode);

    /// Records the outcome, scales memory_value by (1 +/- update_rate) and
    /// refreshes reliability of every pattern containing the episode.
    /// Throws NotFound.
    const Episode& update_outcome(const std::string& id, Outcome outcome, bool success, double update_rate);

    const Episode* find_episode(const std::string& id) const;
    const Pattern* find_pattern(const std::string& id) const;
    const std::map<std::string, Episode>& episodes() const noexcept { return episodes_; }
    const std::map<std::string, Pattern>& patterns() const noexcept { return patterns_; }
    const std::set<std::string>& evicted_ids() const noexcept { return evicted_; }
    bool known_episode_id(const std::string& id) const;

    /// Inserts or replaces a pattern and rebuilds the index.
    void upsert_pattern(Pattern pattern);
    void upsert_patterns(std::vector<Pattern> patterns);
    std::string next_pattern_id();

    /// Recomputes reliability of the patterns containing `episode_id`.
    void refresh_reliability(const std::string& episode_id);

    // Index inspection (used by retrieval and tests).
    struct Bucket {
        std::string pattern_id;  // empty for the unclustered bucket
        Vector centroid;
        double min_cosine = 1.0;  // every member has cosine >= this to the centroid
        Timestamp newest = 0.0;
        std::vector<std::string> members;
    };
    const std::vector<Bucket>& buckets() const noexcept { return buckets_; }

private:
    void rebuild_index();
    void index_insert(const Episode& e);
    void index_erase(const std::string& id);
    void evict_over_capacity(std::vector<std::string>& evicted);

    std::size_t capacity_;
    std::map<std::string, Episode> episodes_;
    std::map<std::string, Pattern> patterns_;
    std::set<std::string> evicted_;
    std::size_t pattern_seq_ = 0;

    std::vector<Bucket> buckets_;  // [0] is the unclustered bucket
    std::unordered_map<std::string, std::size_t> bucket_of_;
};

/// min over every episode and pattern of (1 - cosine); 1 for an empty pool.
double novelty(std::span<const double> q, const MemoryPool& pool);

enum class SearchMode { Indexed, Exhaustive };

/// Top-K over psi-scaled pattern scores and (1-psi)-scaled episode scores,
/// ties broken by higher confidence then id. psi comes from mixing().
RetrievalResult retrieve(const Probe& q, const MemoryPool& pool, const FactorWeights& weights,
                         const EpmnConfig& cfg, Timestamp now, SearchMode mode = SearchMode::Indexed);

/// Same ranking with an explicit psi; novelty and complexity are still reported.
RetrievalResult retrieve_with_psi(const Probe& q, double psi, const MemoryPool& pool,
                                  const FactorWeights& weights, const EpmnConfig& cfg, Timestamp now,
                                  SearchMode mode = SearchMode::Indexed);

/// True when `a` ranks strictly ahead of `b`.
bool ranks_before(const RetrievedMemory& a, const RetrievedMemory& b) noexcept;

/// Builds a pattern from live member episodes: normalized mean centroid,
/// per-dimension variance, strategy of the highest memory_value member and
/// member success fraction as reliability. `recorded` adds evicted member ids.
Pattern abstract_pattern(std::string id, std::string seed_id, const std::vector<const Episode*>& members,
                         const std::set<std::string>& recorded = {});

struct PatternUpdate {
    std::vector<std::string> created;
    std::vector<std::string> updated;
};

/// Similarity-neighborhood clustering over every live episode.
///
/// A neighborhood {e_j : cos(e_i, e_j) > theta_sim} of size >= theta_pattern
/// merges into the existing pattern whose member set it covers by more than
/// half (replacing the members when the neighborhood is strictly larger),
/// otherwise it founds a new pattern. Stats of all patterns are recomputed
/// afterwards, so a second pass over an unchanged pool is a no-op.
PatternUpdate form_patterns(MemoryPool& pool, const EpmnConfig& cfg);

/// The same procedure restricted to the given seed episodes.
PatternUpdate form_patterns_from(MemoryPool& pool, const EpmnConfig& cfg, const std::vector<std::string>& seeds);

/// Resolution path for a memory (episode path or pattern strategy path).
const std::vector<std::string>* resolution_path_of(const MemoryPool& pool, MemoryKind kind, const std::string& id);

/// Union of resolution-path nodes over the top k_hint memories.
std::set<std::string> hints(const Probe& q, const MemoryPool& pool, const FactorWeights& weights,
                            const EpmnConfig& cfg, Timestamp now);

}  // namespace kubediag::epmn

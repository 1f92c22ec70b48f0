#include "kubediag/epmn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "kubediag/errors.hpp"
#include "kubediag/text.hpp"

namespace kubediag::epmn {

namespace {

constexpr double kNormTolerance = 1e-6;
constexpr double kBoundSlack = 1e-9;

double clamp_unit(double x) noexcept { return std::clamp(x, -1.0, 1.0); }

double age(Timestamp t, Timestamp now) noexcept { return std::max(0.0, now - t); }

}  // namespace

const char* to_string(MemoryKind kind) noexcept { return kind == MemoryKind::Episode ? "episode" : "pattern"; }

void validate(const Episode& e, std::size_t expected_dim) {
    auto fail = [&](const std::string& why) { throw Error(ErrorCode::SchemaViolation, "episode '" + e.id + "': " + why); };
    if (e.id.empty()) fail("empty id");
    if (e.embedding.empty()) fail("missing embedding");
    if (expected_dim != 0 && e.embedding.size() != expected_dim) fail("embedding dimension mismatch");
    for (double x : e.embedding)
        if (!std::isfinite(x)) fail("non-finite embedding component");
    if (std::abs(norm(e.embedding) - 1.0) > kNormTolerance) fail("embedding is not unit length");
    if (!(e.memory_value >= 0.0) || !std::isfinite(e.memory_value)) fail("memory_value must be finite and >= 0");
    if (!std::isfinite(e.timestamp) || e.timestamp < 0.0) fail("timestamp must be finite and >= 0");
    if (e.trials < 0 || e.successes < 0 || e.successes > e.trials) fail("inconsistent success counters");
}

void EpmnConfig::validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, "epmn config: " + why); };
    if (!(theta_sim > 0.0 && theta_sim <= 1.0)) fail("theta_sim must be in (0, 1]");
    if (theta_pattern < 2) fail("theta_pattern must be >= 2");
    if (k == 0) fail("k must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0, 1]");
    if (!(tau_r > 0.0) || !(sigma_sim > 0.0) || !(t_temp > 0.0)) fail("scales must be strictly positive");
    if (embedding_dim == 0) fail("embedding_dim must be positive");
    if (!(update_rate >= 0.0 && update_rate <= 1.0)) fail("update_rate must be in [0, 1]");
}

Probe make_probe(const Query& query, const Embedder& embedder) {
    Probe p;
    for (const auto& s : query.symptoms) {
        auto t = text::trim(s);
        if (!t.empty()) p.symptoms.push_back(std::move(t));
    }
    if (p.symptoms.empty()) throw Error(ErrorCode::InvalidQuery, "query has no symptoms");
    p.embedding = embedder.embed(text::join(p.symptoms, " "));
    p.context = query.context;
    return p;
}

double recency(double delta_t, double tau_r) {
    if (!(delta_t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "recency: negative delta_t");
    if (!(tau_r > 0.0)) throw Error(ErrorCode::InvalidArgument, "recency: tau_r must be positive");
    return std::exp(-delta_t / tau_r);
}

double score_memory(const Episode& m, std::span<const double> q, Timestamp now, const EpmnConfig& cfg) {
    return cfg.lambda * cosine(m.embedding, q) + (1.0 - cfg.lambda) * recency(age(m.timestamp, now), cfg.tau_r);
}

double score_memory(const Pattern& m, std::span<const double> q, Timestamp now, const EpmnConfig& cfg) {
    return cfg.lambda * cosine(m.centroid, q) + (1.0 - cfg.lambda) * recency(age(m.last_updated, now), cfg.tau_r);
}

double complexity(const std::vector<std::string>& symptoms) {
    const auto tokens = text::tokenize_all(symptoms);
    if (tokens.empty()) throw Error(ErrorCode::InvalidQuery, "complexity: no symptom tokens");
    std::map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    if (counts.size() < 2) return 0.0;
    const double n = static_cast<double>(tokens.size());
    double h = 0.0;
    for (const auto& [tok, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return std::clamp(h / std::log(static_cast<double>(counts.size())), 0.0, 1.0);
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double mixing(double nov, double comp, const EpmnConfig& cfg) noexcept {
    return sigmoid(cfg.psi_weights[0] * nov + cfg.psi_weights[1] * comp + cfg.psi_bias);
}

double smoothed_success(double successes, double trials) noexcept { return (successes + 1.0) / (trials + 2.0); }

double context_overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    const std::size_t uni = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

namespace {

double similarity_factor(std::span<const double> m, std::span<const double> q, double sigma) {
    const double d = 1.0 - cosine(m, q);
    return std::clamp(std::exp(-std::max(0.0, d) / sigma), 0.0, 1.0);
}

}  // namespace

Factors confidence_factors(const Episode& m, const Probe& q, const EpmnConfig& cfg, Timestamp now) {
    return {similarity_factor(m.embedding, q.embedding, cfg.sigma_sim),
            std::exp(-age(m.timestamp, now) / cfg.t_temp),
            smoothed_success(m.successes, m.trials),
            context_overlap(m.context, q.context)};
}

Factors confidence_factors(const Pattern& m, const Probe& q, const EpmnConfig& cfg, Timestamp now) {
    const double n = static_cast<double>(m.member_count);
    return {similarity_factor(m.centroid, q.embedding, cfg.sigma_sim),
            std::exp(-age(m.last_updated, now) / cfg.t_temp),
            smoothed_success(m.reliability * n, n),
            context_overlap(m.context, q.context)};
}

double confidence(const Factors& factors, const FactorWeights& weights) {
    double c = 1.0;
    for (std::size_t j = 0; j < kFactorCount; ++j) {
        if (weights[j] < 0.0 || !std::isfinite(weights[j]))
            throw Error(ErrorCode::InvalidArgument, "confidence: factor weight must be finite and >= 0");
        c *= std::pow(std::clamp(factors[j], 0.0, 1.0), weights[j]);
    }
    return std::clamp(c, 0.0, 1.0);
}

// ---- MemoryPool ---------------------------------------------------------------

MemoryPool::MemoryPool(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "pool capacity must be positive");
    buckets_.emplace_back();
}

bool MemoryPool::known_episode_id(const std::string& id) const {
    return episodes_.count(id) != 0 || evicted_.count(id) != 0;
}

InsertResult MemoryPool::insert(Episode episode) {
    validate(episode);
    if (known_episode_id(episode.id)) throw Error(ErrorCode::DuplicateId, "episode '" + episode.id + "' already exists");
    InsertResult result{episode.id, {}};
    auto [it, ok] = episodes_.emplace(episode.id, std::move(episode));
    index_insert(it->second);
    evict_over_capacity(result.evicted);
    return result;
}

void MemoryPool::evict_over_capacity(std::vector<std::string>& evicted) {
    while (episodes_.size() > capacity_) {
        auto victim = std::min_element(episodes_.begin(), episodes_.end(), [](const auto& a, const auto& b) {
            return std::tie(a.second.memory_value, a.second.timestamp, a.first) <
                   std::tie(b.second.memory_value, b.second.timestamp, b.first);
        });
        const std::string id = victim->first;
        index_erase(id);
        episodes_.erase(victim);
        evicted_.insert(id);
        evicted.push_back(id);
    }
}

const Episode& MemoryPool::update_outcome(const std::string& id, Outcome outcome, bool success, double update_rate) {
    auto it = episodes_.find(id);
    if (it == episodes_.end()) throw Error(ErrorCode::NotFound, "episode '" + id + "' not in pool");
    Episode& e = it->second;
    e.outcome = outcome;
    e.memory_value = std::max(0.0, e.memory_value * (success ? 1.0 + update_rate : 1.0 - update_rate));
    e.trials += 1;
    if (success) e.successes += 1;
    refresh_reliability(id);
    return e;
}

void MemoryPool::refresh_reliability(const std::string& episode_id) {
    for (auto& [pid, p] : patterns_) {
        if (!p.member_ids.count(episode_id)) continue;
        std::size_t live = 0;
        std::size_t ok = 0;
        for (const auto& mid : p.member_ids) {
            auto it = episodes_.find(mid);
            if (it == episodes_.end()) continue;
            ++live;
            if (it->second.outcome == Outcome::Success) ++ok;
        }
        if (live) p.reliability = static_cast<double>(ok) / static_cast<double>(live);
    }
}

const Episode* MemoryPool::find_episode(const std::string& id) const {
    auto it = episodes_.find(id);
    return it == episodes_.end() ? nullptr : &it->second;
}

const Pattern* MemoryPool::find_pattern(const std::string& id) const {
    auto it = patterns_.find(id);
    return it == patterns_.end() ? nullptr : &it->second;
}

void MemoryPool::upsert_pattern(Pattern pattern) {
    std::vector<Pattern> one;
    one.push_back(std::move(pattern));
    upsert_patterns(std::move(one));
}

void MemoryPool::upsert_patterns(std::vector<Pattern> patterns) {
    for (auto& p : patterns) {
        if (p.id.empty()) throw Error(ErrorCode::SchemaViolation, "pattern without id");
        if (!(p.reliability >= 0.0 && p.reliability <= 1.0))
            throw Error(ErrorCode::SchemaViolation, "pattern '" + p.id + "': reliability outside [0, 1]");
        if (p.member_count != p.member_ids.size())
            throw Error(ErrorCode::SchemaViolation, "pattern '" + p.id + "': member_count mismatch");
        for (double s : p.spread)
            if (s < 0.0) throw Error(ErrorCode::SchemaViolation, "pattern '" + p.id + "': negative spread");
        if (std::abs(norm(p.centroid) - 1.0) > kNormTolerance)
            throw Error(ErrorCode::SchemaViolation, "pattern '" + p.id + "': centroid is not unit length");
        // Keep generated ids ahead of anything loaded.
        if (p.id.rfind("pat-", 0) == 0) {
            try {
                pattern_seq_ = std::max<std::size_t>(pattern_seq_, std::stoul(p.id.substr(4)));
            } catch (const std::exception&) {
            }
        }
        patterns_[p.id] = std::move(p);
    }
    rebuild_index();
}

std::string MemoryPool::next_pattern_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "pat-%06zu", ++pattern_seq_);
    return buf;
}

void MemoryPool::rebuild_index() {
    buckets_.clear();
    bucket_of_.clear();
    buckets_.emplace_back();
    for (const auto& [pid, p] : patterns_) {
        Bucket b;
        b.pattern_id = pid;
        b.centroid = p.centroid;
        for (const auto& mid : p.member_ids) {
            auto it = episodes_.find(mid);
            if (it == episodes_.end() || bucket_of_.count(mid)) continue;
            b.members.push_back(mid);
            b.min_cosine = std::min(b.min_cosine, clamp_unit(dot(it->second.embedding, b.centroid)));
            b.newest = std::max(b.newest, it->second.timestamp);
            bucket_of_[mid] = buckets_.size();
        }
        if (!b.members.empty()) buckets_.push_back(std::move(b));
    }
    for (const auto& [id, e] : episodes_) {
        if (bucket_of_.count(id)) continue;
        buckets_[0].members.push_back(id);
        buckets_[0].newest = std::max(buckets_[0].newest, e.timestamp);
        bucket_of_[id] = 0;
    }
}

void MemoryPool::index_insert(const Episode& e) {
    buckets_[0].members.push_back(e.id);
    buckets_[0].newest = std::max(buckets_[0].newest, e.timestamp);
    bucket_of_[e.id] = 0;
}

void MemoryPool::index_erase(const std::string& id) {
    auto it = bucket_of_.find(id);
    if (it == bucket_of_.end()) return;
    auto& members = buckets_[it->second].members;
    members.erase(std::remove(members.begin(), members.end(), id), members.end());
    bucket_of_.erase(it);
}

// ---- retrieval -------------------------------------------------------------------

double novelty(std::span<const double> q, const MemoryPool& pool) {
    if (pool.empty()) return 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, e] : pool.episodes()) best = std::min(best, 1.0 - cosine(e.embedding, q));
    for (const auto& [id, p] : pool.patterns()) best = std::min(best, 1.0 - cosine(p.centroid, q));
    return std::max(0.0, best);
}

bool ranks_before(const RetrievedMemory& a, const RetrievedMemory& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.id != b.id) return a.id < b.id;
    return a.kind == MemoryKind::Pattern && b.kind == MemoryKind::Episode;
}

namespace {

// Bounded top-K; the heap front is the currently worst kept entry.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(RetrievedMemory m) {
        if (heap_.size() < k_) {
            heap_.push_back(std::move(m));
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        } else if (ranks_before(m, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
            heap_.back() = std::move(m);
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        }
    }

    bool full() const noexcept { return heap_.size() >= k_; }
    double worst_score() const noexcept { return heap_.front().score; }

    std::vector<RetrievedMemory> take() && {
        std::sort(heap_.begin(), heap_.end(), ranks_before);
        return std::move(heap_);
    }

private:
    std::size_t k_;
    std::vector<RetrievedMemory> heap_;
};

struct Scorer {
    const Probe& q;
    double psi;
    const FactorWeights& weights;
    const EpmnConfig& cfg;
    Timestamp now;

    RetrievedMemory episode(const Episode& e) const {
        RetrievedMemory m;
        m.kind = MemoryKind::Episode;
        m.id = e.id;
        m.raw_score = score_memory(e, q.embedding, now, cfg);
        m.score = (1.0 - psi) * m.raw_score;
        m.factors = confidence_factors(e, q, cfg, now);
        m.confidence = confidence(m.factors, weights);
        return m;
    }

    RetrievedMemory pattern(const Pattern& p) const {
        RetrievedMemory m;
        m.kind = MemoryKind::Pattern;
        m.id = p.id;
        m.raw_score = score_memory(p, q.embedding, now, cfg);
        m.score = psi * m.raw_score;
        m.factors = confidence_factors(p, q, cfg, now);
        m.confidence = confidence(m.factors, weights);
        return m;
    }
};

// Largest (1 - psi)-scaled score any member of the bucket can reach.
double bucket_bound(const MemoryPool::Bucket& b, const Scorer& s) {
    const double angle_q = std::acos(clamp_unit(cosine(s.q.embedding, b.centroid)));
    const double radius = std::acos(clamp_unit(b.min_cosine));
    const double sim_ub = std::min(1.0, std::cos(std::max(0.0, angle_q - radius)) + kBoundSlack);
    const double rec_ub = std::exp(-age(b.newest, s.now) / s.cfg.tau_r);
    const double ub = s.cfg.lambda * sim_ub + (1.0 - s.cfg.lambda) * rec_ub;
    return (1.0 - s.psi) * ub + kBoundSlack;
}

}  // namespace

RetrievalResult retrieve_with_psi(const Probe& q, double psi, const MemoryPool& pool, const FactorWeights& weights,
                                  const EpmnConfig& cfg, Timestamp now, SearchMode mode) {
    for (double w : weights)
        if (w < 0.0 || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "retrieve: factor weight must be >= 0");
    if (!(psi >= 0.0 && psi <= 1.0)) throw Error(ErrorCode::InvalidArgument, "retrieve: psi outside [0, 1]");

    RetrievalResult result;
    result.psi = psi;
    result.novelty = novelty(q.embedding, pool);
    result.complexity = complexity(q.symptoms);

    const Scorer s{q, psi, weights, cfg, now};
    TopK top(cfg.k);

    for (const auto& [id, p] : pool.patterns()) top.offer(s.pattern(p));

    if (mode == SearchMode::Exhaustive) {
        for (const auto& [id, e] : pool.episodes()) top.offer(s.episode(e));
    } else {
        const auto& buckets = pool.buckets();
        for (const auto& id : buckets[0].members) top.offer(s.episode(*pool.find_episode(id)));

        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(buckets.size());
        for (std::size_t i = 1; i < buckets.size(); ++i) order.emplace_back(bucket_bound(buckets[i], s), i);
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        // The k_rel most promising clusters are always searched; later ones
        // only while their bound can still displace the current K-th entry.
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            const auto [bound, idx] = order[rank];
            if (rank >= cfg.k_rel && top.full() && bound < top.worst_score()) break;
            for (const auto& id : buckets[idx].members) top.offer(s.episode(*pool.find_episode(id)));
        }
    }

    result.memories = std::move(top).take();
    for (const auto& m : result.memories) result.c_max = std::max(result.c_max, m.confidence);
    return result;
}

RetrievalResult retrieve(const Probe& q, const MemoryPool& pool, const FactorWeights& weights, const EpmnConfig& cfg,
                         Timestamp now, SearchMode mode) {
    const double psi = mixing(novelty(q.embedding, pool), complexity(q.symptoms), cfg);
    return retrieve_with_psi(q, psi, pool, weights, cfg, now, mode);
}

// ---- pattern formation ------------------------------------------------------

Pattern abstract_pattern(std::string id, std::string seed_id, const std::vector<const Episode*>& members,
                         const std::set<std::string>& recorded) {
    if (members.empty()) throw Error(ErrorCode::InvalidArgument, "abstract_pattern: no members");
    const std::size_t d = members.front()->embedding.size();
    Pattern p;
    p.id = std::move(id);
    p.seed_id = std::move(seed_id);

    Vector mean(d, 0.0);
    for (const auto* e : members)
        for (std::size_t i = 0; i < d; ++i) mean[i] += e->embedding[i];
    const double n = static_cast<double>(members.size());
    for (auto& x : mean) x /= n;

    p.spread.assign(d, 0.0);
    for (const auto* e : members)
        for (std::size_t i = 0; i < d; ++i) {
            const double dx = e->embedding[i] - mean[i];
            p.spread[i] += dx * dx / n;
        }

    p.centroid = mean;
    if (!normalize(p.centroid)) {
        const auto seed = std::find_if(members.begin(), members.end(), [&](const Episode* e) { return e->id == p.seed_id; });
        p.centroid = (seed != members.end() ? *seed : members.front())->embedding;
    }

    const Episode* best = members.front();
    std::size_t ok = 0;
    std::map<std::string, std::size_t> label_counts;
    for (const auto* e : members) {
        if (std::tie(e->memory_value, e->timestamp) > std::tie(best->memory_value, best->timestamp) ||
            (e->memory_value == best->memory_value && e->timestamp == best->timestamp && e->id < best->id))
            best = e;
        if (e->outcome == Outcome::Success) ++ok;
        p.last_updated = std::max(p.last_updated, e->timestamp);
        for (const auto& l : e->context) ++label_counts[l];
        p.member_ids.insert(e->id);
    }
    for (const auto& [label, c] : label_counts)
        if (2 * c >= members.size()) p.context.insert(label);

    p.strategy = Strategy{best->root_cause, best->actions, best->resolution_path};
    p.symptoms = best->symptoms;
    p.reliability = static_cast<double>(ok) / n;
    p.member_ids.insert(recorded.begin(), recorded.end());
    p.member_count = p.member_ids.size();
    return p;
}

namespace {

std::vector<std::string> neighborhood(const MemoryPool& pool, const Episode& seed, double theta) {
    std::vector<std::string> out;
    for (const auto& [id, e] : pool.episodes())
        if (cosine(seed.embedding, e.embedding) > theta) out.push_back(id);
    return out;
}

std::vector<const Episode*> live_members(const MemoryPool& pool, const std::set<std::string>& ids) {
    std::vector<const Episode*> out;
    for (const auto& id : ids)
        if (const auto* e = pool.find_episode(id)) out.push_back(e);
    return out;
}

PatternUpdate form_from_seeds(MemoryPool& pool, const EpmnConfig& cfg, const std::vector<std::string>& seeds,
                              bool refresh_all) {
    PatternUpdate update;
    std::map<std::string, Pattern> working = pool.patterns();
    std::set<std::string> touched;

    for (const auto& seed_id : seeds) {
        const Episode* seed = pool.find_episode(seed_id);
        if (!seed) continue;
        const auto hood = neighborhood(pool, *seed, cfg.theta_sim);
        if (hood.size() < cfg.theta_pattern) continue;
        const std::set<std::string> hood_set(hood.begin(), hood.end());

        std::string best_id;
        double best_cover = 0.0;
        for (const auto& [pid, p] : working) {
            if (p.member_ids.empty()) continue;
            std::size_t common = 0;
            for (const auto& m : p.member_ids) common += hood_set.count(m);
            const double cover = static_cast<double>(common) / static_cast<double>(p.member_ids.size());
            if (cover > best_cover) {
                best_cover = cover;
                best_id = pid;
            }
        }

        if (best_cover > 0.5) {
            Pattern& p = working.at(best_id);
            const auto live = live_members(pool, p.member_ids);
            if (hood.size() > live.size()) {
                std::set<std::string> recorded;
                for (const auto& m : p.member_ids)
                    if (!pool.find_episode(m)) recorded.insert(m);
                std::vector<const Episode*> members;
                for (const auto& id : hood) members.push_back(pool.find_episode(id));
                p = abstract_pattern(best_id, seed_id, members, recorded);
                touched.insert(best_id);
            }
        } else {
            std::vector<const Episode*> members;
            for (const auto& id : hood) members.push_back(pool.find_episode(id));
            const std::string id = pool.next_pattern_id();
            working.emplace(id, abstract_pattern(id, seed_id, members));
            update.created.push_back(id);
            touched.insert(id);
        }
    }

    // Refresh statistics from current member state so reruns converge.
    std::vector<Pattern> changed;
    for (auto& [pid, p] : working) {
        const bool is_new = std::find(update.created.begin(), update.created.end(), pid) != update.created.end();
        if (!refresh_all && !touched.count(pid)) continue;
        const auto live = live_members(pool, p.member_ids);
        if (live.empty()) continue;
        std::set<std::string> recorded;
        for (const auto& m : p.member_ids)
            if (!pool.find_episode(m)) recorded.insert(m);
        Pattern fresh = abstract_pattern(pid, p.seed_id, live, recorded);
        const Pattern* before = pool.find_pattern(pid);
        const bool differs = !before || before->member_ids != fresh.member_ids || before->centroid != fresh.centroid ||
                             before->reliability != fresh.reliability || before->last_updated != fresh.last_updated ||
                             before->strategy.actions != fresh.strategy.actions ||
                             before->strategy.root_cause != fresh.strategy.root_cause ||
                             before->strategy.resolution_path != fresh.strategy.resolution_path;
        if (differs) {
            if (!is_new) update.updated.push_back(pid);
            changed.push_back(std::move(fresh));
        }
    }
    if (!changed.empty()) pool.upsert_patterns(std::move(changed));
    return update;
}

}  // namespace

PatternUpdate form_patterns(MemoryPool& pool, const EpmnConfig& cfg) {
    std::vector<std::string> seeds;
    seeds.reserve(pool.size());
    for (const auto& [id, e] : pool.episodes()) seeds.push_back(id);
    return form_from_seeds(pool, cfg, seeds, true);
}

PatternUpdate form_patterns_from(MemoryPool& pool, const EpmnConfig& cfg, const std::vector<std::string>& seeds) {
    return form_from_seeds(pool, cfg, seeds, false);
}

const std::vector<std::string>* resolution_path_of(const MemoryPool& pool, MemoryKind kind, const std::string& id) {
    if (kind == MemoryKind::Episode) {
        const auto* e = pool.find_episode(id);
        return e ? &e->resolution_path : nullptr;
    }
    const auto* p = pool.find_pattern(id);
    return p ? &p->strategy.resolution_path : nullptr;
}

std::set<std::string> hints(const Probe& q, const MemoryPool& pool, const FactorWeights& weights, const EpmnConfig& cfg,
                            Timestamp now) {
    std::set<std::string> out;
    if (pool.empty() || cfg.k_hint == 0) return out;
    EpmnConfig narrowed = cfg;
    narrowed.k = cfg.k_hint;
    const auto top = retrieve(q, pool, weights, narrowed, now);
    for (const auto& m : top.memories)
        if (const auto* path = resolution_path_of(pool, m.kind, m.id)) out.insert(path->begin(), path->end());
    return out;
}

}  // namespace kubediag::epmn

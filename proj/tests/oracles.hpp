#pragma once

// Brute-force reference implementations. They only share the vector
// primitives with the library; scoring and ranking are re-derived here.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kubediag/controller.hpp"
#include "kubediag/embedder.hpp"
#include "kubediag/epmn.hpp"
#include "kubediag/kubegraph.hpp"

namespace oracle {

using kubediag::Vector;

struct Ranked {
    double score;
    double conf;
    std::string id;
    int kind;  // 0 pattern, 1 episode
};

inline double laplace(double s, double n) { return (s + 1.0) / (n + 2.0); }

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

inline double memory_confidence(double cos, double age, double succ, double ctx,
                                const kubediag::epmn::EpmnConfig& cfg, const kubediag::epmn::FactorWeights& w) {
    const double f[4] = {std::clamp(std::exp(-std::max(0.0, 1.0 - cos) / cfg.sigma_sim), 0.0, 1.0),
                         std::exp(-age / cfg.t_temp), succ, ctx};
    double c = 1.0;
    for (int j = 0; j < 4; ++j) c *= std::pow(std::clamp(f[j], 0.0, 1.0), w[j]);
    return std::clamp(c, 0.0, 1.0);
}

/// Top-K ids by linear scan over every pattern and episode.
inline std::vector<std::string> retrieve_ids(const kubediag::epmn::Probe& q, const kubediag::epmn::MemoryPool& pool,
                                             const kubediag::epmn::FactorWeights& w,
                                             const kubediag::epmn::EpmnConfig& cfg, double psi, double now) {
    std::vector<Ranked> rows;
    auto raw = [&](const Vector& v, double ts) {
        return cfg.lambda * kubediag::cosine(v, q.embedding) +
               (1.0 - cfg.lambda) * std::exp(-std::max(0.0, now - ts) / cfg.tau_r);
    };
    for (const auto& [id, p] : pool.patterns()) {
        const double n = static_cast<double>(p.member_count);
        rows.push_back({psi * raw(p.centroid, p.last_updated),
                        memory_confidence(kubediag::cosine(p.centroid, q.embedding),
                                          std::max(0.0, now - p.last_updated), laplace(p.reliability * n, n),
                                          jaccard(p.context, q.context), cfg, w),
                        id, 0});
    }
    for (const auto& [id, e] : pool.episodes()) {
        rows.push_back({(1.0 - psi) * raw(e.embedding, e.timestamp),
                        memory_confidence(kubediag::cosine(e.embedding, q.embedding),
                                          std::max(0.0, now - e.timestamp), laplace(e.successes, e.trials),
                                          jaccard(e.context, q.context), cfg, w),
                        id, 1});
    }
    std::sort(rows.begin(), rows.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.conf != b.conf) return a.conf > b.conf;
        if (a.id != b.id) return a.id < b.id;
        return a.kind < b.kind;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < rows.size() && i < cfg.k; ++i) out.push_back(rows[i].id);
    return out;
}

struct Path {
    std::vector<std::string> nodes;
    std::vector<kubediag::graph::Relation> rels;
    double score = 0.0;
    double path_score = 0.0;
};

/// Every simple path of 1..max_hops edges from a seed to a RootCause node,
/// ranked by blended priority, truncated to n_chains.
inline std::vector<Path> enumerate_chains(const kubediag::graph::KnowledgeGraph& g, const Vector& query,
                                          const std::vector<std::vector<std::string>>& memory_paths,
                                          const std::set<std::string>& visited,
                                          const kubediag::graph::SearchConfig& cfg) {
    using namespace kubediag::graph;
    std::vector<Path> all;
    auto finish = [&](Path p) {
        double logw = 0.0;
        std::set<std::pair<std::string, std::string>> pe;
        for (std::size_t i = 1; i < p.nodes.size(); ++i) {
            logw += std::log(g.edge(p.nodes[i - 1], p.rels[i - 1], p.nodes[i])->weight);
            pe.emplace(p.nodes[i - 1], p.nodes[i]);
        }
        p.path_score = std::exp(logw / static_cast<double>(p.rels.size()));
        double prior = 0.0;
        for (const auto& mp : memory_paths) {
            std::size_t common = 0;
            std::set<std::pair<std::string, std::string>> me;
            for (std::size_t i = 1; i < mp.size(); ++i) me.emplace(mp[i - 1], mp[i]);
            for (const auto& e : pe) common += me.count(e);
            prior = std::max(prior, static_cast<double>(common) / static_cast<double>(pe.size()));
        }
        std::size_t fresh = 0;
        for (const auto& n : p.nodes) fresh += visited.count(n) ? 0 : 1;
        const double nov = static_cast<double>(fresh) / static_cast<double>(p.nodes.size());
        p.score = cfg.alpha[0] * prior + cfg.alpha[1] * p.path_score + cfg.alpha[2] * nov;
        all.push_back(std::move(p));
    };
    std::function<void(Path&)> dfs = [&](Path& p) {
        if (p.rels.size() == cfg.max_hops) return;
        for (const auto& e : g.out_edges(p.nodes.back())) {
            if (std::find(p.nodes.begin(), p.nodes.end(), e.dst) != p.nodes.end()) continue;
            p.nodes.push_back(e.dst);
            p.rels.push_back(e.relation);
            if (g.node(e.dst)->type == NodeType::RootCause) finish(p);
            dfs(p);
            p.nodes.pop_back();
            p.rels.pop_back();
        }
    };
    for (const auto& [id, n] : g.nodes()) {
        if (kubediag::cosine(g.label_embedding(id), query) < cfg.seed_threshold) continue;
        Path p;
        p.nodes.push_back(id);
        dfs(p);
    }
    std::sort(all.begin(), all.end(), [](const Path& a, const Path& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.path_score != b.path_score) return a.path_score > b.path_score;
        if (a.nodes != b.nodes) return a.nodes < b.nodes;
        return a.rels < b.rels;
    });
    if (all.size() > cfg.n_chains) all.resize(cfg.n_chains);
    return all;
}

inline bool same_chains(const std::vector<kubediag::graph::CausalChain>& got, const std::vector<Path>& want) {
    if (got.size() != want.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const auto& steps = got[i].steps;
        if (steps.size() != want[i].nodes.size()) return false;
        for (std::size_t j = 0; j < steps.size(); ++j) {
            if (steps[j].node != want[i].nodes[j]) return false;
            if (j > 0 && (!steps[j].via || *steps[j].via != want[i].rels[j - 1])) return false;
        }
    }
    return true;
}

/// Direct evaluation of xi * misroute share + (1 - xi) * normalized cost.
inline double direct_replay_loss(double tau, const kubediag::control::History& h, const kubediag::control::OptParams& p) {
    double err = 0.0, cost = 0.0;
    for (const auto& r : h) {
        const bool fast = r.c_max > tau;
        if (fast && !r.fast_sufficient) err += 1.0;
        cost += fast ? 1.0 : p.analytic_cost;
    }
    const double n = static_cast<double>(h.size());
    return p.xi * (err / n) + (1.0 - p.xi) * (cost / n / p.analytic_cost);
}

/// argmin over tau in {0, 0.01, ..., 1}; the smallest tau wins ties.
inline double grid_tau_star(const kubediag::control::History& h, const kubediag::control::OptParams& p) {
    double best_tau = 0.0, best = 1e300;
    for (int i = 0; i <= 100; ++i) {
        const double l = direct_replay_loss(i / 100.0, h, p);
        if (l < best - 1e-12) {
            best = l;
            best_tau = i / 100.0;
        }
    }
    return best_tau;
}

/// Smallest loss on the grid outside [tau_star - radius, tau_star + radius].
inline double grid_runner_up(const kubediag::control::History& h, const kubediag::control::OptParams& p,
                             double tau_star, double radius) {
    double best = 1e300;
    for (int i = 0; i <= 100; ++i)
        if (std::abs(i / 100.0 - tau_star) > radius + 1e-12) best = std::min(best, direct_replay_loss(i / 100.0, h, p));
    return best;
}

inline double bce(double c, bool y) {
    c = std::clamp(c, 1e-7, 1.0 - 1e-7);
    return y ? -std::log(c) : -std::log(1.0 - c);
}

}  // namespace oracle

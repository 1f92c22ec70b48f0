#include "kubediag/epmn_io.hpp"

#include <fstream>
#include <string>

#include "kubediag/errors.hpp"

namespace kubediag::epmn {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "': " + ex.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

}  // namespace

json to_json(const Episode& e) {
    return json{{"id", e.id},
                {"symptoms", e.symptoms},
                {"context", e.context},
                {"actions", e.actions},
                {"outcome", to_string(e.outcome)},
                {"timestamp", e.timestamp},
                {"memory_value", e.memory_value},
                {"embedding", e.embedding},
                {"resolution_path", e.resolution_path},
                {"root_cause", e.root_cause},
                {"successes", e.successes},
                {"trials", e.trials}};
}

Episode episode_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "episode must be a JSON object");
    Episode e;
    e.id = field<std::string>(j, "id");
    e.symptoms = field<std::vector<std::string>>(j, "symptoms");
    e.context = field<std::set<std::string>>(j, "context");
    e.actions = field<std::vector<std::string>>(j, "actions");
    try {
        e.outcome = outcome_from_string(field<std::string>(j, "outcome"));
    } catch (const Error& ex) {
        if (ex.code() == ErrorCode::SchemaViolation) throw;
        throw Error(ErrorCode::SchemaViolation, ex.what());
    }
    e.timestamp = field<double>(j, "timestamp");
    e.memory_value = field<double>(j, "memory_value");
    e.embedding = field<Vector>(j, "embedding");
    e.resolution_path = field<std::vector<std::string>>(j, "resolution_path");
    e.root_cause = field_or<std::string>(j, "root_cause", "");
    e.successes = field_or<int>(j, "successes", 0);
    e.trials = field_or<int>(j, "trials", 0);
    validate(e);
    return e;
}

json to_json(const Pattern& p) {
    return json{{"id", p.id},
                {"centroid", p.centroid},
                {"spread", p.spread},
                {"strategy",
                 {{"root_cause", p.strategy.root_cause},
                  {"actions", p.strategy.actions},
                  {"resolution_path", p.strategy.resolution_path}}},
                {"reliability", p.reliability},
                {"member_count", p.member_count},
                {"member_ids", p.member_ids},
                {"last_updated", p.last_updated},
                {"seed_id", p.seed_id},
                {"context", p.context},
                {"symptoms", p.symptoms}};
}

Pattern pattern_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "pattern must be a JSON object");
    Pattern p;
    p.id = field<std::string>(j, "id");
    p.centroid = field<Vector>(j, "centroid");
    p.spread = field<Vector>(j, "spread");
    const json s = field<json>(j, "strategy");
    p.strategy.root_cause = field_or<std::string>(s, "root_cause", "");
    p.strategy.actions = field<std::vector<std::string>>(s, "actions");
    p.strategy.resolution_path = field<std::vector<std::string>>(s, "resolution_path");
    p.reliability = field<double>(j, "reliability");
    p.member_count = field<std::size_t>(j, "member_count");
    p.member_ids = field<std::set<std::string>>(j, "member_ids");
    p.last_updated = field<double>(j, "last_updated");
    p.seed_id = field_or<std::string>(j, "seed_id", "");
    p.context = field_or<std::set<std::string>>(j, "context", {});
    p.symptoms = field_or<std::vector<std::string>>(j, "symptoms", {});
    return p;
}

json to_json(const EpmnConfig& c) {
    return json{{"theta_sim", c.theta_sim},     {"theta_pattern", c.theta_pattern},
                {"k", c.k},                     {"lambda", c.lambda},
                {"tau_r", c.tau_r},             {"sigma_sim", c.sigma_sim},
                {"t_temp", c.t_temp},           {"k_hint", c.k_hint},
                {"psi_weights", c.psi_weights}, {"psi_bias", c.psi_bias},
                {"embedding_dim", c.embedding_dim}, {"k_rel", c.k_rel},
                {"update_rate", c.update_rate}};
}

EpmnConfig config_from_json(const json& j, EpmnConfig c) {
    c.theta_sim = field_or(j, "theta_sim", c.theta_sim);
    c.theta_pattern = field_or(j, "theta_pattern", c.theta_pattern);
    c.k = field_or(j, "k", c.k);
    c.lambda = field_or(j, "lambda", c.lambda);
    c.tau_r = field_or(j, "tau_r", c.tau_r);
    c.sigma_sim = field_or(j, "sigma_sim", c.sigma_sim);
    c.t_temp = field_or(j, "t_temp", c.t_temp);
    c.k_hint = field_or(j, "k_hint", c.k_hint);
    c.psi_weights = field_or(j, "psi_weights", c.psi_weights);
    c.psi_bias = field_or(j, "psi_bias", c.psi_bias);
    c.embedding_dim = field_or(j, "embedding_dim", c.embedding_dim);
    c.k_rel = field_or(j, "k_rel", c.k_rel);
    c.update_rate = field_or(j, "update_rate", c.update_rate);
    c.validate();
    return c;
}

std::vector<Episode> read_episodes(std::istream& in) {
    std::vector<Episode> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(episode_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw LineError(ErrorCode::SchemaViolation, n, ex.what());
        } catch (const Error& ex) {
            throw LineError(ErrorCode::SchemaViolation, n, ex.what());
        }
    }
    return out;
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return read_episodes(in);
}

void write_episodes(std::ostream& out, const MemoryPool& pool) {
    for (const auto& [id, e] : pool.episodes()) out << to_json(e).dump() << '\n';
}

void save_episodes(const std::filesystem::path& path, const MemoryPool& pool) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_episodes(out, pool);
}

json pattern_snapshot(const MemoryPool& pool, const EpmnConfig& cfg) {
    json patterns = json::array();
    for (const auto& [id, p] : pool.patterns()) patterns.push_back(to_json(p));
    return json{{"config", to_json(cfg)}, {"patterns", std::move(patterns)}};
}

std::vector<Pattern> patterns_from_snapshot(const json& j) {
    if (!j.is_object() || !j.contains("patterns") || !j.at("patterns").is_array())
        throw Error(ErrorCode::SchemaViolation, "pattern snapshot needs a 'patterns' array");
    std::vector<Pattern> out;
    for (const auto& p : j.at("patterns")) out.push_back(pattern_from_json(p));
    return out;
}

}  // namespace kubediag::epmn

#include "config.hpp"

#include <cctype>
#include <fstream>

#include "kubediag/errors.hpp"

extern char** environ;

namespace kubediag::cli {

using nlohmann::json;

namespace {

std::string env_name(const std::string& path) {
    std::string out = kEnvPrefix;
    for (char c : path) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void apply_env(json& node, const std::string& path, const std::map<std::string, std::string>& env) {
    if (node.is_object()) {
        for (auto& [key, child] : node.items()) apply_env(child, path.empty() ? key : path + "." + key, env);
        return;
    }
    auto it = env.find(env_name(path));
    if (it == env.end()) return;
    json value = json::parse(it->second, nullptr, false);
    if (value.is_discarded() || (node.is_string() && !value.is_string())) value = it->second;
    node = std::move(value);
}

}  // namespace

json to_json(const CliConfig& c) {
    return json{{"memory_path", c.memory_path.string()},
                {"patterns_path", c.patterns_path.string()},
                {"graph_path", c.graph_path.string()},
                {"controller_path", c.controller_path.string()},
                {"scenarios_path", c.scenarios_path.string()},
                {"synthesis_url", c.synthesis_url},
                {"seed", c.seed},
                {"engine", kubediag::to_json(c.engine)},
                {"simulation",
                 {{"epochs", c.simulation.epochs},
                  {"recurrence", c.simulation.recurrence},
                  {"window", c.simulation.window},
                  {"start_time", c.simulation.start_time},
                  {"step_seconds", c.simulation.step_seconds}}}};
}

std::map<std::string, std::string> prefixed_environment() {
    std::map<std::string, std::string> out;
    const std::string prefix = kEnvPrefix;
    for (char** e = environ; e && *e; ++e) {
        const std::string kv = *e;
        const auto eq = kv.find('=');
        if (eq == std::string::npos || kv.compare(0, prefix.size(), prefix) != 0) continue;
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

CliConfig load_config(const std::filesystem::path& file, const std::map<std::string, std::string>& env) {
    json j = to_json(CliConfig{});
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + file.string());
        json user = json::parse(in, nullptr, false);
        if (user.is_discarded() || !user.is_object())
            throw Error(ErrorCode::ParseError, "config file " + file.string() + " is not a JSON object");
        j.merge_patch(user);
    }
    apply_env(j, "", env);

    CliConfig c;
    try {
        c.memory_path = j.at("memory_path").get<std::string>();
        c.patterns_path = j.at("patterns_path").get<std::string>();
        c.graph_path = j.at("graph_path").get<std::string>();
        c.controller_path = j.at("controller_path").get<std::string>();
        c.scenarios_path = j.at("scenarios_path").get<std::string>();
        c.synthesis_url = j.at("synthesis_url").get<std::string>();
        c.seed = j.at("seed").get<std::uint64_t>();
        const auto& sim = j.at("simulation");
        c.simulation.epochs = sim.at("epochs").get<std::size_t>();
        c.simulation.recurrence = sim.at("recurrence").get<double>();
        c.simulation.window = sim.at("window").get<std::size_t>();
        c.simulation.start_time = sim.at("start_time").get<double>();
        c.simulation.step_seconds = sim.at("step_seconds").get<double>();
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("config: ") + ex.what());
    }
    c.engine = engine_config_from_json(j.at("engine"));
    c.simulation.seed = c.seed;
    c.simulation.validate();
    return c;
}

}  // namespace kubediag::cli

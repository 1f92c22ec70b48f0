#include "kubediag/harness.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "kubediag/query_io.hpp"
#include "kubediag/text.hpp"

namespace kubediag::harness {

using nlohmann::json;

namespace {

Error parse_error(const std::string& msg) { return Error(ErrorCode::ScenarioParseError, msg); }

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw parse_error(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw parse_error(std::string("field '") + key + "': " + ex.what());
    }
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

std::string category_label(graph::Category c) {
    std::string out;
    for (char ch : std::string(graph::to_string(c))) {
        if (std::isupper(static_cast<unsigned char>(ch)) && !out.empty()) out += '-';
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

}  // namespace

// ---- scenarios -----------------------------------------------------------------

void validate(const FaultScenario& s) {
    const auto& cats = graph::fault_categories();
    if (std::find(cats.begin(), cats.end(), s.category) == cats.end())
        throw parse_error("category must be one of the six fault categories");
    auto blank = [](const std::string& x) { return text::trim(x).empty(); };
    if (blank(s.id)) throw parse_error("empty id");
    if (s.symptoms.empty() || std::any_of(s.symptoms.begin(), s.symptoms.end(), blank))
        throw parse_error("symptoms must be non-empty");
    if (s.context.empty()) throw parse_error("context must be non-empty");
    if (blank(s.logs)) throw parse_error("logs must be non-empty");
    if (blank(s.ground_truth_root_cause)) throw parse_error("ground_truth_root_cause must be non-empty");
    if (s.resolution_steps.empty() || std::any_of(s.resolution_steps.begin(), s.resolution_steps.end(), blank))
        throw parse_error("resolution_steps must be non-empty");
}

json to_json(const FaultScenario& s) {
    return json{{"id", s.id},
                {"category", graph::to_string(s.category)},
                {"symptoms", s.symptoms},
                {"context", s.context},
                {"logs", s.logs},
                {"ground_truth_root_cause", s.ground_truth_root_cause},
                {"resolution_steps", s.resolution_steps}};
}

FaultScenario scenario_from_json(const json& j) {
    FaultScenario s;
    s.id = field<std::string>(j, "id");
    try {
        s.category = graph::category_from_string(field<std::string>(j, "category"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ScenarioParseError) throw;
        throw parse_error(e.what());
    }
    s.symptoms = field<std::vector<std::string>>(j, "symptoms");
    s.context = field<std::set<std::string>>(j, "context");
    s.logs = field<std::string>(j, "logs");
    if (text::count_tokens(s.logs) > kMaxLogTokens) s.logs = text::truncate_tokens(s.logs, kMaxLogTokens);
    s.ground_truth_root_cause = field<std::string>(j, "ground_truth_root_cause");
    s.resolution_steps = field<std::vector<std::string>>(j, "resolution_steps");
    validate(s);
    return s;
}

Query to_query(const FaultScenario& s) { return Query{s.id, s.symptoms, s.context}; }

ScenarioLoad read_scenarios(std::istream& in) {
    ScenarioLoad out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (text::trim(line).empty()) continue;
        try {
            out.scenarios.push_back(scenario_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            out.errors.emplace_back(ErrorCode::ScenarioParseError, n, std::string("invalid JSON: ") + ex.what());
        } catch (const Error& ex) {
            out.errors.emplace_back(ErrorCode::ScenarioParseError, n, ex.what());
        }
    }
    return out;
}

ScenarioLoad load_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file " + path.string());
    return read_scenarios(in);
}

void write_scenarios(std::ostream& out, const std::vector<FaultScenario>& scenarios) {
    for (const auto& s : scenarios) out << to_json(s).dump() << '\n';
}

void save_scenarios(const std::filesystem::path& path, const std::vector<FaultScenario>& scenarios) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write scenario file " + path.string());
    write_scenarios(out, scenarios);
}

// ---- generation ------------------------------------------------------------------

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::below(0)");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

CategoryMix default_mix() {
    const std::array<double, 6> counts{412, 387, 298, 276, 315, 185};
    const double total = 1873.0;
    CategoryMix mix;
    const auto& cats = graph::fault_categories();
    for (std::size_t i = 0; i < cats.size(); ++i) mix.emplace_back(cats[i], counts[i] / total);
    return mix;
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "apportion: negative weight");
        sum += w;
    }
    if (weights.empty() || !(sum > 0.0)) throw Error(ErrorCode::InvalidArgument, "apportion: weights sum to zero");

    std::vector<std::size_t> seats(weights.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t given = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = static_cast<double>(total) * weights[i] / sum;
        seats[i] = static_cast<std::size_t>(std::floor(quota));
        given += seats[i];
        remainders.emplace_back(quota - std::floor(quota), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; given < total; ++k, ++given) ++seats[remainders[k % remainders.size()].second];
    return seats;
}

std::vector<FaultScenario> generate_scenarios(std::uint64_t seed, std::size_t total, const CategoryMix& mix) {
    if (total == 0) throw Error(ErrorCode::InvalidArgument, "generate_scenarios: total must be >= 1");
    const auto& cats = graph::fault_categories();
    double sum = 0.0;
    std::vector<double> weights;
    std::set<graph::Category> seen;
    for (const auto& [c, share] : mix) {
        if (std::find(cats.begin(), cats.end(), c) == cats.end())
            throw Error(ErrorCode::InvalidArgument, "category mix may only name fault categories");
        if (!seen.insert(c).second) throw Error(ErrorCode::InvalidArgument, "category mix repeats a category");
        if (!(share >= 0.0)) throw Error(ErrorCode::InvalidArgument, "category mix shares must be >= 0");
        sum += share;
        weights.push_back(share);
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error(ErrorCode::InvalidArgument, "category mix must sum to 1");

    const auto seats = apportion(total, weights);
    std::vector<graph::Category> order;
    for (std::size_t i = 0; i < mix.size(); ++i) order.insert(order.end(), seats[i], mix[i].first);

    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::map<graph::Category, std::vector<const ScenarioTemplate*>> by_category;
    for (const auto& t : scenario_templates()) by_category[t.category].push_back(&t);

    static const std::array<const char*, 3> namespaces{"prod", "staging", "dev"};
    std::vector<FaultScenario> out;
    out.reserve(total);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& bank = by_category.at(order[i]);
        const ScenarioTemplate& t = *bank[rng.below(bank.size())];
        const std::size_t dropped = rng.below(t.symptoms.size());
        const std::string ns = namespaces[rng.below(namespaces.size())];
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "%05llx", static_cast<unsigned long long>(rng.below(0x100000)));
        const std::string pod = t.key + "-" + suffix;

        FaultScenario s;
        char id[32];
        std::snprintf(id, sizeof id, "scn-%06zu", i + 1);
        s.id = id;
        s.category = t.category;
        for (std::size_t k = 0; k < t.symptoms.size(); ++k)
            if (k != dropped) s.symptoms.push_back(t.symptoms[k]);
        s.context = {"category:" + category_label(t.category), "namespace:" + ns, "workload:" + t.workload};
        std::ostringstream logs;
        logs << "$ kubectl describe pod " << pod << " -n " << ns << "\nName: " << pod << "\nNamespace: " << ns
             << "\nEvents:\n  Type     Reason  From     Message\n";
        for (const auto& line : s.symptoms) logs << "  Warning  " << t.reason << "  kubelet  " << line << '\n';
        s.logs = text::truncate_tokens(logs.str(), kMaxLogTokens);
        s.ground_truth_root_cause = t.root_cause;
        for (const auto& step : t.steps) s.resolution_steps.push_back(replace_all(step, "{pod}", pod));
        out.push_back(std::move(s));
    }
    return out;
}

// ---- simulation --------------------------------------------------------------------

double root_cause_score(const std::string& a, const std::string& b) { return text::token_overlap(a, b); }

bool root_cause_matches(const std::string& predicted, const std::string& truth) {
    return root_cause_score(predicted, truth) >= kMatchThreshold;
}

void SimulationConfig::validate() const {
    if (epochs == 0) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (!(recurrence >= 0.0 && recurrence <= 1.0)) throw Error(ErrorCode::InvalidArgument, "recurrence must be in [0, 1]");
    if (window == 0) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
    if (!(step_seconds >= 0.0)) throw Error(ErrorCode::InvalidArgument, "step_seconds must be >= 0");
}

std::string LearningCurve::to_csv() const {
    std::string out = "window,accuracy,intuitive_rate,mean_latency_units,tau\n";
    for (const auto& w : windows)
        out += std::to_string(w.window) + "," + fixed6(w.accuracy) + "," + fixed6(w.intuitive_rate) + "," +
               fixed6(w.mean_latency_units) + "," + fixed6(w.tau) + "\n";
    return out;
}

LearningCurve curve_from_sessions(const std::vector<SessionOutcome>& sessions, std::size_t window) {
    if (window == 0) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
    LearningCurve curve;
    for (std::size_t start = 0; start < sessions.size(); start += window) {
        const std::size_t end = std::min(sessions.size(), start + window);
        const double n = static_cast<double>(end - start);
        WindowMetrics w;
        w.window = start / window + 1;
        for (std::size_t i = start; i < end; ++i) {
            w.accuracy += sessions[i].correct ? 1.0 : 0.0;
            w.intuitive_rate += sessions[i].pathway == Pathway::Intuitive ? 1.0 : 0.0;
            w.mean_latency_units += sessions[i].latency_units;
        }
        w.accuracy /= n;
        w.intuitive_rate /= n;
        w.mean_latency_units /= n;
        w.tau = sessions[end - 1].tau_after;
        curve.windows.push_back(w);
    }
    return curve;
}

LearningCurve curve_from_trace(std::istream& trace, std::size_t window) {
    std::vector<SessionOutcome> sessions;
    std::string line;
    for (std::size_t n = 1; std::getline(trace, line); ++n) {
        if (text::trim(line).empty()) continue;
        try {
            const json j = json::parse(line);
            SessionOutcome s;
            s.session_id = j.at("id").get<std::string>();
            s.scenario_id = j.at("query").at("id").get<std::string>();
            s.pathway = pathway_from_string(j.at("decision").at("pathway").get<std::string>());
            s.latency_units = j.at("latency_units").get<double>();
            s.c_max = j.at("decision").at("c_max").get<double>();
            const auto& fb = j.at("feedback");
            if (!fb.is_null()) {
                s.correct = fb.at("outcome").get<std::string>() == "success";
                s.tau_after = fb.at("tau_after").get<double>();
            }
            sessions.push_back(std::move(s));
        } catch (const json::exception& ex) {
            throw LineError(ErrorCode::ParseError, n, ex.what());
        }
    }
    return curve_from_sessions(sessions, window);
}

SimulationResult run_continuous(Engine& engine, const std::vector<FaultScenario>& scenarios,
                                const SimulationConfig& cfg) {
    cfg.validate();
    SimulationResult result;
    if (scenarios.empty()) return result;

    Rng rng(cfg.seed);
    std::vector<std::size_t> seen;
    std::vector<bool> is_seen(scenarios.size(), false);
    std::size_t tick = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::size_t fresh = 0;
        for (std::size_t k = 0; k < scenarios.size(); ++k, ++tick) {
            const bool replay = rng.unit() < cfg.recurrence;
            std::size_t idx;
            if (!seen.empty() && (replay || fresh >= scenarios.size())) {
                idx = seen[rng.below(seen.size())];
            } else {
                idx = fresh++;
                if (!is_seen[idx]) {
                    is_seen[idx] = true;
                    seen.push_back(idx);
                }
            }
            const FaultScenario& sc = scenarios[idx];
            const Timestamp now = cfg.start_time + cfg.step_seconds * static_cast<double>(tick);

            SessionOutcome out;
            out.scenario_id = sc.id;
            try {
                const auto session = engine.diagnose(to_query(sc), now, sc.logs);
                out.session_id = session.id;
                out.correct = root_cause_matches(session.solution.root_cause, sc.ground_truth_root_cause);
                out.pathway = session.decision.pathway;
                out.latency_units = session.latency_units;
                out.c_max = session.decision.c_max;
                Feedback fb;
                fb.session_id = session.id;
                fb.outcome = out.correct ? Outcome::Success : Outcome::Failure;
                fb.confirmed_root_cause = sc.ground_truth_root_cause;
                out.tau_after = engine.feedback(fb, now).tau_after;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoEvidence) throw;
                out.latency_units = engine.config().control.analytic_cost;
                out.tau_after = engine.controller().tau;
            }
            result.sessions.push_back(std::move(out));
        }
    }
    result.curve = curve_from_sessions(result.sessions, cfg.window);
    return result;
}

std::string AblationReport::to_table() const {
    std::ostringstream out;
    out << "metric,with_memory,without_memory,relative_change\n";
    out << "accuracy," << fixed6(accuracy_with) << ',' << fixed6(accuracy_without) << ',' << fixed6(accuracy_gain) << '\n';
    out << "mean_latency_units," << fixed6(latency_with) << ',' << fixed6(latency_without) << ','
        << fixed6(latency_change) << '\n';
    out << "sessions," << sessions << ',' << sessions << ",0.000000\n";
    return out.str();
}

AblationReport evaluate_ablation(Engine& with_memory, Engine& without_memory,
                                 const std::vector<FaultScenario>& scenarios, const SimulationConfig& cfg) {
    const auto a = run_continuous(with_memory, scenarios, cfg);
    const auto b = run_continuous(without_memory, scenarios, cfg);
    auto summarize = [](const std::vector<SessionOutcome>& ss, double& acc, double& lat) {
        acc = lat = 0.0;
        if (ss.empty()) return;
        for (const auto& s : ss) {
            acc += s.correct ? 1.0 : 0.0;
            lat += s.latency_units;
        }
        acc /= static_cast<double>(ss.size());
        lat /= static_cast<double>(ss.size());
    };
    AblationReport r;
    r.sessions = a.sessions.size();
    summarize(a.sessions, r.accuracy_with, r.latency_with);
    summarize(b.sessions, r.accuracy_without, r.latency_without);
    auto relative = [](double x, double base) { return base > 0.0 ? (x - base) / base : (x > 0.0 ? 1.0 : 0.0); };
    r.accuracy_gain = relative(r.accuracy_with, r.accuracy_without);
    r.latency_change = relative(r.latency_with, r.latency_without);
    return r;
}

}  // namespace kubediag::harness

#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "kubediag/controller.hpp"
#include "kubediag/epmn_io.hpp"
#include "kubediag/errors.hpp"
#include "kubediag/http_client.hpp"
#include "kubediag/kubegraph_io.hpp"

namespace kubediag::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_file(const fs::path& p, const char* what) {
    if (!p.empty() && !fs::is_regular_file(p))
        throw Error(ErrorCode::IoError, std::string(what) + " not found: " + p.string());
}

void require_writable_parent(const fs::path& p, const char* what) {
    if (p.empty()) return;
    const auto parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(parent))
        throw Error(ErrorCode::IoError, std::string("directory for ") + what + " does not exist: " + parent.string());
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << content;
}

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::shared_ptr<synth::SynthesisClient> make_client(const CliConfig& cfg) {
    if (cfg.synthesis_url.empty()) return std::make_shared<synth::TemplateStubClient>();
    synth::HttpClientConfig http;
    http.base_url = cfg.synthesis_url;
    http.timeout_seconds = cfg.engine.synthesis.timeout_seconds;
    return std::make_shared<synth::HttpSynthesisClient>(http);
}

std::shared_ptr<const Embedder> make_embedder(const CliConfig& cfg) {
    return std::make_shared<HashEmbedder>(cfg.engine.memory.embedding_dim);
}

graph::KnowledgeGraph load_or_empty_graph(const fs::path& p, std::shared_ptr<const Embedder> embedder) {
    if (p.empty() || !fs::exists(p)) return graph::KnowledgeGraph(std::move(embedder));
    return graph::load_graph(p, std::move(embedder));
}

void print_solution(std::ostream& out, const DiagnosisSession& s) {
    out << "session: " << s.id << '\n';
    out << "pathway: " << to_string(s.decision.pathway) << " (c_max " << fixed6(s.decision.c_max) << ", tau "
        << fixed6(s.decision.tau_snapshot) << ")\n";
    out << "root cause: " << s.solution.root_cause << '\n';
    out << "steps:\n";
    for (std::size_t i = 0; i < s.solution.steps.size(); ++i) out << "  " << i + 1 << ". " << s.solution.steps[i] << '\n';
    if (!s.solution.reasoning.empty()) {
        out << "reasoning:\n";
        for (const auto& r : s.solution.reasoning) out << "  - " << r << '\n';
    }
    out << "confidence: " << fixed6(s.solution.confidence) << '\n';
    out << "sources:";
    for (const auto& src : s.solution.sources) out << ' ' << src;
    out << '\n';
}

}  // namespace

int cmd_diagnose(const CliConfig& cfg, const GlobalOptions& g, const DiagnoseOptions& o, std::ostream& out,
                 std::ostream& err) {
    require_file(cfg.graph_path, "graph file");
    if (g.learn) {
        if (cfg.memory_path.empty()) throw Error(ErrorCode::InvalidArgument, "--learn needs memory_path in the config");
        require_writable_parent(cfg.memory_path, "memory_path");
        require_writable_parent(cfg.patterns_path, "patterns_path");
        require_writable_parent(cfg.controller_path, "controller_path");
    } else {
        require_file(cfg.memory_path, "memory file");
        require_file(cfg.patterns_path, "pattern snapshot");
    }
    if (!o.scenario_file.empty()) require_file(o.scenario_file, "scenario file");
    if (o.scenario_file.empty() && o.symptoms.empty())
        throw Error(ErrorCode::InvalidQuery, "give symptom text or --scenario FILE");
    std::optional<Outcome> outcome;
    if (!o.outcome.empty()) outcome = outcome_from_string(o.outcome);
    if (g.learn && !outcome && o.scenario_file.empty())
        throw Error(ErrorCode::InvalidArgument, "--learn on a free-text query needs --outcome");

    auto embedder = make_embedder(cfg);
    Engine engine(cfg.engine, embedder, load_or_empty_graph(cfg.graph_path, embedder), make_client(cfg));

    Timestamp now = 0.0;
    if (!cfg.memory_path.empty() && fs::exists(cfg.memory_path)) {
        for (auto& e : epmn::load_episodes(cfg.memory_path)) {
            now = std::max(now, e.timestamp);
            engine.insert_episode(std::move(e));
        }
    }
    if (!cfg.patterns_path.empty() && fs::exists(cfg.patterns_path))
        engine.restore_patterns(epmn::patterns_from_snapshot(json::parse(read_file(cfg.patterns_path))));
    else
        engine.rebuild_patterns();
    if (!cfg.controller_path.empty() && fs::exists(cfg.controller_path))
        engine.set_controller(control::state_from_json(json::parse(read_file(cfg.controller_path))));

    struct Item {
        Query query;
        std::string logs;
        std::optional<std::string> truth;
    };
    std::vector<Item> items;
    if (!o.scenario_file.empty()) {
        auto loaded = harness::load_scenarios(o.scenario_file);
        for (const auto& e : loaded.errors) err << "skipping scenario: " << e.what() << '\n';
        for (const auto& s : loaded.scenarios) items.push_back({harness::to_query(s), s.logs, s.ground_truth_root_cause});
    } else {
        items.push_back({Query{o.query_id, o.symptoms, {o.context.begin(), o.context.end()}}, {}, std::nullopt});
    }

    int code = kExitOk;
    for (const auto& item : items) {
        DiagnosisSession s;
        try {
            s = engine.diagnose(item.query, now, item.logs);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoEvidence) throw;
            err << "no evidence for " << item.query.id << ": " << e.what() << '\n';
            code = kExitNoEvidence;
            continue;
        }
        if (g.learn) {
            Feedback fb;
            fb.session_id = s.id;
            if (outcome) {
                fb.outcome = *outcome;
            } else {
                fb.outcome = harness::root_cause_matches(s.solution.root_cause, *item.truth) ? Outcome::Success
                                                                                             : Outcome::Failure;
            }
            if (!o.root_cause.empty())
                fb.confirmed_root_cause = o.root_cause;
            else if (item.truth)
                fb.confirmed_root_cause = item.truth;
            const auto report = engine.feedback(fb, now);
            err << "learned " << report.episode_id << ", tau " << fixed6(report.tau_before) << " -> "
                << fixed6(report.tau_after) << '\n';
            s = *engine.session(s.id);
        }
        if (g.json) {
            json j = synth::to_json(s.solution);
            if (g.trace) j["trace"] = trace_json(s);
            out << j.dump() << '\n';
        } else {
            print_solution(out, s);
            if (g.trace) out << "trace: " << trace_json(s).dump() << '\n';
        }
    }

    if (g.learn) {
        std::ostringstream episodes;
        const auto pool = engine.memory();
        epmn::write_episodes(episodes, pool);
        write_file(cfg.memory_path, episodes.str());
        if (!cfg.patterns_path.empty())
            write_file(cfg.patterns_path, epmn::pattern_snapshot(pool, cfg.engine.memory).dump(2) + "\n");
        if (!cfg.controller_path.empty())
            write_file(cfg.controller_path, control::to_json(engine.controller()).dump(2) + "\n");
    }
    return code;
}

int cmd_ingest(const CliConfig& cfg, const GlobalOptions& g, const IngestOptions& o, std::ostream& out,
               std::ostream& err) {
    if (!fs::is_directory(o.dir)) throw Error(ErrorCode::IoError, "corpus directory not found: " + o.dir);
    const fs::path graph_out = o.graph_out.empty() ? cfg.graph_path : fs::path(o.graph_out);
    require_writable_parent(graph_out, "graph output");
    require_writable_parent(o.documents_out, "documents output");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    auto embedder = make_embedder(cfg);
    graph::KnowledgeGraph graph = load_or_empty_graph(graph_out, embedder);
    const graph::KeywordClassifier classifier;
    std::map<graph::Category, std::size_t> counts;
    std::vector<std::string> skipped;
    std::size_t triples = 0;
    std::ostringstream documents;

    for (const auto& f : files) {
        graph::Document doc;
        try {
            doc = graph::classify_document(read_file(f), classifier, "doc-" + f.filename().string(),
                                           graph::DocumentMetadata{f.filename().string(), 0.0, 0.0});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ClassificationError && e.code() != ErrorCode::InvalidArgument) throw;
            err << "skipping " << f.filename().string() << ": " << e.what() << '\n';
            skipped.push_back(f.filename().string());
            continue;
        }
        ++counts[doc.category];
        for (const auto& t : graph::extract_triples(doc)) {
            graph.add_triple(t.src, t.edge, t.dst);
            ++triples;
        }
        documents << graph::to_json(doc).dump() << '\n';
    }

    if (!graph_out.empty()) graph::save_graph(graph_out, graph);
    if (!o.documents_out.empty()) write_file(o.documents_out, documents.str());

    std::size_t total = 0;
    for (const auto& [c, n] : counts) total += n;
    if (g.json) {
        json cats = json::object();
        for (std::size_t i = 0; i < graph::kCategoryCount; ++i) {
            const auto c = static_cast<graph::Category>(i);
            cats[graph::to_string(c)] = counts.count(c) ? counts.at(c) : 0;
        }
        out << json{{"documents", total}, {"skipped", skipped}, {"triples", triples}, {"categories", cats}}.dump()
            << '\n';
    } else {
        out << "documents: " << total << "\nskipped: " << skipped.size() << "\ntriples: " << triples << '\n';
        for (std::size_t i = 0; i < graph::kCategoryCount; ++i) {
            const auto c = static_cast<graph::Category>(i);
            out << graph::to_string(c) << ": " << (counts.count(c) ? counts.at(c) : 0) << '\n';
        }
    }
    return kExitOk;
}

int cmd_simulate(const CliConfig& cfg, const GlobalOptions& g, const SimulateOptions& o, std::ostream& out,
                 std::ostream& err) {
    const fs::path corpus = o.scenarios.empty() ? cfg.scenarios_path : fs::path(o.scenarios);
    if (corpus.empty() && !o.generate)
        throw Error(ErrorCode::InvalidArgument, "no scenario corpus: pass --scenarios FILE or --generate N");
    require_file(corpus, "scenario corpus");
    require_file(cfg.graph_path, "graph file");
    require_writable_parent(o.out, "output");
    require_writable_parent(o.trace_out, "trace output");

    std::vector<harness::FaultScenario> scenarios;
    if (!corpus.empty()) {
        auto loaded = harness::load_scenarios(corpus);
        for (const auto& e : loaded.errors) err << "skipping scenario: " << e.what() << '\n';
        scenarios = std::move(loaded.scenarios);
    } else {
        scenarios = harness::generate_scenarios(cfg.seed, *o.generate);
    }

    harness::SimulationConfig sim = cfg.simulation;
    if (o.epochs) sim.epochs = *o.epochs;
    if (o.recurrence) sim.recurrence = *o.recurrence;
    if (o.window) sim.window = *o.window;
    sim.validate();

    auto embedder = make_embedder(cfg);
    auto graph_for_run = [&] {
        return cfg.graph_path.empty() ? harness::reference_graph(embedder) : graph::load_graph(cfg.graph_path, embedder);
    };

    std::string report;
    if (g.ablation) {
        EngineConfig off = cfg.engine;
        off.memory_enabled = false;
        Engine with(cfg.engine, embedder, graph_for_run(), make_client(cfg));
        Engine without(off, embedder, graph_for_run(), make_client(cfg));
        const auto r = harness::evaluate_ablation(with, without, scenarios, sim);
        if (g.json) {
            report = json{{"accuracy_with", r.accuracy_with},
                          {"accuracy_without", r.accuracy_without},
                          {"latency_with", r.latency_with},
                          {"latency_without", r.latency_without},
                          {"accuracy_gain", r.accuracy_gain},
                          {"latency_change", r.latency_change},
                          {"sessions", r.sessions}}
                         .dump() +
                     "\n";
        } else {
            report = r.to_table();
        }
        if (!o.trace_out.empty()) {
            std::ostringstream trace;
            with.write_trace(trace);
            write_file(o.trace_out, trace.str());
        }
    } else {
        Engine engine(cfg.engine, embedder, graph_for_run(), make_client(cfg));
        const auto result = harness::run_continuous(engine, scenarios, sim);
        report = result.curve.to_csv();
        if (!o.trace_out.empty()) {
            std::ostringstream trace;
            engine.write_trace(trace);
            write_file(o.trace_out, trace.str());
        }
    }

    if (o.out.empty())
        out << report;
    else
        write_file(o.out, report);
    return kExitOk;
}

int cmd_generate(const CliConfig& cfg, const GlobalOptions&, const GenerateOptions& o, std::ostream& out) {
    require_writable_parent(o.out, "output");
    const auto scenarios = harness::generate_scenarios(cfg.seed, o.total);
    std::ostringstream buf;
    harness::write_scenarios(buf, scenarios);
    if (o.out.empty())
        out << buf.str();
    else
        write_file(o.out, buf.str());
    return kExitOk;
}

}  // namespace kubediag::cli

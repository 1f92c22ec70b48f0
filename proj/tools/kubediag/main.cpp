#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "kubediag/errors.hpp"

using namespace kubediag;
using namespace kubediag::cli;

int main(int argc, char** argv) {
    CLI::App app{"Kubernetes fault diagnosis with episodic memory and causal-graph search"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_flag("--trace", g.trace, "Include the session trace");
    app.add_flag("--learn", g.learn, "Apply feedback and persist memory, patterns and controller state");
    app.add_flag("--ablation", g.ablation, "simulate: compare with and without memory");

    DiagnoseOptions d;
    auto* diagnose = app.add_subcommand("diagnose", "Diagnose symptom text or a scenario file");
    diagnose->add_option("symptoms", d.symptoms, "Symptom lines");
    diagnose->add_option("--context", d.context, "Context labels such as namespace:prod");
    diagnose->add_option("--id", d.query_id, "Query id for free-text queries");
    diagnose->add_option("--scenario", d.scenario_file, "Scenario JSON-lines file to diagnose");
    diagnose->add_option("--outcome", d.outcome, "Outcome to learn from: success, failure or partial");
    diagnose->add_option("--root-cause", d.root_cause, "Confirmed root cause to learn from");

    IngestOptions in;
    auto* ingest = app.add_subcommand("ingest", "Classify documents and grow the knowledge graph");
    ingest->add_option("dir", in.dir, "Corpus directory")->required();
    ingest->add_option("--graph-out", in.graph_out, "Graph file to write (default: graph_path)");
    ingest->add_option("--documents-out", in.documents_out, "Write classified documents as JSON lines");

    SimulateOptions sim;
    std::size_t generate_n = 0;
    auto* simulate = app.add_subcommand("simulate", "Run the continuous-learning simulation");
    simulate->add_option("--scenarios", sim.scenarios, "Scenario JSON-lines corpus");
    auto* gen_opt = simulate->add_option("--generate", generate_n, "Generate N scenarios instead of loading");
    simulate->add_option("--epochs", sim.epochs, "Passes over the corpus");
    simulate->add_option("--recurrence", sim.recurrence, "Probability of replaying a seen scenario");
    simulate->add_option("--window", sim.window, "Sessions per learning-curve window");
    simulate->add_option("--out", sim.out, "Write the CSV here instead of standard output");
    simulate->add_option("--trace-out", sim.trace_out, "Write the session trace (JSON lines)");

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Write a synthetic scenario corpus");
    generate->add_option("--total", gen.total, "Number of scenarios")->check(CLI::PositiveNumber);
    generate->add_option("--out", gen.out, "Output file (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Error& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        CliConfig cfg = load_config(g.config, prefixed_environment());
        if (*seed_opt) {
            cfg.seed = seed;
            cfg.simulation.seed = seed;
        }
        if (*gen_opt) sim.generate = generate_n;
        if (diagnose->parsed()) return cmd_diagnose(cfg, g, d, std::cout, std::cerr);
        if (ingest->parsed()) return cmd_ingest(cfg, g, in, std::cout, std::cerr);
        if (simulate->parsed()) return cmd_simulate(cfg, g, sim, std::cout, std::cerr);
        if (generate->parsed()) return cmd_generate(cfg, g, gen, std::cout);
    } catch (const Error& e) {
        std::cerr << "kubediag: " << e.what() << '\n';
        return e.code() == ErrorCode::NoEvidence ? kExitNoEvidence : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "kubediag: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

// Command-line front end: world generation, analysis, budgets, trial runs,
// reports and heatmap export.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "sop/errors.hpp"
#include "sop/expert.hpp"
#include "sop/harness.hpp"
#include "sop/world_io.hpp"
#include "sop/worldgen.hpp"

namespace {

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
    } else {
        sop::write_file_atomic(out, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential optimization benchmark: worlds, expert budgets and agent trials"};
    app.require_subcommand(1);

    // gen-world
    std::string level = "L0";
    std::uint64_t seed = 0;
    int dimension = 3;
    int resolution = sop::kDefaultAnalysisResolution;
    std::string out;
    auto* gen = app.add_subcommand("gen-world", "Generate a world and its analysis");
    gen->add_option("--level", level, "L0, L1 or L2")->capture_default_str();
    gen->add_option("--seed", seed, "World seed")->capture_default_str();
    gen->add_option("--dimension", dimension, "n; the world has n - 1 inputs")->capture_default_str();
    gen->add_option("--resolution", resolution, "Analysis grid nodes per axis")->capture_default_str();
    gen->add_option("--out", out, "Output file (stdout if omitted)");

    // analyze
    std::string world_file;
    auto* analyze = app.add_subcommand("analyze", "Re-run the extrema census of a world file");
    analyze->add_option("--world", world_file, "World file")->required();
    analyze->add_option("--resolution", resolution, "Grid nodes per axis")->capture_default_str();
    analyze->add_option("--out", out, "Output file (stdout if omitted)");

    // budget
    sop::ExpertConfig expert;
    std::uint64_t seed_base = 0;
    auto* budget = app.add_subcommand("budget", "Estimate the expert query budget of a world");
    budget->add_option("--world", world_file, "World file")->required();
    budget->add_option("--repeats", expert.repeats, "Expert runs")->capture_default_str();
    budget->add_option("--max-queries", expert.max_queries, "Per-run query cap")->capture_default_str();
    budget->add_option("--seed-base", seed_base, "Seed of the expert runs")->capture_default_str();
    budget->add_option("--out", out, "Output file (stdout if omitted)");

    // run
    std::string config_file, scheme, endpoint, output_dir, sandbox;
    std::optional<std::string> run_level;
    std::optional<int> trials, agents, parallelism, pinned_budget, max_rounds;
    std::optional<std::uint64_t> master_seed;
    bool fixed_world = false;
    auto* run = app.add_subcommand("run", "Run trials of an agent scheme");
    run->add_option("--config", config_file, "JSON run configuration");
    run->add_option("--level", run_level, "L0, L1 or L2");
    run->add_option("--trials", trials, "Number of trials");
    run->add_option("--scheme", scheme, "llmplus, self-reflection, debate, majority or ace");
    run->add_option("--agents", agents, "Agents for debate or majority");
    run->add_option("--max-rounds", max_rounds, "Round limit per trial");
    run->add_option("--endpoint", endpoint, "mock:<policy|file>, replay:<dir>, record:<dir> or http");
    run->add_option("--sandbox", sandbox, "stub or process:<runner command>");
    run->add_option("--master-seed", master_seed, "Seed of the whole batch");
    run->add_option("--budget", pinned_budget, "Fixed query budget instead of the expert estimate");
    run->add_option("--parallelism", parallelism, "Concurrent trials");
    run->add_option("--output", output_dir, "Run directory");
    run->add_flag("--fixed-world", fixed_world, "Reuse one world for every trial");

    // report
    std::string run_dir;
    std::optional<std::string> baseline;
    auto* report = app.add_subcommand("report", "Summarise a run directory");
    report->add_option("run_dir", run_dir, "Run directory")->required();
    report->add_option("--baseline", baseline, "Run directory to normalise token usage against");

    // export-heatmap
    int heat_resolution = 101;
    auto* heatmap = app.add_subcommand("export-heatmap", "Write an x,y,f grid for plotting");
    heatmap->add_option("--world", world_file, "World file")->required();
    heatmap->add_option("--resolution", heat_resolution, "Grid nodes per axis")->capture_default_str();
    heatmap->add_option("--out", out, "Output file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            sop::GenerationOptions opts;
            opts.resolution = resolution;
            const auto world =
                sop::generate_world(sop::parse_level(level), seed, dimension, {}, opts);
            emit(sop::world_to_json(world), out);
        } else if (*analyze) {
            const auto world = sop::load_world(world_file);
            emit(sop::analysis_to_json(sop::analyze_world(world.world, resolution)) + "\n", out);
        } else if (*budget) {
            expert.validate(3);
            const auto world = sop::load_world(world_file);
            emit(sop::budget_to_json(sop::estimate_budget(world.world, world.analysis, expert, seed_base)), out);
        } else if (*run) {
            sop::RunConfig cfg = config_file.empty() ? sop::RunConfig{}
                                                     : sop::RunConfig::from_json(sop::read_file(config_file));
            if (run_level) cfg.level = sop::parse_level(*run_level);
            if (trials) cfg.trials = *trials;
            if (!scheme.empty()) cfg.scheme = sop::SchemeConfig::of(sop::parse_scheme_kind(scheme));
            if (agents) cfg.scheme.agent_count = *agents;
            if (max_rounds) cfg.scheme.max_rounds = *max_rounds;
            if (!endpoint.empty()) cfg.endpoint = endpoint;
            if (!sandbox.empty()) cfg.sandbox = sandbox;
            if (master_seed) cfg.master_seed = *master_seed;
            if (pinned_budget) cfg.pinned_budget = *pinned_budget;
            if (parallelism) cfg.parallelism = *parallelism;
            if (!output_dir.empty()) cfg.output_dir = output_dir;
            if (fixed_world) cfg.fixed_world = true;
            const auto records = sop::run_trials(cfg);
            int succeeded = 0;
            for (const auto& r : records) succeeded += r.status == sop::SessionStatus::Succeeded;
            std::printf("%d/%zu trials succeeded; records in %s\n", succeeded, records.size(),
                        cfg.output_dir.string().c_str());
        } else if (*report) {
            std::optional<std::filesystem::path> base;
            if (baseline) base = *baseline;
            const auto rep = sop::build_report(run_dir, base);
            sop::write_report(run_dir, rep);
            std::cout << sop::report_table(rep);
        } else if (*heatmap) {
            const auto world = sop::load_world(world_file);
            emit(sop::export_heatmap_csv(world.world, heat_resolution), out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

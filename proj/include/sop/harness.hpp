#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sop/expert.hpp"
#include "sop/llm.hpp"
#include "sop/runtime.hpp"
#include "sop/schemes.hpp"
#include "sop/world.hpp"

namespace sop {

/// Everything a batch of trials depends on. `endpoint` selects the agent:
///   mock:oracle | mock:random | mock:ascent   scripted policies (".script" suffix allowed)
///   mock:<file>                               JSON array of canned replies
///   replay:<dir>                              recorded exchanges
///   http                                      live endpoint configured by `http`
///   record:<dir>                              live endpoint, recording every exchange
/// `sandbox` is "stub" or "process:<runner command>".
struct RunConfig {
    ComplexityLevel level = ComplexityLevel::L0;
    int trials = 100;
    SchemeConfig scheme;
    std::string endpoint = "mock:oracle";
    EndpointConfig http;
    ExpertConfig expert;
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "runs/default";
    int parallelism = 1;
    std::optional<int> pinned_budget;
    bool fixed_world = false;  ///< every trial reuses the world seeded by master_seed
    int dimension = 3;
    double relaxation = kDefaultRelaxation;
    std::string sandbox = "stub";

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Snapshot written to <output_dir>/config.json. Excludes output_dir and
    /// parallelism, which do not affect results.
    std::string to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static RunConfig from_json(std::string_view text);
};

struct TrialRecord {
    int index = 0;
    std::uint64_t world_seed = 0;
    std::string world_file;  ///< relative to the run directory
    std::string transcript_file;
    int budget = 0;
    bool budget_reliable = false;
    SessionStatus status = SessionStatus::Aborted;
    int queries_used = 0;
    std::optional<double> best_value;
    double global_max = 0.0;
    int rounds = 0;
    Usage usage;
    std::string abort_reason;
};

std::string trial_record_to_json(const TrialRecord& record);
TrialRecord trial_record_from_json(std::string_view text);

/// Seed of trial `index`'s world.
std::uint64_t trial_world_seed(const RunConfig& config, int index);

/// Runs every trial whose record is missing from the run directory and
/// returns all records by index. Trials already on disk are not rerun.
std::vector<TrialRecord> run_trials(const RunConfig& config);

struct Normalization {
    std::string baseline;
    double ratio_of_means = 0.0;  ///< mean total tokens / baseline mean total tokens
    double mean_of_ratios = 0.0;  ///< mean over paired trial indices
    int paired_trials = 0;
};

struct Report {
    std::string scheme;
    std::string level;
    int trials = 0;
    int succeeded = 0;
    double success_rate = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double mean_prompt_tokens = 0.0;
    double mean_completion_tokens = 0.0;
    double mean_total_tokens = 0.0;
    bool usage_estimated = false;
    std::optional<Normalization> normalized;
    std::vector<TrialRecord> rows;
};

/// 95% Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(int successes, int trials);

/// Folds the persisted records of a run, optionally against a baseline run.
Report build_report(const std::filesystem::path& run_dir,
                    const std::optional<std::filesystem::path>& baseline = std::nullopt);
std::string report_json(const Report& report);
std::string report_csv(const Report& report);
std::string report_table(const Report& report);
/// Writes report.json and report.csv into the run directory.
void write_report(const std::filesystem::path& run_dir, const Report& report);

/// "x,y,f" rows over a resolution x resolution grid, x varying fastest.
/// Throws UnsupportedDimension unless the world is 3-dimensional.
std::string export_heatmap_csv(const WorldSpec& world, int resolution);

}  // namespace sop

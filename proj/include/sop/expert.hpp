#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sop/kernels.hpp"
#include "sop/rng.hpp"
#include "sop/runtime.hpp"
#include "sop/world.hpp"

namespace sop {

enum class LengthscaleRule { MedianHeuristic };

struct ExpertConfig {
    int initial_samples = 16;
    int batch_size = 4;
    int candidate_pool = 2048;
    double explore_fraction = 0.25;
    int max_queries = 400;
    int repeats = 20;
    double reliability_quantile = 0.95;
    LengthscaleRule lengthscale_rule = LengthscaleRule::MedianHeuristic;
    double jitter = 1e-8;
    /// Minimum spacing between selected points, as a fraction of domain width.
    double min_distance_fraction = 0.01;
    ExecPolicy policy = ExecPolicy::Parallel;

    /// Throws ConfigError naming the first offending field.
    void validate(int dimension) const;
};

struct ExpertRun {
    std::uint64_t seed = 0;
    std::optional<int> queries_used_to_success;
    std::vector<QueryRecord> query_log;
    int surrogate_fallbacks = 0;  ///< iterations that fell back to random search
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::optional<int> queries_used_to_success;
    int queries = 0;
};

struct BudgetReport {
    std::vector<RunSummary> per_run;
    int budget = 0;
    bool reliable = false;
};

/// Latin-hypercube design of `count` points over `bounds`.
std::vector<Point> latin_hypercube(const std::vector<Interval>& bounds, int count, Philox& rng);

/// Monte Carlo start, then GP batches: EI-maximising exploitation plus a
/// variance-maximising active-learning share, both chosen from a fresh
/// uniform candidate pool. Stops at success or `max_queries`.
ExpertRun expert_solve(const WorldSpec& world, const WorldAnalysis& analysis,
                       const ExpertConfig& config, std::uint64_t seed);

/// Upper empirical quantile: the smallest observed value v with
/// index ceil((n - 1) q) in sorted order.
int upper_quantile(std::vector<int> values, double q);

/// Runs `repeats` expert solves with seeds derive_seed(seed_base, r). The
/// budget is the reliability quantile of queries-to-success rounded up to a
/// batch multiple, or max_queries if any run failed.
BudgetReport estimate_budget(const WorldSpec& world, const WorldAnalysis& analysis,
                             const ExpertConfig& config, std::uint64_t seed_base = 0);

}  // namespace sop

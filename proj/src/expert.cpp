#include "sop/expert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sop/errors.hpp"
#include "sop/gp.hpp"
#include "sop/rng.hpp"

namespace sop {

void ExpertConfig::validate(int dimension) const {
    if (initial_samples < 2 * (dimension - 1))
        throw ConfigError("expert.initial_samples", "must be >= 2 * (dimension - 1)");
    if (batch_size < 1) throw ConfigError("expert.batch_size", "must be >= 1");
    if (candidate_pool < batch_size)
        throw ConfigError("expert.candidate_pool", "must be >= batch_size");
    if (!(explore_fraction >= 0.0 && explore_fraction <= 1.0))
        throw ConfigError("expert.explore_fraction", "must lie in [0, 1]");
    if (max_queries < initial_samples)
        throw ConfigError("expert.max_queries", "must be >= initial_samples");
    if (max_queries % batch_size != 0)
        throw ConfigError("expert.max_queries", "must be a multiple of batch_size");
    if (repeats < 1) throw ConfigError("expert.repeats", "must be >= 1");
    if (!(reliability_quantile > 0.0 && reliability_quantile <= 1.0))
        throw ConfigError("expert.reliability_quantile", "must lie in (0, 1]");
    if (!(jitter > 0.0)) throw ConfigError("expert.jitter", "must be positive");
}

std::vector<Point> latin_hypercube(const std::vector<Interval>& bounds, int count, Philox& rng) {
    std::vector<Point> pts(static_cast<std::size_t>(count), Point(bounds.size()));
    std::vector<int> perm(static_cast<std::size_t>(count));
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = count - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
        const double cell = bounds[d].width() / count;
        for (int i = 0; i < count; ++i)
            pts[i][d] = bounds[d].lo + (perm[i] + rng.uniform()) * cell;
    }
    return pts;
}

namespace {

struct Selector {
    const std::vector<Interval>& bounds;
    double min_distance;
    std::vector<Point> taken;  // observed plus already selected

    bool accept(const Point& p) {
        for (const auto& q : taken) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < p.size(); ++d) d2 += (p[d] - q[d]) * (p[d] - q[d]);
            if (d2 < min_distance * min_distance) return false;
        }
        taken.push_back(p);
        return true;
    }
};

Point uniform_point(const std::vector<Interval>& bounds, Philox& rng) {
    Point p(bounds.size());
    for (std::size_t d = 0; d < bounds.size(); ++d) p[d] = rng.uniform(bounds[d].lo, bounds[d].hi);
    return p;
}

}  // namespace

ExpertRun expert_solve(const WorldSpec& world, const WorldAnalysis& analysis,
                       const ExpertConfig& config, std::uint64_t seed) {
    config.validate(world.dimension);
    const auto& bounds = world.bounds;
    const auto axes = static_cast<Eigen::Index>(bounds.size());
    double width = 0.0;
    for (const auto& b : bounds) width = std::max(width, b.width());

    // Non-owning handles: the session never outlives this call.
    Session session(std::shared_ptr<const WorldSpec>(&world, [](const WorldSpec*) {}),
                    std::shared_ptr<const WorldAnalysis>(&analysis, [](const WorldAnalysis*) {}),
                    config.max_queries);
    Philox rng(seed);
    ExpertRun run;
    run.seed = seed;

    session.submit_batch({latin_hypercube(bounds, config.initial_samples, rng)});

    const int explore = static_cast<int>(std::lround(config.batch_size * config.explore_fraction));
    const int exploit = config.batch_size - explore;

    while (session.running()) {
        const auto& log = session.queries();
        const auto n = static_cast<Eigen::Index>(log.size());
        Eigen::MatrixXd x(n, axes);
        Eigen::VectorXd y(n);
        double incumbent = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index d = 0; d < axes; ++d) x(i, d) = log[i].point[d];
            y(i) = *log[i].value;
            incumbent = std::max(incumbent, y(i));
        }

        Selector sel{bounds, config.min_distance_fraction * width, {}};
        for (const auto& q : log) sel.taken.push_back(q.point);
        QueryBatch batch;

        const Eigen::VectorXd base = median_lengthscales(x);
        std::optional<GaussianProcess> gp;
        for (double factor : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
            for (double jitter : {config.jitter, 10.0 * config.jitter}) {
                try {
                    GaussianProcess cand(x, y, base * factor, jitter);
                    if (!gp || cand.log_marginal_likelihood() > gp->log_marginal_likelihood())
                        gp.emplace(std::move(cand));
                    break;
                } catch (const SurrogateSingular&) {
                }
            }
        }

        if (gp) {
            Eigen::MatrixXd pool(config.candidate_pool, axes);
            for (Eigen::Index i = 0; i < pool.rows(); ++i)
                for (Eigen::Index d = 0; d < axes; ++d)
                    pool(i, d) = rng.uniform(bounds[d].lo, bounds[d].hi);
            const auto pred = gp->predict(pool, config.policy);

            std::vector<double> ei(static_cast<std::size_t>(pool.rows()));
            for (Eigen::Index i = 0; i < pool.rows(); ++i)
                ei[i] = expected_improvement(pred.mean(i), pred.stddev(i), incumbent);

            std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.rows()));
            auto pick = [&](int count, auto better) {
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(), better);
                int got = 0;
                for (auto i : order) {
                    if (got == count) break;
                    Point p(static_cast<std::size_t>(axes));
                    for (Eigen::Index d = 0; d < axes; ++d) p[d] = pool(i, d);
                    if (sel.accept(p)) {
                        batch.points.push_back(std::move(p));
                        ++got;
                    }
                }
            };
            pick(exploit, [&](Eigen::Index a, Eigen::Index b) {
                if (ei[a] != ei[b]) return ei[a] > ei[b];
                return pred.stddev(a) > pred.stddev(b);
            });
            pick(explore, [&](Eigen::Index a, Eigen::Index b) {
                return pred.stddev(a) > pred.stddev(b);
            });
        } else {
            ++run.surrogate_fallbacks;
        }
        while (static_cast<int>(batch.points.size()) < config.batch_size) {
            Point p = uniform_point(bounds, rng);
            if (sel.accept(p)) batch.points.push_back(std::move(p));
        }
        session.submit_batch(batch);
    }

    if (session.status() == SessionStatus::Succeeded)
        run.queries_used_to_success = session.queries_used();
    run.query_log = session.queries();
    return run;
}

int upper_quantile(std::vector<int> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(static_cast<double>(values.size() - 1) * q - 1e-12));
    return values[std::min(idx, values.size() - 1)];
}

BudgetReport estimate_budget(const WorldSpec& world, const WorldAnalysis& analysis,
                             const ExpertConfig& config, std::uint64_t seed_base) {
    config.validate(world.dimension);
    std::vector<RunSummary> runs(static_cast<std::size_t>(config.repeats));
    ExpertConfig inner = config;
    if (config.policy == ExecPolicy::Parallel) inner.policy = ExecPolicy::Serial;

    auto one = [&](int r) {
        const auto seed = derive_seed(seed_base, static_cast<std::uint64_t>(r));
        const ExpertRun run = expert_solve(world, analysis, inner, seed);
        runs[r] = {seed, run.queries_used_to_success, static_cast<int>(run.query_log.size())};
    };
    if (config.policy == ExecPolicy::Serial) {
        for (int r = 0; r < config.repeats; ++r) one(r);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < config.repeats; ++r) one(r);
    }

    BudgetReport report;
    report.per_run = std::move(runs);
    std::vector<int> used;
    for (const auto& r : report.per_run)
        if (r.queries_used_to_success) used.push_back(*r.queries_used_to_success);
    if (used.size() != report.per_run.size()) {
        report.budget = config.max_queries;
        report.reliable = false;
        return report;
    }
    const int q = upper_quantile(std::move(used), config.reliability_quantile);
    const int rounded = (q + config.batch_size - 1) / config.batch_size * config.batch_size;
    report.budget = std::min(rounded, config.max_queries);
    report.reliable = true;
    return report;
}

}  // namespace sop

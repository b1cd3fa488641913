#include <doctest.h>

#include <cmath>
#include <set>

#include "sop/errors.hpp"
#include "sop/expert.hpp"
#include "sop/gp.hpp"
#include "sop/worldgen.hpp"

using namespace sop;

namespace {

// E[max(Y - incumbent, 0)] for Y ~ N(mean, stddev^2) by the trapezoid rule.
double ei_quadrature(double mean, double stddev, double incumbent) {
    const int n = 200000;
    const double lo = mean - 12 * stddev, hi = mean + 12 * stddev;
    const double h = (hi - lo) / n;
    double sum = 0;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + i * h;
        const double z = (y - mean) / stddev;
        const double f = std::max(y - incumbent, 0.0) * std::exp(-0.5 * z * z) /
                         (stddev * std::sqrt(2 * 3.14159265358979323846));
        sum += (i == 0 || i == n) ? 0.5 * f : f;
    }
    return sum * h;
}

}  // namespace

TEST_CASE("expected improvement") {
    CHECK(expected_improvement(0.0, 1.0, 0.0) == doctest::Approx(0.3989422804).epsilon(1e-9));
    CHECK(expected_improvement(3.0, 0.0, 1.0) == 2.0);
    CHECK(expected_improvement(1.0, 0.0, 3.0) == 0.0);
    for (auto [m, s, inc] : {std::tuple{1.0, 2.0, 0.5}, {-3.0, 0.5, 0.0}, {10.0, 4.0, 12.0}}) {
        CHECK(expected_improvement(m, s, inc) == doctest::Approx(ei_quadrature(m, s, inc)).epsilon(1e-6));
    }
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-8));
}

TEST_CASE("median lengthscales") {
    Eigen::MatrixXd x(3, 2);
    x << 0, 5, 1, 5, 4, 5;
    const auto ls = median_lengthscales(x);
    // |0-1|, |0-4|, |1-4| -> median 3; the constant axis falls back to a small width.
    CHECK(ls(0) == doctest::Approx(3.0));
    CHECK(ls(1) > 0.0);
    CHECK(ls(1) < 1e-2);
}

TEST_CASE("gaussian process interpolates") {
    Eigen::MatrixXd x(5, 2);
    x << 0, 0, 1, 0, 0, 1, 1, 1, 0.5, 0.5;
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 10;
    const GaussianProcess gp(x, y, Eigen::Vector2d(0.5, 0.5), 1e-10);
    const auto pred = gp.predict(x);
    for (int i = 0; i < 5; ++i) {
        CHECK(pred.mean(i) == doctest::Approx(y(i)).epsilon(1e-4));
        CHECK(pred.stddev(i) < 1e-3);
    }
    Eigen::MatrixXd far(1, 2);
    far << 50, 50;
    const auto p = gp.predict(far);
    CHECK(p.mean(0) == doctest::Approx(y.mean()).epsilon(1e-6));
    CHECK(p.stddev(0) > 1.0);
    CHECK(std::isfinite(gp.log_marginal_likelihood()));

    const auto serial = gp.predict(x, ExecPolicy::Serial);
    const auto parallel = gp.predict(x, ExecPolicy::Parallel);
    CHECK(serial.mean.isApprox(parallel.mean));
    CHECK(serial.stddev.isApprox(parallel.stddev));
}

TEST_CASE("latin hypercube stratifies every axis") {
    Philox rng(3);
    const auto bounds = default_bounds(3);
    const auto pts = latin_hypercube(bounds, 16, rng);
    REQUIRE(pts.size() == 16);
    for (int d = 0; d < 2; ++d) {
        std::set<int> cells;
        for (const auto& p : pts) {
            CHECK(bounds[d].contains(p[d]));
            cells.insert(static_cast<int>((p[d] - bounds[d].lo) / (bounds[d].width() / 16)));
        }
        CHECK(cells.size() == 16);
    }
}

TEST_CASE("upper quantile") {
    std::vector<int> v(20);
    for (int i = 0; i < 20; ++i) v[i] = 20 - i;
    // ceil(19 * 0.95) = 19, the largest element.
    CHECK(upper_quantile(v, 0.95) == 20);
    CHECK(upper_quantile(v, 0.5) == 11);
    CHECK(upper_quantile({7}, 0.95) == 7);
    std::vector<int> w(21);
    for (int i = 0; i < 21; ++i) w[i] = i + 1;
    CHECK(upper_quantile(w, 0.95) == 20);
    CHECK_THROWS(upper_quantile({}, 0.5));
}

TEST_CASE("expert config validation") {
    ExpertConfig c;
    CHECK_NOTHROW(c.validate(3));
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(3), ConfigError);
    c = {};
    c.max_queries = 402;
    try {
        c.validate(3);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "expert.max_queries");
    }
    c = {};
    c.initial_samples = 2;
    CHECK_THROWS_AS(c.validate(3), ConfigError);
}

TEST_CASE("expert solves an easy world deterministically") {
    const auto g = generate_world(ComplexityLevel::L0, 21);
    ExpertConfig c;
    c.policy = ExecPolicy::Serial;
    const auto a = expert_solve(g.world, g.analysis, c, 5);
    const auto b = expert_solve(g.world, g.analysis, c, 5);
    REQUIRE(a.queries_used_to_success.has_value());
    CHECK(*a.queries_used_to_success == b.queries_used_to_success);
    CHECK(a.query_log.size() == b.query_log.size());
    CHECK(*a.queries_used_to_success == static_cast<int>(a.query_log.size()));
    CHECK(*a.queries_used_to_success <= c.max_queries);
    double best = 0;
    for (const auto& q : a.query_log) best = std::max(best, q.value.value_or(0.0));
    CHECK(best >= 0.95 * g.analysis.global_max * (1 - 1e-9));
}

TEST_CASE("budget estimation") {
    const auto g = generate_world(ComplexityLevel::L0, 21);
    ExpertConfig c;
    c.repeats = 5;
    const auto rep = estimate_budget(g.world, g.analysis, c, 9);
    REQUIRE(rep.per_run.size() == 5);
    CHECK(rep.reliable);
    CHECK(rep.budget % c.batch_size == 0);
    int worst = 0;
    for (const auto& r : rep.per_run) worst = std::max(worst, *r.queries_used_to_success);
    CHECK(rep.budget >= worst);
    CHECK(rep.budget < worst + c.batch_size);

    SUBCASE("a capped expert that fails yields an unreliable budget") {
        const auto hard = generate_world(ComplexityLevel::L2, 4);
        ExpertConfig tiny;
        tiny.max_queries = 16;
        tiny.repeats = 3;
        const auto r = estimate_budget(hard.world, hard.analysis, tiny, 1);
        CHECK_FALSE(r.reliable);
        CHECK(r.budget == 16);
    }
}

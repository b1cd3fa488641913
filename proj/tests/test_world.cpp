#include <doctest.h>

#include <cmath>

#include "sop/errors.hpp"
#include "sop/kernels.hpp"
#include "sop/rng.hpp"
#include "sop/worldgen.hpp"

using namespace sop;

namespace {

WorldSpec hand_world(std::vector<Peak> peaks) {
    WorldSpec w;
    w.dimension = 3;
    w.bounds = default_bounds(3);
    w.level = ComplexityLevel::L1;
    w.peaks = std::move(peaks);
    return w;
}

}  // namespace

TEST_CASE("evaluate_world closed forms") {
    const auto w = hand_world({{{0, 0}, 100.0, {10, 10}}});
    CHECK(evaluate_world(w, Point{0, 0}) == doctest::Approx(100.0));
    // 100 * e^(-1/2), also written out as a literal.
    CHECK(evaluate_world(w, Point{10, 0}) == doctest::Approx(100.0 * std::exp(-0.5)));
    CHECK(evaluate_world(w, Point{10, 0}) == doctest::Approx(60.6531).epsilon(1e-6));
    CHECK_THROWS_AS(evaluate_world(w, Point{1, 2, 3}), DimensionMismatch);

    const auto pair = hand_world({{{-30, 0}, 50.0, {20, 20}}, {{30, 0}, 50.0, {20, 20}}});
    const auto single = hand_world({{{-30, 0}, 50.0, {20, 20}}});
    CHECK(evaluate_world(pair, Point{0, 0}) == doctest::Approx(2 * evaluate_world(single, Point{0, 0})));
}

TEST_CASE("analyze_world on hand-built worlds") {
    SUBCASE("single peak") {
        const auto w = hand_world({{{123.4, -321.0}, 700.0, {80, 120}}});
        const auto a = analyze_world(w);
        REQUIRE(a.local_maxima.size() == 1);
        CHECK(a.global_max == doctest::Approx(700.0).epsilon(1e-6));
        CHECK(a.global_argmax[0] == doctest::Approx(123.4).epsilon(1e-6));
        CHECK(a.global_argmax[1] == doctest::Approx(-321.0).epsilon(1e-6));
        CHECK(a.separation_ratio == 0.0);
    }
    SUBCASE("two separated peaks") {
        const auto w = hand_world({{{-500, 0}, 100.0, {50, 50}}, {{500, 0}, 60.0, {50, 50}}});
        const auto a = analyze_world(w);
        REQUIRE(a.local_maxima.size() == 2);
        CHECK(a.separation_ratio == doctest::Approx(0.6).epsilon(1e-9));
        CHECK(a.local_maxima[0].value >= a.local_maxima[1].value);
    }
}

TEST_CASE("validate_world rules") {
    const auto l0 = generate_world(ComplexityLevel::L0, 7);
    CHECK(l0.world.peaks.size() == 1);
    CHECK(validate_world(l0.world, l0.analysis));

    auto l1 = generate_world(ComplexityLevel::L1, 42);
    CHECK(validate_world(l1.world, l1.analysis));
    WorldAnalysis shaky = l1.analysis;
    shaky.separation_ratio = 0.97;
    CHECK_FALSE(validate_world(l1.world, shaky));

    auto l2 = generate_world(ComplexityLevel::L2, 3);
    WorldAnalysis sparse = l2.analysis;
    sparse.local_maxima.resize(7);
    CHECK_FALSE(validate_world(l2.world, sparse));

    WorldAnalysis edge = l0.analysis;
    edge.global_argmax[0] = l0.world.bounds[0].hi - 0.01 * l0.world.bounds[0].width();
    CHECK_FALSE(validate_world(l0.world, edge));
}

TEST_CASE("generation is deterministic and follows the level census") {
    CHECK(generate_world(ComplexityLevel::L0, 7).world == generate_world(ComplexityLevel::L0, 7).world);
    CHECK(generate_world(ComplexityLevel::L2, 9).world == generate_world(ComplexityLevel::L2, 9).world);
    CHECK_FALSE(generate_world(ComplexityLevel::L1, 1).world == generate_world(ComplexityLevel::L1, 2).world);

    const auto l1 = generate_world(ComplexityLevel::L1, 42);
    CHECK(l1.analysis.local_maxima.size() >= 2);
    CHECK(l1.analysis.local_maxima.size() <= 8);
}

TEST_CASE("generation preconditions") {
    CHECK_THROWS_AS(generate_world(ComplexityLevel::L0, 1, 2), ConfigError);
    CHECK_THROWS_AS(generate_world(ComplexityLevel::L0, 1, 3, {{0, 0}, {0, 1}}), ConfigError);
    GenerationOptions none;
    none.retry_cap = 0;
    CHECK_THROWS_AS(generate_world(ComplexityLevel::L1, 1, 3, {}, none), GenerationExhausted);
}

TEST_CASE("higher-dimensional worlds") {
    GenerationOptions opts;
    opts.resolution = 101;
    const auto g = generate_world(ComplexityLevel::L1, 5, 4, {}, opts);
    CHECK(g.world.inputs() == 3);
    CHECK(g.analysis.global_argmax.size() == 3);
    CHECK(validate_world(g.world, g.analysis));
}

TEST_CASE("boundedness and oracle soundness") {
    for (auto level : {ComplexityLevel::L0, ComplexityLevel::L1, ComplexityLevel::L2}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto g = generate_world(level, seed);
            Philox r(seed + 100);
            double probe_max = 0;
            for (int i = 0; i < 10000; ++i) {
                const Point p{r.uniform(-1000, 1000), r.uniform(-1000, 1000)};
                const double f = evaluate_world(g.world, p);
                CHECK(f > 0.0);
                CHECK(f <= g.world.total_amplitude());
                probe_max = std::max(probe_max, f);
            }
            CHECK(g.analysis.global_max >= probe_max);
            for (std::size_t i = 1; i < g.analysis.local_maxima.size(); ++i)
                CHECK(g.analysis.local_maxima[i].value <= 0.90 * g.analysis.global_max);
        }
    }
}

TEST_CASE("serial and parallel kernels agree") {
    const auto g = generate_world(ComplexityLevel::L2, 11);
    const kernels::Grid grid(g.world.bounds, 151);
    const auto vs = kernels::grid_values(g.world, grid, ExecPolicy::Serial);
    const auto vp = kernels::grid_values(g.world, grid, ExecPolicy::Parallel);
    CHECK(vs == vp);
    CHECK(kernels::grid_local_maxima(vs, grid, ExecPolicy::Serial) ==
          kernels::grid_local_maxima(vs, grid, ExecPolicy::Parallel));
    CHECK(analyze_world(g.world, 201, ExecPolicy::Serial) == analyze_world(g.world, 201, ExecPolicy::Parallel));
}

TEST_CASE("grid geometry") {
    const kernels::Grid grid(default_bounds(3), 5);
    CHECK(grid.size() == 25);
    CHECK(grid.cell(0) == doctest::Approx(500.0));
    CHECK(grid.node(0) == Point{-1000, -1000});
    CHECK(grid.node(1) == Point{-500, -1000});
    CHECK(grid.node(24) == Point{1000, 1000});
}

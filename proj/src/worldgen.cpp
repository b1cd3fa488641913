#include "sop/worldgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "sop/errors.hpp"
#include "sop/rng.hpp"

namespace sop {

std::string_view to_string(ComplexityLevel level) {
    switch (level) {
        case ComplexityLevel::L0: return "L0";
        case ComplexityLevel::L1: return "L1";
        case ComplexityLevel::L2: return "L2";
    }
    return "?";
}

ComplexityLevel parse_level(std::string_view text) {
    std::string up(text);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "L0") return ComplexityLevel::L0;
    if (up == "L1") return ComplexityLevel::L1;
    if (up == "L2") return ComplexityLevel::L2;
    throw ConfigError("level", "expected L0, L1 or L2, got '" + std::string(text) + "'");
}

const LevelProfile& level_profile(ComplexityLevel level) {
    static constexpr LevelProfile kL0{1, 1, 1, 1};
    static constexpr LevelProfile kL1{4, 8, 2, 8};
    // Narrower bumps keep L2 harder for the expert than L1 despite the
    // denser signal that many peaks provide.
    static constexpr LevelProfile kL2{12, 20, 9, 25, 0.30, 0.85, 0.03, 0.08};
    switch (level) {
        case ComplexityLevel::L0: return kL0;
        case ComplexityLevel::L1: return kL1;
        case ComplexityLevel::L2: return kL2;
    }
    return kL0;
}

bool WorldSpec::contains(std::span<const double> point) const noexcept {
    if (point.size() != bounds.size()) return false;
    for (std::size_t d = 0; d < point.size(); ++d)
        if (!std::isfinite(point[d]) || !bounds[d].contains(point[d])) return false;
    return true;
}

double WorldSpec::total_amplitude() const noexcept {
    double s = 0.0;
    for (const auto& p : peaks) s += p.amplitude;
    return s;
}

std::vector<Interval> default_bounds(int dimension) {
    return std::vector<Interval>(static_cast<std::size_t>(std::max(0, dimension - 1)),
                                 Interval{-1000.0, 1000.0});
}

double evaluate_unchecked(const WorldSpec& world, const double* point) noexcept {
    const auto axes = static_cast<std::size_t>(world.inputs());
    double total = 0.0;
    for (const auto& peak : world.peaks) {
        double exponent = 0.0;
        for (std::size_t d = 0; d < axes; ++d) {
            const double z = (point[d] - peak.center[d]) / peak.scales[d];
            exponent += z * z;
        }
        total += peak.amplitude * std::exp(-0.5 * exponent);
    }
    return total;
}

double evaluate_world(const WorldSpec& world, std::span<const double> point) {
    if (static_cast<int>(point.size()) != world.inputs())
        throw DimensionMismatch("expected " + std::to_string(world.inputs()) +
                                " coordinates, got " + std::to_string(point.size()));
    return evaluate_unchecked(world, point.data());
}

Point hill_climb(const WorldSpec& world, Point x, std::span<const double> initial_step,
                 double min_step) {
    const auto axes = x.size();
    double best = evaluate_unchecked(world, x.data());
    double scale = 1.0;
    double max_step = *std::max_element(initial_step.begin(), initial_step.end());
    Point trial(axes);

    auto try_move = [&](const Point& direction) {
        for (std::size_t d = 0; d < axes; ++d)
            trial[d] = std::clamp(x[d] + direction[d] * scale * initial_step[d],
                                  world.bounds[d].lo, world.bounds[d].hi);
        const double v = evaluate_unchecked(world, trial.data());
        if (v > best) {
            best = v;
            x = trial;
            return true;
        }
        return false;
    };

    Point dir(axes, 0.0);
    while (scale * max_step >= min_step) {
        bool moved = false;
        for (std::size_t d = 0; d < axes; ++d) {
            for (double sign : {1.0, -1.0}) {
                std::fill(dir.begin(), dir.end(), 0.0);
                dir[d] = sign;
                while (try_move(dir)) moved = true;
            }
        }
        if (!moved) {
            // Diagonal directions over {-1,0,1}^axes with at least two non-zeros.
            std::vector<int> odo(axes, -1);
            while (true) {
                int nonzero = 0;
                for (std::size_t d = 0; d < axes; ++d) {
                    dir[d] = odo[d];
                    nonzero += odo[d] != 0;
                }
                if (nonzero >= 2 && try_move(dir)) {
                    moved = true;
                    break;
                }
                std::size_t d = 0;
                while (d < axes && odo[d] == 1) odo[d++] = -1;
                if (d == axes) break;
                ++odo[d];
            }
        }
        if (!moved) scale *= 0.5;
    }
    return x;
}

WorldAnalysis analyze_world(const WorldSpec& world, int resolution, ExecPolicy policy) {
    const kernels::Grid grid(world.bounds, resolution);
    const auto values = kernels::grid_values(world, grid, policy);
    const auto grid_max = kernels::grid_local_maxima(values, grid, policy);

    std::vector<Point> starts;
    starts.reserve(grid_max.size() + world.peaks.size());
    for (auto flat : grid_max) starts.push_back(grid.node(flat));
    for (const auto& peak : world.peaks) starts.push_back(peak.center);

    std::vector<double> step(static_cast<std::size_t>(grid.axes()));
    for (int d = 0; d < grid.axes(); ++d) step[d] = grid.cell(d);

    std::vector<LocalMax> refined(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
    if (policy == ExecPolicy::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            refined[i].point = hill_climb(world, starts[i], step);
            refined[i].value = evaluate_unchecked(world, refined[i].point.data());
        }
    } else {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            refined[i].point = hill_climb(world, starts[i], step);
            refined[i].value = evaluate_unchecked(world, refined[i].point.data());
        }
    }

    std::stable_sort(refined.begin(), refined.end(),
                     [](const LocalMax& a, const LocalMax& b) { return a.value > b.value; });
    WorldAnalysis out;
    out.grid_resolution = resolution;
    for (auto& candidate : refined) {
        const bool duplicate = std::any_of(
            out.local_maxima.begin(), out.local_maxima.end(), [&](const LocalMax& kept) {
                for (int d = 0; d < grid.axes(); ++d)
                    if (std::abs(kept.point[d] - candidate.point[d]) > grid.cell(d)) return false;
                return true;
            });
        if (!duplicate) out.local_maxima.push_back(std::move(candidate));
    }
    if (!out.local_maxima.empty()) {
        out.global_argmax = out.local_maxima.front().point;
        out.global_max = out.local_maxima.front().value;
        if (out.local_maxima.size() > 1 && out.global_max > 0.0)
            out.separation_ratio = out.local_maxima[1].value / out.global_max;
    }
    return out;
}

bool validate_world(const WorldSpec& world, const WorldAnalysis& analysis) {
    const auto& profile = level_profile(world.level);
    const auto count = static_cast<int>(analysis.local_maxima.size());
    if (count < profile.min_maxima || count > profile.max_maxima) return false;
    if (analysis.separation_ratio > kMaxSeparationRatio) return false;
    if (analysis.global_argmax.size() != world.bounds.size()) return false;
    for (std::size_t d = 0; d < world.bounds.size(); ++d) {
        const auto& b = world.bounds[d];
        const double x = analysis.global_argmax[d];
        if (!(x > b.lo && x < b.hi)) return false;
        const double margin = kBoundaryMarginFraction * b.width();
        if (x - b.lo < margin || b.hi - x < margin) return false;
    }
    return true;
}

namespace {

WorldSpec draw_candidate(ComplexityLevel level, std::uint64_t seed, int dimension,
                         const std::vector<Interval>& bounds, int attempt) {
    Philox rng = Philox(seed).substream(static_cast<std::uint64_t>(attempt));
    const auto& profile = level_profile(level);
    const auto count = static_cast<int>(rng.integer(profile.min_peaks, profile.max_peaks));

    WorldSpec w;
    w.dimension = dimension;
    w.bounds = bounds;
    w.level = level;
    w.seed = seed;
    w.generation_attempt = attempt;

    const double global_amp = rng.uniform(600.0, 1000.0);
    for (int i = 0; i < count; ++i) {
        Peak p;
        p.amplitude = i == 0 ? global_amp : global_amp * rng.uniform(profile.rival_lo, profile.rival_hi);
        for (const auto& b : bounds) {
            const double margin = kBoundaryMarginFraction * b.width();
            p.center.push_back(rng.uniform(b.lo + margin, b.hi - margin));
            p.scales.push_back(b.width() * rng.uniform(profile.scale_lo, profile.scale_hi));
        }
        w.peaks.push_back(std::move(p));
    }
    return w;
}

}  // namespace

GeneratedWorld generate_world(ComplexityLevel level, std::uint64_t seed, int dimension,
                              std::vector<Interval> bounds, const GenerationOptions& options) {
    if (dimension < 3) throw ConfigError("dimension", "must be >= 3");
    if (bounds.empty()) bounds = default_bounds(dimension);
    if (static_cast<int>(bounds.size()) != dimension - 1)
        throw ConfigError("bounds", "expected " + std::to_string(dimension - 1) + " intervals");
    for (const auto& b : bounds)
        if (!(b.hi > b.lo) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
            throw ConfigError("bounds", "degenerate interval");

    for (int attempt = 0; attempt < options.retry_cap; ++attempt) {
        WorldSpec w = draw_candidate(level, seed, dimension, bounds, attempt);
        WorldAnalysis a = analyze_world(w, options.resolution, options.policy);
        if (validate_world(w, a)) return {std::move(w), std::move(a)};
    }
    throw GenerationExhausted("no valid " + std::string(to_string(level)) + " world for seed " +
                              std::to_string(seed) + " within " +
                              std::to_string(options.retry_cap) + " attempts");
}

}  // namespace sop

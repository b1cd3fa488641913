#pragma once

#include <cstdint>
#include <vector>

#include "sop/kernels.hpp"
#include "sop/world.hpp"

namespace sop {

inline constexpr int kDefaultAnalysisResolution = 201;
inline constexpr double kMaxSeparationRatio = 0.90;
inline constexpr double kBoundaryMarginFraction = 0.05;

struct GenerationOptions {
    int retry_cap = 200;
    int resolution = kDefaultAnalysisResolution;
    ExecPolicy policy = ExecPolicy::Parallel;
};

/// A generated world together with the analysis that certified it.
struct GeneratedWorld {
    WorldSpec world;
    WorldAnalysis analysis;
};

/// Rejection-samples peak sets from substreams of `seed` until one passes
/// validate_world. Throws GenerationExhausted after `retry_cap` attempts.
GeneratedWorld generate_world(ComplexityLevel level, std::uint64_t seed, int dimension = 3,
                              std::vector<Interval> bounds = {},
                              const GenerationOptions& options = {});

/// Dense-grid census of local maxima. Grid maxima and peak centres are
/// refined by coordinate ascent; refined points within one grid cell merge.
WorldAnalysis analyze_world(const WorldSpec& world, int resolution = kDefaultAnalysisResolution,
                            ExecPolicy policy = ExecPolicy::Parallel);

bool validate_world(const WorldSpec& world, const WorldAnalysis& analysis);

/// Coordinate ascent from `start`, clamped to the domain. Starts with
/// `initial_step` per axis, halves when no axis move improves and stops once
/// every step is below `min_step`. Diagonal moves are tried before halving so
/// the result is not a saddle of the axis-aligned search.
Point hill_climb(const WorldSpec& world, Point start, std::span<const double> initial_step,
                 double min_step = 1e-6);

}  // namespace sop

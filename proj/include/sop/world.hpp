#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sop {

using Point = std::vector<double>;

enum class ComplexityLevel { L0, L1, L2 };

std::string_view to_string(ComplexityLevel level);
/// Accepts "L0".."L2" (case-insensitive); throws ConfigError otherwise.
ComplexityLevel parse_level(std::string_view text);

/// Generator calibration for one complexity level.
struct LevelProfile {
    int min_peaks;
    int max_peaks;
    int min_maxima;  ///< accepted local-maximum census, global included
    int max_maxima;
    double rival_lo = 0.30;  ///< non-global amplitudes, as a fraction of the global one
    double rival_hi = 0.85;
    double scale_lo = 0.03;  ///< per-axis widths, as a fraction of the domain width
    double scale_hi = 0.12;
};

const LevelProfile& level_profile(ComplexityLevel level);

struct Interval {
    double lo = -1000.0;
    double hi = 1000.0;

    double width() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    bool operator==(const Interval&) const = default;
};

/// Axis-aligned anisotropic Gaussian bump.
struct Peak {
    Point center;
    double amplitude = 0.0;
    std::vector<double> scales;

    bool operator==(const Peak&) const = default;
};

/// A seeded landscape f over the box `bounds`. `dimension` counts the output
/// axis too, so f takes dimension - 1 inputs.
struct WorldSpec {
    int dimension = 3;
    std::vector<Interval> bounds;
    ComplexityLevel level = ComplexityLevel::L0;
    std::uint64_t seed = 0;
    std::vector<Peak> peaks;
    int generation_attempt = 0;  ///< rejection-sampling substream that was accepted

    int inputs() const noexcept { return dimension - 1; }
    bool contains(std::span<const double> point) const noexcept;
    double total_amplitude() const noexcept;
    bool operator==(const WorldSpec&) const = default;
};

struct LocalMax {
    Point point;
    double value = 0.0;

    bool operator==(const LocalMax&) const = default;
};

/// Certified extrema structure of a world; local_maxima is sorted by value,
/// highest first, so local_maxima.front() is the global maximum.
struct WorldAnalysis {
    Point global_argmax;
    double global_max = 0.0;
    std::vector<LocalMax> local_maxima;
    double separation_ratio = 0.0;
    int grid_resolution = 0;

    bool operator==(const WorldAnalysis&) const = default;
};

std::vector<Interval> default_bounds(int dimension);

/// f(p) = sum_i a_i exp(-sum_d (p_d - c_id)^2 / (2 s_id^2)). Throws
/// DimensionMismatch when point.size() != world.inputs().
double evaluate_world(const WorldSpec& world, std::span<const double> point);

/// Same as evaluate_world without the size check.
double evaluate_unchecked(const WorldSpec& world, const double* point) noexcept;

}  // namespace sop

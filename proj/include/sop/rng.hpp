#pragma once

#include <array>
#include <cstdint>

namespace sop {

/// Philox4x32-10 counter-based generator.
///
/// The output is a pure function of (key, substream, counter), so streams are
/// reproducible across platforms and compilers. Distributions are implemented
/// here rather than through <random> adaptors, whose algorithms are
/// implementation-defined.
class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t substream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          substream_(substream) {}

    /// Independent stream sharing this generator's key.
    [[nodiscard]] Philox substream(std::uint64_t id) const noexcept {
        return Philox(key_, id);
    }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;
    /// Uniform integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) noexcept;
    /// Standard normal (Box-Muller, one value per call).
    double normal() noexcept;

    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next_u64(); }

private:
    Philox(std::array<std::uint32_t, 2> key, std::uint64_t substream) noexcept
        : key_(key), substream_(substream) {}

    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t substream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Deterministic child seed, e.g. the world seed of trial `index`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace sop

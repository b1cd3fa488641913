#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sop/world.hpp"

namespace sop {

/// Every data-parallel kernel has a serial reference path; tests compare the
/// two and the benchmark target times them.
enum class ExecPolicy { Serial, Parallel };

namespace kernels {

/// Regular grid with `resolution` nodes per axis, end points included.
/// Axis 0 varies fastest in the flat index.
class Grid {
public:
    Grid(std::vector<Interval> bounds, int resolution);

    int resolution() const noexcept { return resolution_; }
    int axes() const noexcept { return static_cast<int>(bounds_.size()); }
    std::size_t size() const noexcept { return size_; }
    double cell(int axis) const noexcept { return cells_[axis]; }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }

    void node(std::size_t flat, double* out) const noexcept;
    Point node(std::size_t flat) const;

private:
    std::vector<Interval> bounds_;
    std::vector<double> cells_;
    int resolution_;
    std::size_t size_;
};

std::vector<double> grid_values(const WorldSpec& world, const Grid& grid, ExecPolicy policy);

/// Flat indices of nodes that are >= every neighbour (diagonals included) and
/// strictly above at least one, in ascending order.
std::vector<std::size_t> grid_local_maxima(std::span<const double> values, const Grid& grid,
                                           ExecPolicy policy);

}  // namespace kernels
}  // namespace sop

#include "sop/kernels.hpp"

#include <stdexcept>

namespace sop::kernels {

Grid::Grid(std::vector<Interval> bounds, int resolution)
    : bounds_(std::move(bounds)), resolution_(resolution), size_(1) {
    if (resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
    for (const auto& b : bounds_) {
        cells_.push_back(b.width() / (resolution - 1));
        size_ *= static_cast<std::size_t>(resolution);
    }
}

void Grid::node(std::size_t flat, double* out) const noexcept {
    const auto res = static_cast<std::size_t>(resolution_);
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
        const auto i = flat % res;
        flat /= res;
        // Pin the last node to hi exactly.
        out[d] = (i + 1 == res) ? bounds_[d].hi : bounds_[d].lo + static_cast<double>(i) * cells_[d];
    }
}

Point Grid::node(std::size_t flat) const {
    Point p(bounds_.size());
    node(flat, p.data());
    return p;
}

namespace {

void values_range(const WorldSpec& world, const Grid& grid, std::size_t begin, std::size_t end,
                  double* out) {
    Point p(static_cast<std::size_t>(grid.axes()));
    for (std::size_t i = begin; i < end; ++i) {
        grid.node(i, p.data());
        out[i] = evaluate_unchecked(world, p.data());
    }
}

bool is_local_max(std::span<const double> values, const Grid& grid, std::size_t flat,
                  std::vector<int>& idx, std::vector<int>& offset) {
    const int axes = grid.axes();
    const int res = grid.resolution();
    std::size_t rest = flat;
    for (int d = 0; d < axes; ++d) {
        idx[d] = static_cast<int>(rest % static_cast<std::size_t>(res));
        rest /= static_cast<std::size_t>(res);
    }
    const double v = values[flat];
    bool strictly_above_one = false;
    std::fill(offset.begin(), offset.end(), -1);
    // Odometer over {-1,0,1}^axes.
    while (true) {
        bool zero = true;
        bool inside = true;
        std::size_t neighbour = 0;
        std::size_t stride = 1;
        for (int d = 0; d < axes; ++d) {
            const int j = idx[d] + offset[d];
            if (offset[d] != 0) zero = false;
            if (j < 0 || j >= res) inside = false;
            neighbour += static_cast<std::size_t>(j) * stride;
            stride *= static_cast<std::size_t>(res);
        }
        if (!zero && inside) {
            const double w = values[neighbour];
            if (w > v) return false;
            if (w < v) strictly_above_one = true;
        }
        int d = 0;
        while (d < axes && offset[d] == 1) offset[d++] = -1;
        if (d == axes) break;
        ++offset[d];
    }
    return strictly_above_one;
}

}  // namespace

std::vector<double> grid_values(const WorldSpec& world, const Grid& grid, ExecPolicy policy) {
    if (grid.axes() != world.inputs()) throw std::invalid_argument("grid/world dimension mismatch");
    std::vector<double> out(grid.size());
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
    if (policy == ExecPolicy::Serial) {
        values_range(world, grid, 0, grid.size(), out.data());
        return out;
    }
    constexpr std::ptrdiff_t kChunk = 1024;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < n; c += kChunk) {
        const auto end = std::min(n, c + kChunk);
        values_range(world, grid, static_cast<std::size_t>(c), static_cast<std::size_t>(end),
                     out.data());
    }
    return out;
}

std::vector<std::size_t> grid_local_maxima(std::span<const double> values, const Grid& grid,
                                           ExecPolicy policy) {
    const auto axes = static_cast<std::size_t>(grid.axes());
    std::vector<char> flag(values.size(), 0);
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    if (policy == ExecPolicy::Serial) {
        std::vector<int> idx(axes), offset(axes);
        for (std::ptrdiff_t i = 0; i < n; ++i)
            flag[i] = is_local_max(values, grid, static_cast<std::size_t>(i), idx, offset);
    } else {
#pragma omp parallel
        {
            std::vector<int> idx(axes), offset(axes);
#pragma omp for schedule(static)
            for (std::ptrdiff_t i = 0; i < n; ++i)
                flag[i] = is_local_max(values, grid, static_cast<std::size_t>(i), idx, offset);
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < flag.size(); ++i)
        if (flag[i]) out.push_back(i);
    return out;
}

}  // namespace sop::kernels

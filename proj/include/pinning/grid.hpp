#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pinning/errors.hpp"

namespace pinning {

/// Periodic lateral grid on the unit torus T^n, n in {1, 2}. Node k has
/// coordinates (i h, j h) with k = i + m j.
class TorusGrid {
public:
    TorusGrid(int dimension, int points_per_axis) : n_(dimension), m_(points_per_axis) {
        if (n_ != 1 && n_ != 2) {
            throw ConfigError("grid: dimension must be 1 or 2");
        }
        if (m_ < 8) {
            throw ConfigError("grid: points_per_axis must be at least 8");
        }
    }

    int dimension() const { return n_; }
    int points_per_axis() const { return m_; }
    double spacing() const { return 1.0 / m_; }
    std::size_t size() const {
        return n_ == 1 ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_) * m_;
    }

    /// Largest stable explicit step, h^2 / (2n).
    double cfl_limit() const { return spacing() * spacing() / (2.0 * n_); }

    std::array<double, 2> coordinates(std::size_t k) const {
        const auto m = static_cast<std::size_t>(m_);
        return {static_cast<double>(k % m) * spacing(), static_cast<double>(k / m) * spacing()};
    }

    bool operator==(const TorusGrid&) const = default;

private:
    int n_;
    int m_;
};

/// Interface height field and the time it belongs to.
struct State {
    TorusGrid grid;
    std::vector<double> u;
    double t = 0.0;

    static State flat(const TorusGrid& grid, double height = 0.0) {
        return State{grid, std::vector<double>(grid.size(), height), 0.0};
    }
};

}  // namespace pinning

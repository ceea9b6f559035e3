#pragma once

#include <span>
#include <variant>
#include <vector>

#include "pinning/grid.hpp"

namespace pinning {

/// Driving force f(x, t) = s(t) + offset(x): a scalar time profile plus an
/// optional time-independent lateral field (empty means zero).
struct ForcingSpec {
    struct Constant {
        double value = 0.0;
        bool operator==(const Constant&) const = default;
    };
    /// Triangular wave 0 -> A -> -A -> A ... with period P (f(P/4) = A).
    struct Cycle {
        double amplitude = 0.0;
        double period = 1.0;
        bool operator==(const Cycle&) const = default;
    };
    /// Piecewise linear through (times[i], values[i]), held constant outside.
    struct Tabulated {
        std::vector<double> times;
        std::vector<double> values;
        bool operator==(const Tabulated&) const = default;
    };

    std::variant<Constant, Cycle, Tabulated> profile = Constant{};
    std::vector<double> lateral;

    static ForcingSpec constant(double value) { return ForcingSpec{Constant{value}, {}}; }
    static ForcingSpec cycle(double amplitude, double period) {
        return ForcingSpec{Cycle{amplitude, period}, {}};
    }
    static ForcingSpec tabulated(std::vector<double> times, std::vector<double> values) {
        return ForcingSpec{Tabulated{std::move(times), std::move(values)}, {}};
    }

    /// Throws ConfigError; `grid_size` checks the lateral field length when
    /// non-zero.
    void validate(std::size_t grid_size = 0) const;

    double scalar(double t) const;
    void evaluate(const TorusGrid& grid, double t, std::span<double> out) const;
    std::vector<double> evaluate(const TorusGrid& grid, double t) const;

    bool time_constant() const { return std::holds_alternative<Constant>(profile); }

    /// sup_{x, 0 <= s <= t} |f(x, s)|.
    double sup_norm(double t) const;

    /// Pointwise extrema of the lateral offset (0 when absent).
    double lateral_min() const;
    double lateral_max() const;

    bool operator==(const ForcingSpec&) const = default;
};

}  // namespace pinning

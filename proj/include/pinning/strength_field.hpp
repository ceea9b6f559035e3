#pragma once

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "pinning/grid.hpp"

namespace pinning {

/// A strength field tied to one grid, for repeated evaluation in a time loop.
/// May keep search hints between calls, so one instance per thread.
class BoundStrength {
public:
    virtual ~BoundStrength() = default;
    virtual void evaluate(std::span<const double> heights, std::span<double> out) = 0;
};

/// Source of the friction weight phi(x, u) at grid nodes.
class StrengthField {
public:
    virtual ~StrengthField() = default;

    /// Evaluator with per-grid precomputation. Results equal evaluate()
    /// bit for bit; the default simply forwards to it.
    virtual std::unique_ptr<BoundStrength> bind(const TorusGrid& grid) const;

    /// out[k] = phi(x_k, heights[k]).
    virtual void evaluate(const TorusGrid& grid, std::span<const double> heights,
                          std::span<double> out) const = 0;

    /// An upper bound on phi that is attained somewhere (||phi||_inf).
    virtual double sup_strength() const = 0;

    /// |u| beyond which phi vanishes identically; infinite when phi has no
    /// vertical extent.
    virtual double escape_height() const { return std::numeric_limits<double>::infinity(); }

    /// True when phi vanishes for every height in [lo, hi] at every lateral point.
    virtual bool band_is_clear(double /*lo*/, double /*hi*/) const { return false; }
};

/// Height-independent weight phi(x), tabulated per grid node.
class LateralStrength final : public StrengthField {
public:
    explicit LateralStrength(std::vector<double> values);

    void evaluate(const TorusGrid& grid, std::span<const double> heights,
                  std::span<double> out) const override;
    double sup_strength() const override { return sup_; }

    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
    double sup_ = 0.0;
};

}  // namespace pinning

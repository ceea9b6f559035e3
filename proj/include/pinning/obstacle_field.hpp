#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "pinning/strength_field.hpp"

namespace pinning {

/// Parameters of the Poisson obstacle model. Defaults are the reference field
/// used throughout the tests.
struct ObstacleSpec {
    double intensity = 50.0;            ///< expected centers per unit (n+1)-volume
    double radius = 0.1;                ///< ball radius
    double mollification_width = 0.04;  ///< smoothing half-width
    double slab_half_height = 1.0;      ///< centers live in |h| <= Y
    int dimension = 1;                  ///< lateral dimension n
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the violated invariant.
    void validate() const;

    double support_radius() const { return radius + mollification_width; }

    bool operator==(const ObstacleSpec&) const = default;
};

/// Obstacle center: lateral coordinates in [0,1)^n followed by the height.
/// Only the first n+1 entries are meaningful.
using Center = std::array<double, 3>;

/// Cubic smoothstep 3t^2 - 2t^3 with t clamped to [0, 1].
double smoothstep(double t);

/// A sampled obstacle field phi = ramp(distance to nearest center). Immutable
/// after construction and safe to share across threads.
class ObstacleField final : public StrengthField {
public:
    /// Adopts explicit centers (lateral coordinates are wrapped into [0,1)).
    /// Throws ConfigError when the ObstacleSpec is invalid or a center leaves the slab.
    ObstacleField(const ObstacleSpec& spec, std::vector<Center> centers);

    const ObstacleSpec& spec() const { return spec_; }
    std::span<const Center> centers() const { return centers_; }

    /// phi at lateral point x (size n) and height h, in [0, 1].
    double phi(std::span<const double> x, double h) const;

    /// Exact distance to the nearest center (periodic in x); +inf when empty.
    double nearest_center_distance(std::span<const double> x, double h) const;

    /// Nearest distance if it is <= cutoff, +inf otherwise.
    double nearest_center_distance_within(std::span<const double> x, double h, double cutoff) const;

    /// Indices of centers at distance <= radius, ascending.
    std::vector<std::size_t> centers_within(std::span<const double> x, double h, double radius) const;

    void evaluate(const TorusGrid& grid, std::span<const double> heights,
                  std::span<double> out) const override;
    /// Per-node columns of centers within lateral reach, sorted by height.
    std::unique_ptr<BoundStrength> bind(const TorusGrid& grid) const override;
    double sup_strength() const override { return centers_.empty() ? 0.0 : 1.0; }
    double escape_height() const override;
    bool band_is_clear(double lo, double hi) const override;

private:
    std::size_t cell_of_axis(int axis, double coordinate) const;
    template <typename Visit>
    void ring_search(std::span<const double> x, double h, double stop_radius, Visit&& visit) const;
    double squared_distance(const Center& c, const double* x, double h) const;
    /// Smallest squared distance among centers in the 3^(n+1) block of cells
    /// around the query; exact whenever the true distance is within reach.
    double neighborhood_min_sq(const double* x, double h) const;

    ObstacleSpec spec_;
    std::vector<Center> centers_;
    std::vector<double> sorted_heights_;

    // Uniform bucketing, periodic in the lateral axes. Axis n is vertical.
    std::array<std::size_t, 3> cell_count_{};
    std::array<double, 3> cell_edge_{};
    double min_edge_ = 0.0;
    std::vector<std::size_t> cell_start_;
    std::vector<std::size_t> cell_items_;
};

/// Draws a Poisson number of centers (mean intensity * 2Y) uniformly in the
/// slab [0,1)^n x [-Y, Y) from ObstacleSpec::seed.
ObstacleField sample_field(const ObstacleSpec& spec);

struct FieldStats {
    double sup_phi = 0.0;
    double mean_phi = 0.0;
};

/// Sup and mean of phi over a regular sampling of the slab with `resolution`
/// samples per unit length per axis. Center locations are probed as well,
/// since phi peaks there.
FieldStats field_stats(const ObstacleField& field, int resolution);

nlohmann::json to_json(const ObstacleField& field);
ObstacleField field_from_json(const nlohmann::json& document);

}  // namespace pinning

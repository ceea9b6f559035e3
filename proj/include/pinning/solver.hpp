#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pinning/forcing.hpp"
#include "pinning/grid.hpp"
#include "pinning/strength_field.hpp"

namespace pinning {

enum class Backend { prox, regularized };

std::string_view to_string(Backend backend);

struct SolverConfig {
    Backend backend = Backend::prox;
    double epsilon = 1e-2;  ///< regularization width (regularized backend only)
    double cfl_factor = 0.9;
    double tol_pin = 1e-8;
    std::optional<double> dwell;          ///< stationarity window, default 50 dt
    std::optional<double> escape_margin;  ///< default 2h
    double t_max = 50.0;
    std::size_t output_stride = 100;
    /// Classify as escaped as soon as the band between the interface and the
    /// escape height holds no obstacle support and a time-constant force
    /// pushes towards it. Off by default so escape times stay ballistic.
    bool clear_path_exit = false;

    /// Throws ConfigError (CFL factor outside (0, 1], non-positive epsilon, ...).
    void validate() const;

    /// dt = cfl_factor * h^2 / (2n)
    double time_step(const TorusGrid& grid) const;
    double dwell_window(const TorusGrid& grid) const;
    double margin(const TorusGrid& grid) const;

    bool operator==(const SolverConfig&) const = default;
};

/// Periodic 2n+1 point Laplacian.
void laplacian(const TorusGrid& grid, std::span<const double> u, std::span<double> out);
std::vector<double> laplacian(const TorusGrid& grid, std::span<const double> u);

/// The unique a with a + strength * s = drive for some s in d|a|, i.e. the
/// soft threshold sign(drive) * max(|drive| - strength, 0).
double friction_velocity(double drive, double strength);

/// xi_eps(a) = a / sqrt(a^2 + eps^2)
double regularized_sign(double a, double epsilon);

/// The root of a + strength * xi_eps(a) = drive, to absolute accuracy 1e-12.
double regularized_velocity(double drive, double strength, double epsilon);

struct Residual {
    std::vector<double> r;       ///< laplacian(u) + f
    std::vector<double> excess;  ///< max(|r| - phi, 0)
};

Residual residual(const State& state, const StrengthField& field, const ForcingSpec& forcing);

/// Explicit Euler in the Laplacian with a pointwise resolution of the friction
/// inclusion; phi is frozen at the pre-step height.
class Stepper {
public:
    Stepper(const TorusGrid& grid, const StrengthField& field, const ForcingSpec& forcing,
            const SolverConfig& config);

    double dt() const { return dt_; }
    std::size_t steps_taken() const { return steps_; }

    /// Fills drive, strength and velocity for `state` without advancing it.
    /// Throws NumericalError on a non-finite state.
    void evaluate(const State& state);
    /// u += dt * velocity, t += dt. Uses the last evaluate().
    void advance(State& state);
    void step(State& state) {
        evaluate(state);
        advance(state);
    }

    std::span<const double> drive() const { return drive_; }
    std::span<const double> strength() const { return phi_; }
    std::span<const double> velocity() const { return velocity_; }
    std::span<const double> forcing_values() const { return forcing_; }
    /// max_i max(|drive_i| - phi_i, 0)
    double max_excess() const { return max_excess_; }

private:
    TorusGrid grid_;
    std::unique_ptr<BoundStrength> field_;
    const ForcingSpec& forcing_spec_;
    SolverConfig config_;
    double dt_;
    std::size_t steps_ = 0;
    double origin_ = 0.0;
    std::vector<double> forcing_;
    std::vector<double> drive_;
    std::vector<double> phi_;
    std::vector<double> velocity_;
    double max_excess_ = 0.0;
};

/// One step from `state` with a fresh Stepper.
State step(const State& state, const StrengthField& field, const ForcingSpec& forcing,
           const SolverConfig& config);

enum class Outcome { stationary, escaped, timeout };

std::string_view to_string(Outcome outcome);

struct TrajectoryRow {
    double t = 0.0;
    double mean_u = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double max_excess = 0.0;
    double energy = 0.0;
};

struct RunResult {
    State final_state;
    std::vector<TrajectoryRow> trajectory;
    Outcome outcome = Outcome::timeout;
    std::size_t steps = 0;
};

/// Called before every update with the pre-step state and the evaluated stepper.
using StepObserver = std::function<void(const State&, const Stepper&)>;

/// Steps until stationary (max excess <= tol_pin for the whole dwell window),
/// escaped (the interface clears the obstacle slab) or t >= t_max.
RunResult run_until(State initial, const StrengthField& field, const ForcingSpec& forcing,
                    const SolverConfig& config, const StepObserver& observer = {});

}  // namespace pinning

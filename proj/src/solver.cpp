#include "pinning/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinning/analysis.hpp"
#include "pinning/errors.hpp"

namespace pinning {

namespace {

constexpr double velocity_tolerance = 1e-12;
constexpr int max_root_iterations = 200;

TrajectoryRow summarize(const State& state, double max_excess, std::span<const double> forcing) {
    TrajectoryRow row;
    row.t = state.t;
    const auto [lo, hi] = std::minmax_element(state.u.begin(), state.u.end());
    row.min_u = *lo;
    row.max_u = *hi;
    double sum = 0.0;
    for (double v : state.u) {
        sum += v;
    }
    row.mean_u = sum / static_cast<double>(state.u.size());
    row.max_excess = max_excess;
    row.energy = energy(state, forcing).total;
    return row;
}

}  // namespace

std::string_view to_string(Backend backend) {
    return backend == Backend::prox ? "prox" : "regularized";
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::stationary:
            return "stationary";
        case Outcome::escaped:
            return "escaped";
        case Outcome::timeout:
            return "timeout";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (!(cfl_factor > 0.0 && cfl_factor <= 1.0)) {
        throw ConfigError("solver: cfl_factor must lie in (0, 1] (dt <= h^2/(2n))");
    }
    if (backend == Backend::regularized && !(epsilon > 0.0)) {
        throw ConfigError("solver: epsilon must be positive for the regularized backend");
    }
    if (!(tol_pin > 0.0)) {
        throw ConfigError("solver: tol_pin must be positive");
    }
    if (dwell && !(*dwell > 0.0)) {
        throw ConfigError("solver: dwell window must be positive");
    }
    if (escape_margin && !(*escape_margin >= 0.0)) {
        throw ConfigError("solver: escape_margin must be non-negative");
    }
    if (!(t_max > 0.0)) {
        throw ConfigError("solver: t_max must be positive");
    }
    if (output_stride == 0) {
        throw ConfigError("solver: output_stride must be positive");
    }
}

double SolverConfig::time_step(const TorusGrid& grid) const {
    return cfl_factor * grid.cfl_limit();
}

double SolverConfig::dwell_window(const TorusGrid& grid) const {
    return dwell ? *dwell : 50.0 * time_step(grid);
}

double SolverConfig::margin(const TorusGrid& grid) const {
    return escape_margin ? *escape_margin : 2.0 * grid.spacing();
}

void laplacian(const TorusGrid& grid, std::span<const double> u, std::span<double> out) {
    const std::size_t m = static_cast<std::size_t>(grid.points_per_axis());
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    if (grid.dimension() == 1) {
        for (std::size_t i = 0; i < m; ++i) {
            const double left = u[i == 0 ? m - 1 : i - 1];
            const double right = u[i + 1 == m ? 0 : i + 1];
            out[i] = (left + right - 2.0 * u[i]) * inv_h2;
        }
        return;
    }
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t down = (j == 0 ? m - 1 : j - 1) * m;
        const std::size_t up = (j + 1 == m ? 0 : j + 1) * m;
        const std::size_t row = j * m;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t left = i == 0 ? m - 1 : i - 1;
            const std::size_t right = i + 1 == m ? 0 : i + 1;
            out[row + i] = (u[row + left] + u[row + right] + u[down + i] + u[up + i] -
                            4.0 * u[row + i]) *
                           inv_h2;
        }
    }
}

std::vector<double> laplacian(const TorusGrid& grid, std::span<const double> u) {
    std::vector<double> out(u.size());
    laplacian(grid, u, out);
    return out;
}

double friction_velocity(double drive, double strength) {
    if (!(strength >= 0.0)) {
        throw ContractViolation("friction_velocity: strength must be non-negative");
    }
    const double magnitude = std::abs(drive) - strength;
    return magnitude > 0.0 ? std::copysign(magnitude, drive) : 0.0;
}

double regularized_sign(double a, double epsilon) {
    return a / std::sqrt(a * a + epsilon * epsilon);
}

double regularized_velocity(double drive, double strength, double epsilon) {
    if (!(strength >= 0.0)) {
        throw ContractViolation("regularized_velocity: strength must be non-negative");
    }
    if (!(epsilon > 0.0)) {
        throw ContractViolation("regularized_velocity: epsilon must be positive");
    }
    if (strength == 0.0 || drive == 0.0) {
        return drive;
    }
    // The residual is odd in (a, drive), so solve for |drive| and restore the sign.
    const double target = std::abs(drive);
    const double eps2 = epsilon * epsilon;
    double lo = 0.0;
    double hi = target;
    double a = std::max(target - strength, 0.5 * target);
    for (int it = 0; it < max_root_iterations; ++it) {
        const double root = std::sqrt(a * a + eps2);
        const double value = a + strength * a / root - target;
        if (value == 0.0) {
            return std::copysign(a, drive);
        }
        (value > 0.0 ? hi : lo) = a;
        const double slope = 1.0 + strength * eps2 / (root * root * root);
        double next = a - value / slope;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const bool done = std::abs(next - a) <= 0.1 * velocity_tolerance || hi - lo <= velocity_tolerance;
        a = next;
        if (done) {
            return std::copysign(a, drive);
        }
    }
    throw NumericalError("regularized_velocity: root iteration did not converge", 0);
}

Residual residual(const State& state, const StrengthField& field, const ForcingSpec& forcing) {
    const std::size_t size = state.u.size();
    Residual out{laplacian(state.grid, state.u), std::vector<double>(size)};
    std::vector<double> phi(size);
    field.evaluate(state.grid, state.u, phi);
    const std::vector<double> f = forcing.evaluate(state.grid, state.t);
    for (std::size_t i = 0; i < size; ++i) {
        out.r[i] += f[i];
        out.excess[i] = std::max(std::abs(out.r[i]) - phi[i], 0.0);
    }
    return out;
}

Stepper::Stepper(const TorusGrid& grid, const StrengthField& field, const ForcingSpec& forcing,
                 const SolverConfig& config)
    : grid_(grid),
      field_(field.bind(grid)),
      forcing_spec_(forcing),
      config_(config),
      dt_(config.time_step(grid)),
      forcing_(grid.size()),
      drive_(grid.size()),
      phi_(grid.size()),
      velocity_(grid.size()) {
    config_.validate();
    forcing_spec_.validate(grid.size());
}

void Stepper::evaluate(const State& state) {
    if (state.u.size() != grid_.size()) {
        throw ContractViolation("stepper: state size does not match the grid");
    }
    for (double v : state.u) {
        if (!std::isfinite(v)) {
            throw NumericalError("non-finite interface height", steps_);
        }
    }
    laplacian(grid_, state.u, drive_);
    forcing_spec_.evaluate(grid_, state.t, forcing_);
    field_->evaluate(state.u, phi_);
    max_excess_ = 0.0;
    const bool prox = config_.backend == Backend::prox;
    for (std::size_t i = 0; i < drive_.size(); ++i) {
        const double g = drive_[i] + forcing_[i];
        drive_[i] = g;
        max_excess_ = std::max(max_excess_, std::abs(g) - phi_[i]);
        velocity_[i] = prox ? friction_velocity(g, phi_[i])
                            : regularized_velocity(g, phi_[i], config_.epsilon);
    }
}

void Stepper::advance(State& state) {
    for (std::size_t i = 0; i < velocity_.size(); ++i) {
        state.u[i] += dt_ * velocity_[i];
    }
    if (steps_ == 0) {
        origin_ = state.t;
    }
    ++steps_;
    state.t = origin_ + static_cast<double>(steps_) * dt_;
}

State step(const State& state, const StrengthField& field, const ForcingSpec& forcing,
           const SolverConfig& config) {
    Stepper stepper(state.grid, field, forcing, config);
    State next = state;
    stepper.evaluate(next);
    for (std::size_t i = 0; i < next.u.size(); ++i) {
        next.u[i] += stepper.dt() * stepper.velocity()[i];
    }
    next.t = state.t + stepper.dt();
    return next;
}

RunResult run_until(State initial, const StrengthField& field, const ForcingSpec& forcing,
                    const SolverConfig& config, const StepObserver& observer) {
    config.validate();
    const TorusGrid grid = initial.grid;
    Stepper stepper(grid, field, forcing, config);
    const double dt = stepper.dt();
    const auto dwell_steps = static_cast<std::size_t>(
        std::max(1.0, std::ceil(config.dwell_window(grid) / dt - 1e-9)));
    const double escape = field.escape_height() - config.margin(grid);
    const auto max_steps = static_cast<std::size_t>(std::ceil(config.t_max / dt - 1e-9));

    double f_lo = std::numeric_limits<double>::quiet_NaN();
    double f_hi = f_lo;
    if (forcing.time_constant()) {
        const double base = forcing.scalar(0.0);
        f_lo = base + forcing.lateral_min();
        f_hi = base + forcing.lateral_max();
    }

    RunResult result{std::move(initial), {}, Outcome::timeout, 0};
    State& state = result.final_state;
    std::size_t quiet = 0;
    for (std::size_t k = 0;; ++k) {
        stepper.evaluate(state);
        const bool record = k % config.output_stride == 0;
        if (record) {
            result.trajectory.push_back(summarize(state, std::max(stepper.max_excess(), 0.0),
                                                  stepper.forcing_values()));
        }

        const auto [lo_it, hi_it] = std::minmax_element(state.u.begin(), state.u.end());
        const double min_u = *lo_it;
        const double max_u = *hi_it;
        bool done = false;
        if (min_u >= escape || max_u <= -escape) {
            result.outcome = Outcome::escaped;
            done = true;
        } else if (config.clear_path_exit &&
                   ((f_lo > 0.0 && field.band_is_clear(min_u, escape)) ||
                    (f_hi < 0.0 && field.band_is_clear(-escape, max_u)))) {
            result.outcome = Outcome::escaped;
            done = true;
        } else {
            quiet = stepper.max_excess() <= config.tol_pin ? quiet + 1 : 0;
            if (quiet >= dwell_steps) {
                result.outcome = Outcome::stationary;
                done = true;
            } else if (k >= max_steps) {
                result.outcome = Outcome::timeout;
                done = true;
            }
        }
        if (done) {
            if (!record) {
                result.trajectory.push_back(summarize(state, std::max(stepper.max_excess(), 0.0),
                                                      stepper.forcing_values()));
            }
            result.steps = k;
            return result;
        }
        if (observer) {
            observer(state, stepper);
        }
        stepper.advance(state);
    }
}

}  // namespace pinning

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinning/analysis.hpp"
#include "pinning/obstacle_field.hpp"
#include "pinning/solver.hpp"

namespace pinning {

// ---------------------------------------------------------------------------
// Pinning threshold

struct PinningOptions {
    double initial_upper = 1.0;  ///< first depinning guess F_init_hi
    int bisection_steps = 10;
    int max_doublings = 4;
    /// Probes use the clear-path escape shortcut (see SolverConfig).
    bool clear_path_exit = true;

    bool operator==(const PinningOptions&) const = default;
};

struct ProbeRecord {
    double force = 0.0;
    Outcome outcome = Outcome::timeout;
    double t_end = 0.0;
    std::size_t steps = 0;
    int attempts = 1;  ///< 2 when a timeout was retried with doubled t_max
};

struct PinningReport {
    std::uint64_t field_seed = 0;
    double f_lo = 0.0;  ///< largest probed force that pinned
    double f_hi = 0.0;  ///< smallest probed force that escaped
    int iterations = 0;
    int doublings = 0;
    bool resolved = false;
    State pinned_profile{TorusGrid(1, 8), {}, 0.0};
    Certificate supersolution;
    Certificate subsolution;
    std::vector<ProbeRecord> probes;

    double midpoint() const { return 0.5 * (f_lo + f_hi); }
    double width() const { return f_hi - f_lo; }
};

/// Runs one constant-force probe from the flat interface u = 0.
RunResult run_probe(const StrengthField& field, const TorusGrid& grid, const SolverConfig& config,
                    double force);

/// Bisection on a constant force. The upper end is doubled (at most
/// max_doublings times) until it depins; each probe is classified by
/// run_until. A probe that times out twice leaves the report unresolved.
PinningReport estimate_pinning_threshold(const ObstacleField& field, const TorusGrid& grid,
                                         const SolverConfig& config, const PinningOptions& options = {});

/// Violated report invariants, empty when the report is consistent.
std::vector<std::string> report_violations(const PinningReport& report);

nlohmann::json to_json(const PinningReport& report);
PinningReport pinning_report_from_json(const nlohmann::json& document);

// ---------------------------------------------------------------------------
// Hysteresis under quasistatic cyclic loading

struct HysteresisOptions {
    int cycles = 2;                   ///< full cycles after the initial quarter ramp
    double quasistatic_factor = 10.0;  ///< quarter period / relaxation time
    std::size_t samples_per_cycle = 800;
};

struct LoopSample {
    double t = 0.0;
    double f = 0.0;
    double mean_u = 0.0;
};

struct LoopRun {
    double period = 0.0;
    std::vector<LoopSample> samples;
    std::size_t last_cycle_begin = 0;  ///< index into samples
    double area = 0.0;                 ///< shoelace area of the last cycle, (f, mean u) plane
    double closure_gap = 0.0;          ///< |mean u(end) - mean u(start)| over the last cycle
    bool depinned = false;
};

struct HysteresisReport {
    double amplitude = 0.0;
    double period = 0.0;
    double pinned_force = 0.0;
    double relaxation_time = 0.0;
    LoopRun base;     ///< period P
    LoopRun doubled;  ///< period 2P
    double sup_distance = 0.0;  ///< loop_distance(base, doubled)
    bool depinned = false;
};

/// Triangular loading 0 -> A -> -A -> A ... at period P and 2P. Requires
/// 0 <= A <= pinned_force with pinned_force > 0, and P/4 at least
/// quasistatic_factor times the relaxation time at constant f = A.
HysteresisReport run_hysteresis(const StrengthField& field, const TorusGrid& grid, double amplitude,
                                double period, double pinned_force, const SolverConfig& config,
                                const HysteresisOptions& options = {});

/// Signed shoelace area of the closed polygon through the samples.
double loop_area(std::span<const LoopSample> samples);

/// Hausdorff distance between the last-cycle loops of two runs, as polylines
/// in the (f, mean u) plane.
double loop_distance(const LoopRun& a, const LoopRun& b);

nlohmann::json to_json(const HysteresisReport& report);

// ---------------------------------------------------------------------------
// Regularization study

struct EpsStudyReport {
    double force = 0.0;
    double duration = 0.0;
    std::vector<double> epsilons;
    std::vector<double> gaps;  ///< max over compared steps of ||u_eps - u_prox||_inf
    bool monotone = false;     ///< gaps nonincreasing within 1e-10
};

EpsStudyReport epsilon_convergence_study(const StrengthField& field, const TorusGrid& grid, double force,
                                         std::vector<double> epsilons, const SolverConfig& config,
                                         double duration, std::size_t compare_stride = 10);

nlohmann::json to_json(const EpsStudyReport& report);

// ---------------------------------------------------------------------------
// Ensembles over field realizations

struct EnsembleMember {
    std::uint64_t seed = 0;
    double f_lo = 0.0;
    double f_hi = 0.0;
    bool resolved = false;
};

struct EnsembleReport {
    std::vector<EnsembleMember> members;
    double mean = 0.0;      ///< of resolved bracket midpoints
    double variance = 0.0;  ///< unbiased sample variance
    std::size_t excluded = 0;
};

EnsembleReport ensemble_statistics(const ObstacleSpec& spec, std::span<const std::uint64_t> seeds,
                                   const TorusGrid& grid, const SolverConfig& config,
                                   const PinningOptions& options = {});

nlohmann::json to_json(const EnsembleReport& report);

}  // namespace pinning

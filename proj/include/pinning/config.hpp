#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pinning/experiments.hpp"
#include "pinning/forcing.hpp"
#include "pinning/grid.hpp"
#include "pinning/obstacle_field.hpp"
#include "pinning/solver.hpp"

namespace pinning {

struct HysteresisSettings {
    double amplitude_fraction = 0.8;  ///< A as a fraction of the pinned force
    double period = 10.0;
    int cycles = 2;
    double quasistatic_factor = 10.0;
    /// Skip the threshold estimate and use this F_lo directly.
    std::optional<double> pinned_force;

    bool operator==(const HysteresisSettings&) const = default;
};

struct EpsStudySettings {
    std::vector<double> epsilons{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double force = 0.1;
    double duration = 1.0;
    std::size_t stride = 10;

    bool operator==(const EpsStudySettings&) const = default;
};

/// Everything a run needs. obstacle.seed always equals the master seed.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string experiment;  ///< optional subcommand pin; empty accepts any
    ObstacleSpec obstacle;
    int points_per_axis = 256;
    SolverConfig solver;
    ForcingSpec forcing;
    PinningOptions pin;
    HysteresisSettings hysteresis;
    EpsStudySettings eps;
    std::optional<std::vector<std::uint64_t>> ensemble_seeds;  ///< default seed..seed+7
    std::string output_dir = "out";

    TorusGrid grid() const { return TorusGrid(obstacle.dimension, points_per_axis); }
    std::vector<std::uint64_t> member_seeds() const;

    /// Replaces the master seed (and with it the obstacle seed).
    void reseed(std::uint64_t value);

    bool operator==(const RunConfig& other) const;
};

/// Parses `key = value` lines (`#` starts a comment). Throws ConfigError with
/// a line number on syntax errors, listing unknown or missing keys, or
/// naming the violated invariant.
RunConfig parse_config(std::string_view text);

/// Every key with its effective value, sorted, numbers with 17 significant
/// digits. parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

/// Keys that must appear in every config.
const std::vector<std::string>& required_config_keys();

}  // namespace pinning

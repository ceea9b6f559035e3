#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "pinning/forcing.hpp"
#include "pinning/grid.hpp"
#include "pinning/strength_field.hpp"

namespace pinning {

struct EnergyRecord {
    double t = 0.0;
    double dirichlet = 0.0;  ///< 1/2 h^n sum |grad_h u|^2, forward differences
    double load = 0.0;       ///< h^n sum f u
    double total = 0.0;      ///< dirichlet - load
};

EnergyRecord energy(const State& state, std::span<const double> forcing_values);
EnergyRecord energy(const State& state, const ForcingSpec& forcing);

/// |E(post) - E(pre) + dt h^n sum_i (a_i^2 + phi_i |a_i|)| for one step with
/// a time-constant force. For the prox backend this equals
/// dt^2/2 h^n sum |grad_h a|^2 exactly, hence is second order in dt.
double dissipation_residual(const State& pre, const State& post, std::span<const double> velocity,
                            std::span<const double> strength, std::span<const double> forcing_values);

struct Certificate {
    bool ok = false;
    std::size_t worst_node = 0;
    double worst_margin = 0.0;
    double tol = 0.0;
};

/// ok iff laplacian(w)_i + f_i <= phi(x_i, w_i) + tol at every node; the
/// margin is the left side minus phi.
Certificate check_stationary_supersolution(const State& w, const StrengthField& field,
                                           std::span<const double> forcing_values, double tol);

/// ok iff laplacian(w)_i + f_i >= -phi(x_i, w_i) - tol; margin is
/// -phi - (laplacian(w)_i + f_i).
Certificate check_stationary_subsolution(const State& w, const StrengthField& field,
                                         std::span<const double> forcing_values, double tol);

nlohmann::json to_json(const Certificate& certificate);

/// Largest u_i - v_i over all paired snapshots (<= 0 means order preserved).
/// Throws ContractViolation when the recordings do not line up.
double verify_order(std::span<const State> run_u, std::span<const State> run_v);

}  // namespace pinning

#include "pinning/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinning/errors.hpp"
#include "pinning/solver.hpp"

namespace pinning {

namespace {

double dirichlet_energy(const TorusGrid& grid, std::span<const double> u) {
    const std::size_t m = static_cast<std::size_t>(grid.points_per_axis());
    const double h = grid.spacing();
    double sum = 0.0;
    if (grid.dimension() == 1) {
        for (std::size_t i = 0; i < m; ++i) {
            const double d = u[i + 1 == m ? 0 : i + 1] - u[i];
            sum += d * d;
        }
        return 0.5 * h * sum / (h * h);
    }
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t up = (j + 1 == m ? 0 : j + 1) * m;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t k = j * m + i;
            const double dx = u[j * m + (i + 1 == m ? 0 : i + 1)] - u[k];
            const double dy = u[up + i] - u[k];
            sum += dx * dx + dy * dy;
        }
    }
    return 0.5 * h * h * sum / (h * h);
}

double cell_volume(const TorusGrid& grid) {
    return grid.dimension() == 1 ? grid.spacing() : grid.spacing() * grid.spacing();
}

template <typename Margin>
Certificate certify(const State& w, const StrengthField& field, std::span<const double> forcing_values,
                    double tol, Margin&& margin) {
    const auto lap = laplacian(w.grid, w.u);
    std::vector<double> phi(w.u.size());
    field.evaluate(w.grid, w.u, phi);
    Certificate c;
    c.tol = tol;
    c.worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.u.size(); ++i) {
        const double value = margin(lap[i] + forcing_values[i], phi[i]);
        if (value > c.worst_margin) {
            c.worst_margin = value;
            c.worst_node = i;
        }
    }
    c.ok = c.worst_margin <= tol;
    return c;
}

}  // namespace

EnergyRecord energy(const State& state, std::span<const double> forcing_values) {
    EnergyRecord e;
    e.t = state.t;
    e.dirichlet = dirichlet_energy(state.grid, state.u);
    double load = 0.0;
    for (std::size_t i = 0; i < state.u.size(); ++i) {
        load += forcing_values[i] * state.u[i];
    }
    e.load = cell_volume(state.grid) * load;
    e.total = e.dirichlet - e.load;
    return e;
}

EnergyRecord energy(const State& state, const ForcingSpec& forcing) {
    return energy(state, forcing.evaluate(state.grid, state.t));
}

double dissipation_residual(const State& pre, const State& post, std::span<const double> velocity,
                            std::span<const double> strength, std::span<const double> forcing_values) {
    const double dt = post.t - pre.t;
    double dissipated = 0.0;
    for (std::size_t i = 0; i < velocity.size(); ++i) {
        const double a = velocity[i];
        dissipated += a * a + strength[i] * std::abs(a);
    }
    dissipated *= dt * cell_volume(pre.grid);
    const double change = energy(post, forcing_values).total - energy(pre, forcing_values).total;
    return std::abs(change + dissipated);
}

Certificate check_stationary_supersolution(const State& w, const StrengthField& field,
                                           std::span<const double> forcing_values, double tol) {
    return certify(w, field, forcing_values, tol,
                   [](double drive, double phi) { return drive - phi; });
}

Certificate check_stationary_subsolution(const State& w, const StrengthField& field,
                                         std::span<const double> forcing_values, double tol) {
    return certify(w, field, forcing_values, tol,
                   [](double drive, double phi) { return -phi - drive; });
}

nlohmann::json to_json(const Certificate& certificate) {
    return {{"ok", certificate.ok},
            {"worst_node_index", certificate.worst_node},
            {"worst_margin", certificate.worst_margin},
            {"tol", certificate.tol}};
}

double verify_order(std::span<const State> run_u, std::span<const State> run_v) {
    if (run_u.size() != run_v.size()) {
        throw ContractViolation("verify_order: recordings differ in length");
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < run_u.size(); ++k) {
        const State& u = run_u[k];
        const State& v = run_v[k];
        if (!(u.grid == v.grid) || u.u.size() != v.u.size()) {
            throw ContractViolation("verify_order: mismatched grids");
        }
        for (std::size_t i = 0; i < u.u.size(); ++i) {
            worst = std::max(worst, u.u[i] - v.u[i]);
        }
    }
    return worst;
}

}  // namespace pinning

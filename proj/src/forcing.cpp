#include "pinning/forcing.hpp"

#include <algorithm>
#include <cmath>

#include "pinning/errors.hpp"

namespace pinning {

namespace {

double triangle(double phase) {
    // phase in [0, 1): 0 -> 1 at 1/4, -1 at 3/4, back to 0 at 1
    if (phase < 0.25) {
        return 4.0 * phase;
    }
    if (phase < 0.75) {
        return 2.0 - 4.0 * phase;
    }
    return 4.0 * phase - 4.0;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void ForcingSpec::validate(std::size_t grid_size) const {
    std::visit(overloaded{
                   [](const Constant& c) {
                       if (!std::isfinite(c.value)) {
                           throw ConfigError("forcing: constant value must be finite");
                       }
                   },
                   [](const Cycle& c) {
                       if (!std::isfinite(c.amplitude)) {
                           throw ConfigError("forcing: amplitude must be finite");
                       }
                       if (!(c.period > 0.0) || !std::isfinite(c.period)) {
                           throw ConfigError("forcing: period must be positive");
                       }
                   },
                   [](const Tabulated& tab) {
                       if (tab.times.empty() || tab.times.size() != tab.values.size()) {
                           throw ConfigError("forcing: tabulated times and values must be non-empty and of equal length");
                       }
                       for (std::size_t i = 1; i < tab.times.size(); ++i) {
                           if (!(tab.times[i] > tab.times[i - 1])) {
                               throw ConfigError("forcing: tabulated times must be strictly increasing");
                           }
                       }
                   },
               },
               profile);
    if (!lateral.empty() && grid_size != 0 && lateral.size() != grid_size) {
        throw ConfigError("forcing: lateral field size does not match the grid");
    }
}

double ForcingSpec::scalar(double t) const {
    return std::visit(overloaded{
                          [](const Constant& c) { return c.value; },
                          [t](const Cycle& c) {
                              const double cycles = t / c.period;
                              return c.amplitude * triangle(cycles - std::floor(cycles));
                          },
                          [t](const Tabulated& tab) {
                              const auto& ts = tab.times;
                              if (t <= ts.front()) {
                                  return tab.values.front();
                              }
                              if (t >= ts.back()) {
                                  return tab.values.back();
                              }
                              const auto hi = static_cast<std::size_t>(
                                  std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
                              const std::size_t lo = hi - 1;
                              const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
                              return (1.0 - w) * tab.values[lo] + w * tab.values[hi];
                          },
                      },
                      profile);
}

void ForcingSpec::evaluate(const TorusGrid& grid, double t, std::span<double> out) const {
    const double s = scalar(t);
    if (lateral.empty()) {
        std::fill(out.begin(), out.end(), s);
        return;
    }
    if (lateral.size() != grid.size()) {
        throw ContractViolation("forcing: lateral field size does not match the grid");
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = s + lateral[k];
    }
}

std::vector<double> ForcingSpec::evaluate(const TorusGrid& grid, double t) const {
    std::vector<double> out(grid.size());
    evaluate(grid, t, out);
    return out;
}

double ForcingSpec::lateral_min() const {
    return lateral.empty() ? 0.0 : *std::min_element(lateral.begin(), lateral.end());
}

double ForcingSpec::lateral_max() const {
    return lateral.empty() ? 0.0 : *std::max_element(lateral.begin(), lateral.end());
}

double ForcingSpec::sup_norm(double t) const {
    double lo = 0.0;
    double hi = 0.0;
    std::visit(overloaded{
                   [&](const Constant& c) { lo = hi = c.value; },
                   [&](const Cycle& c) {
                       // range of the triangle wave over [0, t]
                       double tri_lo = 0.0;
                       double tri_hi = 1.0;
                       if (t < 0.25 * c.period) {
                           tri_hi = triangle(t / c.period);
                       } else if (t < 0.75 * c.period) {
                           tri_lo = triangle(t / c.period);
                       } else {
                           tri_lo = -1.0;
                       }
                       lo = std::min(c.amplitude * tri_lo, c.amplitude * tri_hi);
                       hi = std::max(c.amplitude * tri_lo, c.amplitude * tri_hi);
                   },
                   [&](const Tabulated& tab) {
                       lo = hi = scalar(0.0);
                       const double end = scalar(t);
                       lo = std::min(lo, end);
                       hi = std::max(hi, end);
                       for (std::size_t i = 0; i < tab.times.size(); ++i) {
                           if (tab.times[i] > 0.0 && tab.times[i] < t) {
                               lo = std::min(lo, tab.values[i]);
                               hi = std::max(hi, tab.values[i]);
                           }
                       }
                   },
               },
               profile);
    return std::max(std::abs(lo + lateral_min()), std::abs(hi + lateral_max()));
}

}  // namespace pinning

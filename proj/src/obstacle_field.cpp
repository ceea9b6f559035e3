#include "pinning/obstacle_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pinning/errors.hpp"
#include "pinning/rng.hpp"

namespace pinning {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

double wrap_unit(double x) {
    double w = x - std::floor(x);
    return w >= 1.0 ? 0.0 : w;
}

}  // namespace

void ObstacleSpec::validate() const {
    if (!(intensity > 0.0) || !std::isfinite(intensity)) {
        throw ConfigError("obstacle: intensity must be positive");
    }
    if (!(mollification_width > 0.0)) {
        throw ConfigError("obstacle: mollification_width must be positive");
    }
    if (!(radius > mollification_width)) {
        throw ConfigError("obstacle: radius must exceed mollification_width");
    }
    if (!(slab_half_height > radius + mollification_width)) {
        throw ConfigError("obstacle: slab_half_height must exceed radius + mollification_width");
    }
    if (dimension != 1 && dimension != 2) {
        throw ConfigError("obstacle: dimension must be 1 or 2");
    }
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

ObstacleField::ObstacleField(const ObstacleSpec& spec, std::vector<Center> centers)
    : spec_(spec), centers_(std::move(centers)) {
    spec_.validate();
    const int n = spec_.dimension;
    const double y = spec_.slab_half_height;
    for (auto& c : centers_) {
        for (int a = 0; a < n; ++a) {
            c[a] = wrap_unit(c[a]);
        }
        for (int a = n + 1; a < 3; ++a) {
            c[a] = 0.0;
        }
        if (!(std::abs(c[n]) <= y)) {
            throw ConfigError("obstacle: center height outside the slab");
        }
    }

    sorted_heights_.reserve(centers_.size());
    for (const auto& c : centers_) {
        sorted_heights_.push_back(c[n]);
    }
    std::sort(sorted_heights_.begin(), sorted_heights_.end());

    // Cell edges are at least the support radius so a support-radius query
    // touches only the adjacent ring of cells.
    const double reach = spec_.support_radius();
    for (int a = 0; a < n; ++a) {
        cell_count_[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(1.0 / reach)));
        cell_edge_[a] = 1.0 / static_cast<double>(cell_count_[a]);
    }
    cell_count_[n] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(2.0 * y / reach)));
    cell_edge_[n] = 2.0 * y / static_cast<double>(cell_count_[n]);
    for (int a = n + 1; a < 3; ++a) {
        cell_count_[a] = 1;
        cell_edge_[a] = infinity;
    }
    min_edge_ = *std::min_element(cell_edge_.begin(), cell_edge_.begin() + n + 1);

    const std::size_t total = cell_count_[0] * cell_count_[1] * cell_count_[2];
    std::vector<std::size_t> cell_of(centers_.size());
    std::vector<std::size_t> counts(total, 0);
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        std::size_t id = 0;
        for (int a = n; a >= 0; --a) {
            id = id * cell_count_[a] + cell_of_axis(a, centers_[i][a]);
        }
        cell_of[i] = id;
        ++counts[id];
    }
    cell_start_.assign(total + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), cell_start_.begin() + 1);
    cell_items_.resize(centers_.size());
    std::vector<std::size_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        cell_items_[cursor[cell_of[i]]++] = i;
    }
}

std::size_t ObstacleField::cell_of_axis(int axis, double coordinate) const {
    const int n = spec_.dimension;
    const double origin = axis == n ? -spec_.slab_half_height : 0.0;
    const double scaled = std::floor((coordinate - origin) / cell_edge_[axis]);
    if (scaled <= 0.0) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(scaled), cell_count_[axis] - 1);
}

double ObstacleField::squared_distance(const Center& c, const double* x, double h) const {
    double sum = 0.0;
    for (int a = 0; a < spec_.dimension; ++a) {
        double d = x[a] - c[a];
        // both coordinates lie in [0, 1), so one shift reaches the nearest image
        if (d > 0.5) {
            d -= 1.0;
        } else if (d < -0.5) {
            d += 1.0;
        }
        sum += d * d;
    }
    const double dh = h - c[spec_.dimension];
    return sum + dh * dh;
}

// Visits centers ring by ring (Chebyshev shells of cells around the query
// cell). `visit(index, squared_distance)` returns the squared radius below
// which the search must continue; the search stops once every unvisited cell
// lies farther than that or farther than stop_radius.
template <typename Visit>
void ObstacleField::ring_search(std::span<const double> x, double h, double stop_radius,
                                Visit&& visit) const {
    const int n = spec_.dimension;
    const int axes = n + 1;
    std::array<double, 2> xw{};
    for (int a = 0; a < n; ++a) {
        xw[a] = wrap_unit(x[a]);
    }
    std::array<long, 3> home{};
    for (int a = 0; a < n; ++a) {
        home[a] = static_cast<long>(cell_of_axis(a, xw[a]));
    }
    home[n] = static_cast<long>(cell_of_axis(n, h));

    std::size_t max_ring = 0;
    for (int a = 0; a < axes; ++a) {
        max_ring = std::max(max_ring, cell_count_[a]);
    }

    std::vector<std::size_t> seen;
    double keep_searching_sq = infinity;
    for (std::size_t ring = 0; ring <= max_ring; ++ring) {
        const long r = static_cast<long>(ring);
        std::array<long, 3> lo{0, 0, 0};
        std::array<long, 3> hi{0, 0, 0};
        for (int a = 0; a < axes; ++a) {
            lo[a] = -r;
            hi[a] = r;
        }
        for (long o2 = lo[2]; o2 <= hi[2]; ++o2) {
            for (long o1 = lo[1]; o1 <= hi[1]; ++o1) {
                for (long o0 = lo[0]; o0 <= hi[0]; ++o0) {
                    const std::array<long, 3> off{o0, o1, o2};
                    long cheb = 0;
                    for (int a = 0; a < axes; ++a) {
                        cheb = std::max(cheb, std::abs(off[a]));
                    }
                    if (cheb != r) {
                        continue;
                    }
                    std::size_t id = 0;
                    bool inside = true;
                    for (int a = n; a >= 0; --a) {
                        long c = home[a] + off[a];
                        const long count = static_cast<long>(cell_count_[a]);
                        if (a < n) {
                            c = ((c % count) + count) % count;
                        } else if (c < 0 || c >= count) {
                            inside = false;
                            break;
                        }
                        id = id * cell_count_[a] + static_cast<std::size_t>(c);
                    }
                    if (!inside) {
                        continue;
                    }
                    if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
                        continue;
                    }
                    seen.push_back(id);
                    for (std::size_t s = cell_start_[id]; s < cell_start_[id + 1]; ++s) {
                        const std::size_t i = cell_items_[s];
                        keep_searching_sq = visit(i, squared_distance(centers_[i], xw.data(), h));
                    }
                }
            }
        }
        // Any unvisited cell is at least ring * min_edge away.
        const double covered = static_cast<double>(ring) * min_edge_;
        if (covered >= stop_radius || covered * covered >= keep_searching_sq) {
            return;
        }
    }
}

double ObstacleField::nearest_center_distance_within(std::span<const double> x, double h,
                                                     double cutoff) const {
    double best = infinity;
    ring_search(x, h, cutoff, [&best](std::size_t, double d2) {
        best = std::min(best, d2);
        return best;
    });
    const double d = std::sqrt(best);
    return d <= cutoff ? d : infinity;
}

double ObstacleField::nearest_center_distance(std::span<const double> x, double h) const {
    return nearest_center_distance_within(x, h, infinity);
}

std::vector<std::size_t> ObstacleField::centers_within(std::span<const double> x, double h,
                                                       double radius) const {
    std::vector<std::size_t> found;
    const double r2 = radius * radius;
    ring_search(x, h, radius, [&](std::size_t i, double d2) {
        if (d2 <= r2) {
            found.push_back(i);
        }
        return infinity;
    });
    std::sort(found.begin(), found.end());
    return found;
}

double ObstacleField::neighborhood_min_sq(const double* x, double h) const {
    const int n = spec_.dimension;
    std::array<std::array<std::size_t, 3>, 2> lateral{};
    std::array<int, 2> lateral_count{1, 1};
    for (int a = 0; a < n; ++a) {
        const std::size_t count = cell_count_[a];
        const std::size_t home = cell_of_axis(a, x[a]);
        if (count < 3) {
            for (std::size_t c = 0; c < count; ++c) {
                lateral[a][c] = c;
            }
            lateral_count[a] = static_cast<int>(count);
        } else {
            lateral[a] = {(home + count - 1) % count, home, (home + 1) % count};
            lateral_count[a] = 3;
        }
    }
    const std::size_t vertical_home = cell_of_axis(n, h);
    const std::size_t v_lo = vertical_home == 0 ? 0 : vertical_home - 1;
    const std::size_t v_hi = std::min(vertical_home + 1, cell_count_[n] - 1);

    double best = infinity;
    for (std::size_t v = v_lo; v <= v_hi; ++v) {
        for (int j = 0; j < (n == 2 ? lateral_count[1] : 1); ++j) {
            for (int i = 0; i < lateral_count[0]; ++i) {
                const std::size_t id = n == 1 ? v * cell_count_[0] + lateral[0][i]
                                              : (v * cell_count_[1] + lateral[1][j]) * cell_count_[0] + lateral[0][i];
                for (std::size_t s = cell_start_[id]; s < cell_start_[id + 1]; ++s) {
                    best = std::min(best, squared_distance(centers_[cell_items_[s]], x, h));
                }
            }
        }
    }
    return best;
}

double ObstacleField::phi(std::span<const double> x, double h) const {
    const double reach = spec_.support_radius();
    std::array<double, 2> xw{};
    for (int a = 0; a < spec_.dimension; ++a) {
        xw[a] = wrap_unit(x[a]);
    }
    const double d = std::sqrt(neighborhood_min_sq(xw.data(), h));
    if (!(d < reach)) {
        return 0.0;
    }
    return smoothstep((reach - d) / (2.0 * spec_.mollification_width));
}

void ObstacleField::evaluate(const TorusGrid& grid, std::span<const double> heights,
                             std::span<double> out) const {
    if (grid.dimension() != spec_.dimension) {
        throw ContractViolation("obstacle field and grid dimensions differ");
    }
    for (std::size_t k = 0; k < heights.size(); ++k) {
        const auto x = grid.coordinates(k);
        out[k] = phi(std::span<const double>(x.data(), static_cast<std::size_t>(spec_.dimension)),
                     heights[k]);
    }
}

namespace {

class ColumnStrength final : public BoundStrength {
public:
    struct Candidate {
        double height;
        double lateral_sq;
    };

    ColumnStrength(const ObstacleSpec& spec, std::vector<std::size_t> start, std::vector<Candidate> items)
        : reach_(spec.support_radius()),
          width_(spec.mollification_width),
          start_(std::move(start)),
          items_(std::move(items)),
          hint_(start_.begin(), start_.end() - 1),
          last_height_(start_.size() - 1, std::numeric_limits<double>::quiet_NaN()),
          last_value_(start_.size() - 1, 0.0) {}

    void evaluate(std::span<const double> heights, std::span<double> out) override {
        if (heights.size() + 1 != start_.size() || out.size() != heights.size()) {
            throw ContractViolation("bound obstacle field: size does not match the grid");
        }
        for (std::size_t k = 0; k < heights.size(); ++k) {
            const double h = heights[k];
            // pinned nodes keep their height bit for bit, and so their phi
            if (h == last_height_[k]) {
                out[k] = last_value_[k];
                continue;
            }
            last_height_[k] = h;
            const double floor = h - reach_;
            // hint_[k] ends as the first candidate with height >= floor; heights
            // move little per step so this walk is short
            std::size_t i = hint_[k];
            while (i > start_[k] && items_[i - 1].height >= floor) {
                --i;
            }
            while (i < start_[k + 1] && items_[i].height < floor) {
                ++i;
            }
            hint_[k] = i;
            double best = infinity;
            for (; i < start_[k + 1] && items_[i].height <= h + reach_; ++i) {
                const double dh = h - items_[i].height;
                best = std::min(best, items_[i].lateral_sq + dh * dh);
            }
            double value = 0.0;
            if (best != infinity) {
                const double d = std::sqrt(best);
                value = d < reach_ ? smoothstep((reach_ - d) / (2.0 * width_)) : 0.0;
            }
            out[k] = value;
            last_value_[k] = value;
        }
    }

private:
    double reach_;
    double width_;
    std::vector<std::size_t> start_;
    std::vector<Candidate> items_;
    std::vector<std::size_t> hint_;
    std::vector<double> last_height_;
    std::vector<double> last_value_;
};

}  // namespace

std::unique_ptr<BoundStrength> ObstacleField::bind(const TorusGrid& grid) const {
    if (grid.dimension() != spec_.dimension) {
        throw ContractViolation("obstacle field and grid dimensions differ");
    }
    const int n = spec_.dimension;
    const double reach = spec_.support_radius();
    std::vector<std::size_t> start{0};
    std::vector<ColumnStrength::Candidate> items;
    std::vector<ColumnStrength::Candidate> column;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto x = grid.coordinates(k);
        column.clear();
        for (const auto& c : centers_) {
            // lateral part of squared_distance, same operation order
            const double lateral_sq = squared_distance(c, x.data(), c[n]);
            if (lateral_sq <= reach * reach) {
                column.push_back({c[n], lateral_sq});
            }
        }
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.height < b.height; });
        items.insert(items.end(), column.begin(), column.end());
        start.push_back(items.size());
    }
    return std::make_unique<ColumnStrength>(spec_, std::move(start), std::move(items));
}

double ObstacleField::escape_height() const {
    return spec_.slab_half_height - spec_.support_radius();
}

bool ObstacleField::band_is_clear(double lo, double hi) const {
    const double reach = spec_.support_radius();
    auto it = std::upper_bound(sorted_heights_.begin(), sorted_heights_.end(), lo - reach);
    return it == sorted_heights_.end() || !(*it < hi + reach);
}

ObstacleField sample_field(const ObstacleSpec& spec) {
    spec.validate();
    Rng rng = Rng::stream(spec.seed, Rng::Stream::obstacle_field);
    const double y = spec.slab_half_height;
    const std::uint64_t count = rng.poisson(spec.intensity * 2.0 * y);
    std::vector<Center> centers(count);
    for (auto& c : centers) {
        for (int a = 0; a < spec.dimension; ++a) {
            c[a] = rng.uniform();
        }
        c[spec.dimension] = -y + 2.0 * y * rng.uniform();
    }
    return ObstacleField(spec, std::move(centers));
}

FieldStats field_stats(const ObstacleField& field, int resolution) {
    if (resolution < 8) {
        throw ContractViolation("field_stats: resolution must be at least 8 per unit length");
    }
    const auto& spec = field.spec();
    const int n = spec.dimension;
    const double y = spec.slab_half_height;
    const int lateral = resolution;
    const int vertical = static_cast<int>(std::ceil(2.0 * y * resolution)) + 1;

    FieldStats stats;
    double sum = 0.0;
    std::size_t samples = 0;
    std::array<double, 2> x{};
    const int outer = n == 2 ? lateral : 1;
    for (int j = 0; j < outer; ++j) {
        x[1] = static_cast<double>(j) / lateral;
        for (int i = 0; i < lateral; ++i) {
            x[0] = static_cast<double>(i) / lateral;
            for (int v = 0; v < vertical; ++v) {
                const double h = -y + 2.0 * y * static_cast<double>(v) / (vertical - 1);
                const double value = field.phi(std::span<const double>(x.data(), n), h);
                stats.sup_phi = std::max(stats.sup_phi, value);
                sum += value;
                ++samples;
            }
        }
    }
    for (const auto& c : field.centers()) {
        stats.sup_phi = std::max(stats.sup_phi, field.phi(std::span<const double>(c.data(), n), c[n]));
    }
    stats.mean_phi = sum / static_cast<double>(samples);
    return stats;
}

nlohmann::json to_json(const ObstacleField& field) {
    const auto& spec = field.spec();
    nlohmann::json centers = nlohmann::json::array();
    for (const auto& c : field.centers()) {
        nlohmann::json point = nlohmann::json::array();
        for (int a = 0; a <= spec.dimension; ++a) {
            point.push_back(c[a]);
        }
        centers.push_back(std::move(point));
    }
    return {
        {"spec",
         {{"lambda", spec.intensity},
          {"rho", spec.radius},
          {"delta", spec.mollification_width},
          {"Y", spec.slab_half_height},
          {"n", spec.dimension},
          {"seed", spec.seed}}},
        {"centers", std::move(centers)},
    };
}

ObstacleField field_from_json(const nlohmann::json& document) {
    try {
        const auto& s = document.at("spec");
        ObstacleSpec spec;
        spec.intensity = s.at("lambda").get<double>();
        spec.radius = s.at("rho").get<double>();
        spec.mollification_width = s.at("delta").get<double>();
        spec.slab_half_height = s.at("Y").get<double>();
        spec.dimension = s.at("n").get<int>();
        spec.seed = s.at("seed").get<std::uint64_t>();
        spec.validate();
        std::vector<Center> centers;
        for (const auto& point : document.at("centers")) {
            if (point.size() != static_cast<std::size_t>(spec.dimension + 1)) {
                throw ConfigError("field json: center has wrong arity");
            }
            Center c{};
            for (int a = 0; a <= spec.dimension; ++a) {
                c[a] = point[a].get<double>();
            }
            centers.push_back(c);
        }
        return ObstacleField(spec, std::move(centers));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field json: ") + e.what());
    }
}

}  // namespace pinning

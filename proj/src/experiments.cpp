#include "pinning/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinning/errors.hpp"
#include "pinning/io.hpp"
#include "pinning/parallel.hpp"

namespace pinning {

namespace {

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

Outcome outcome_from_string(const std::string& name) {
    if (name == "stationary") {
        return Outcome::stationary;
    }
    if (name == "escaped") {
        return Outcome::escaped;
    }
    if (name == "timeout") {
        return Outcome::timeout;
    }
    throw ConfigError("unknown run outcome '" + name + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

RunResult run_probe(const StrengthField& field, const TorusGrid& grid, const SolverConfig& config,
                    double force) {
    return run_until(State::flat(grid), field, ForcingSpec::constant(force), config);
}

PinningReport estimate_pinning_threshold(const ObstacleField& field, const TorusGrid& grid,
                                         const SolverConfig& config, const PinningOptions& options) {
    if (!(options.initial_upper > 0.0)) {
        throw ContractViolation("pinning threshold: initial upper force must be positive");
    }
    if (options.bisection_steps < 6) {
        throw ContractViolation("pinning threshold: at least 6 bisection steps are required");
    }
    SolverConfig probe_config = config;
    probe_config.clear_path_exit = options.clear_path_exit;
    probe_config.validate();

    PinningReport report;
    report.field_seed = field.spec().seed;
    report.resolved = true;

    // Classifies one force; a timeout is retried once with doubled t_max.
    auto classify = [&](double force, State* final_state) {
        ProbeRecord record;
        record.force = force;
        RunResult run = run_probe(field, grid, probe_config, force);
        if (run.outcome == Outcome::timeout) {
            SolverConfig longer = probe_config;
            longer.t_max *= 2.0;
            run = run_probe(field, grid, longer, force);
            record.attempts = 2;
        }
        record.outcome = run.outcome;
        record.t_end = run.final_state.t;
        record.steps = run.steps;
        report.probes.push_back(record);
        if (final_state != nullptr && run.outcome == Outcome::stationary) {
            *final_state = std::move(run.final_state);
        }
        return run.outcome;
    };

    State pinned = State::flat(grid);
    if (classify(0.0, &pinned) != Outcome::stationary) {
        report.resolved = false;
    }

    double hi = options.initial_upper;
    Outcome upper = classify(hi, nullptr);
    while (report.resolved && upper == Outcome::stationary && report.doublings < options.max_doublings) {
        hi *= 2.0;
        ++report.doublings;
        upper = classify(hi, nullptr);
    }
    if (upper != Outcome::escaped) {
        report.resolved = false;
    }

    double lo = 0.0;
    for (int it = 0; report.resolved && it < options.bisection_steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        State candidate = State::flat(grid);
        const Outcome outcome = classify(mid, &candidate);
        ++report.iterations;
        if (outcome == Outcome::stationary) {
            lo = mid;
            pinned = std::move(candidate);
        } else if (outcome == Outcome::escaped) {
            hi = mid;
        } else {
            report.resolved = false;
        }
    }

    report.f_lo = lo;
    report.f_hi = hi;
    report.pinned_profile = std::move(pinned);
    const auto f = ForcingSpec::constant(lo).evaluate(grid, 0.0);
    report.supersolution = check_stationary_supersolution(report.pinned_profile, field, f, config.tol_pin);
    report.subsolution = check_stationary_subsolution(report.pinned_profile, field, f, config.tol_pin);
    return report;
}

std::vector<std::string> report_violations(const PinningReport& report) {
    std::vector<std::string> problems;
    if (!(report.f_lo < report.f_hi)) {
        problems.emplace_back("f_lo must be below f_hi");
    }
    bool lo_pinned = false;
    bool hi_escaped = false;
    for (const auto& p : report.probes) {
        lo_pinned = lo_pinned || (p.force == report.f_lo && p.outcome == Outcome::stationary);
        hi_escaped = hi_escaped || (p.force == report.f_hi && p.outcome == Outcome::escaped);
    }
    if (!lo_pinned) {
        problems.emplace_back("no stationary probe recorded at f_lo");
    }
    if (!hi_escaped) {
        problems.emplace_back("no escaped probe recorded at f_hi");
    }
    if (!report.supersolution.ok) {
        problems.emplace_back("pinned profile fails the supersolution certificate");
    }
    if (!report.subsolution.ok) {
        problems.emplace_back("pinned profile fails the subsolution certificate");
    }
    return problems;
}

nlohmann::json to_json(const PinningReport& report) {
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : report.probes) {
        probes.push_back({{"force", p.force},
                          {"outcome", std::string(to_string(p.outcome))},
                          {"t_end", p.t_end},
                          {"steps", p.steps},
                          {"attempts", p.attempts}});
    }
    return {{"field_seed", report.field_seed},
            {"bracket", {report.f_lo, report.f_hi}},
            {"iterations", report.iterations},
            {"doublings", report.doublings},
            {"resolved", report.resolved},
            {"pinned_profile", snapshot_to_json(report.pinned_profile)},
            {"certificates",
             {{"supersolution", to_json(report.supersolution)},
              {"subsolution", to_json(report.subsolution)}}},
            {"probes", std::move(probes)}};
}

namespace {

Certificate certificate_from_json(const nlohmann::json& c) {
    return Certificate{c.at("ok").get<bool>(), c.at("worst_node_index").get<std::size_t>(),
                       c.at("worst_margin").get<double>(), c.at("tol").get<double>()};
}

}  // namespace

PinningReport pinning_report_from_json(const nlohmann::json& document) {
    try {
        PinningReport report;
        report.field_seed = document.at("field_seed").get<std::uint64_t>();
        report.f_lo = document.at("bracket").at(0).get<double>();
        report.f_hi = document.at("bracket").at(1).get<double>();
        report.iterations = document.at("iterations").get<int>();
        report.doublings = document.at("doublings").get<int>();
        report.resolved = document.at("resolved").get<bool>();
        report.pinned_profile = snapshot_from_json(document.at("pinned_profile"));
        report.supersolution = certificate_from_json(document.at("certificates").at("supersolution"));
        report.subsolution = certificate_from_json(document.at("certificates").at("subsolution"));
        for (const auto& p : document.at("probes")) {
            ProbeRecord record;
            record.force = p.at("force").get<double>();
            record.outcome = outcome_from_string(p.at("outcome").get<std::string>());
            record.t_end = p.at("t_end").get<double>();
            record.steps = p.at("steps").get<std::size_t>();
            record.attempts = p.at("attempts").get<int>();
            report.probes.push_back(record);
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pinning report json: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

double loop_area(std::span<const LoopSample> samples) {
    if (samples.size() < 3) {
        return 0.0;
    }
    double twice = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& p = samples[i];
        const auto& q = samples[(i + 1) % samples.size()];
        twice += p.f * q.mean_u - q.f * p.mean_u;
    }
    return 0.5 * twice;
}

namespace {

LoopRun run_loop(const StrengthField& field, const TorusGrid& grid, double amplitude, double period,
                 const SolverConfig& config, const HysteresisOptions& options) {
    const ForcingSpec forcing = ForcingSpec::cycle(amplitude, period);
    Stepper stepper(grid, field, forcing, config);
    const double dt = stepper.dt();
    const double escape = field.escape_height() - config.margin(grid);

    const double start_time = 0.25 * period + (options.cycles - 1) * period;
    const auto first = static_cast<std::size_t>(std::ceil(start_time / dt));
    const auto last = static_cast<std::size_t>(std::ceil((start_time + period) / dt));
    const auto stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(period / dt / static_cast<double>(options.samples_per_cycle))));

    LoopRun run;
    run.period = period;
    State state = State::flat(grid);
    for (std::size_t k = 0;; ++k) {
        stepper.evaluate(state);
        if (k == first) {
            run.last_cycle_begin = run.samples.size();
        }
        if (k % stride == 0 || k == first || k == last) {
            run.samples.push_back({state.t, forcing.scalar(state.t), mean_of(state.u)});
        }
        const auto [lo, hi] = std::minmax_element(state.u.begin(), state.u.end());
        if (*lo >= escape || *hi <= -escape) {
            run.depinned = true;
            return run;
        }
        if (k == last) {
            break;
        }
        stepper.advance(state);
    }
    const std::span<const LoopSample> cycle(run.samples.begin() + static_cast<std::ptrdiff_t>(run.last_cycle_begin),
                                            run.samples.end());
    run.area = loop_area(cycle);
    run.closure_gap = std::abs(cycle.back().mean_u - cycle.front().mean_u);
    return run;
}

// Mean u as a function of f along one monotone branch, sampled on `grid_f`.
double point_to_segment(const LoopSample& p, const LoopSample& a, const LoopSample& b) {
    const double df = b.f - a.f;
    const double du = b.mean_u - a.mean_u;
    const double length_sq = df * df + du * du;
    double w = 0.0;
    if (length_sq > 0.0) {
        w = std::clamp(((p.f - a.f) * df + (p.mean_u - a.mean_u) * du) / length_sq, 0.0, 1.0);
    }
    return std::hypot(p.f - (a.f + w * df), p.mean_u - (a.mean_u + w * du));
}

// Largest distance from a vertex of `from` to the polyline `to`.
double directed_distance(std::span<const LoopSample> from, std::span<const LoopSample> to) {
    double worst = 0.0;
    for (const auto& p : from) {
        double best = std::hypot(p.f - to.front().f, p.mean_u - to.front().mean_u);
        for (std::size_t k = 1; k < to.size(); ++k) {
            best = std::min(best, point_to_segment(p, to[k - 1], to[k]));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

double loop_distance(const LoopRun& a, const LoopRun& b) {
    auto last_cycle = [](const LoopRun& run) {
        return std::span<const LoopSample>(run.samples.begin() + static_cast<std::ptrdiff_t>(run.last_cycle_begin),
                                           run.samples.end());
    };
    const auto cycle_a = last_cycle(a);
    const auto cycle_b = last_cycle(b);
    if (cycle_a.empty() || cycle_b.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    return std::max(directed_distance(cycle_a, cycle_b), directed_distance(cycle_b, cycle_a));
}

HysteresisReport run_hysteresis(const StrengthField& field, const TorusGrid& grid, double amplitude,
                                double period, double pinned_force, const SolverConfig& config,
                                const HysteresisOptions& options) {
    if (!(pinned_force > 0.0)) {
        throw ContractViolation("hysteresis: the field pins no positive force (F_lo = 0)");
    }
    if (!(amplitude >= 0.0 && amplitude <= pinned_force)) {
        throw ContractViolation("hysteresis: amplitude must lie in [0, F_lo]");
    }
    if (!(period > 0.0) || options.cycles < 2) {
        throw ContractViolation("hysteresis: need a positive period and at least two cycles");
    }

    HysteresisReport report;
    report.amplitude = amplitude;
    report.period = period;
    report.pinned_force = pinned_force;

    const RunResult relax = run_probe(field, grid, config, amplitude);
    if (relax.outcome == Outcome::escaped) {
        report.depinned = true;
        return report;
    }
    if (relax.outcome != Outcome::stationary) {
        throw ContractViolation("hysteresis: no relaxation to a stationary state at f = A within t_max");
    }
    report.relaxation_time = relax.final_state.t;
    if (0.25 * period < options.quasistatic_factor * report.relaxation_time) {
        throw ContractViolation("hysteresis: quarter period " + format_double(0.25 * period) +
                                " is shorter than " + format_double(options.quasistatic_factor) +
                                " relaxation times (" + format_double(report.relaxation_time) + ")");
    }

    std::array<LoopRun, 2> runs;
    parallel_for(2, [&](std::size_t i) {
        runs[i] = run_loop(field, grid, amplitude, i == 0 ? period : 2.0 * period, config, options);
    });
    report.base = std::move(runs[0]);
    report.doubled = std::move(runs[1]);
    report.depinned = report.base.depinned || report.doubled.depinned;
    if (!report.depinned) {
        report.sup_distance = loop_distance(report.base, report.doubled);
    }
    return report;
}

nlohmann::json to_json(const HysteresisReport& report) {
    auto loop = [](const LoopRun& run) {
        return nlohmann::json{{"period", run.period},
                              {"area", run.area},
                              {"closure_gap", run.closure_gap},
                              {"depinned", run.depinned},
                              {"samples", run.samples.size()},
                              {"last_cycle_begin", run.last_cycle_begin}};
    };
    return {{"amplitude", report.amplitude},
            {"period", report.period},
            {"pinned_force", report.pinned_force},
            {"relaxation_time", report.relaxation_time},
            {"loop", loop(report.base)},
            {"loop_doubled_period", loop(report.doubled)},
            {"sup_distance", report.sup_distance},
            {"depinned", report.depinned}};
}

// ---------------------------------------------------------------------------

EpsStudyReport epsilon_convergence_study(const StrengthField& field, const TorusGrid& grid, double force,
                                         std::vector<double> epsilons, const SolverConfig& config,
                                         double duration, std::size_t compare_stride) {
    if (epsilons.empty()) {
        throw ContractViolation("eps study: empty epsilon list");
    }
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || (i > 0 && !(epsilons[i] < epsilons[i - 1]))) {
            throw ContractViolation("eps study: epsilons must be positive and strictly decreasing");
        }
    }
    if (!(duration > 0.0) || compare_stride == 0) {
        throw ContractViolation("eps study: need a positive duration and stride");
    }

    const ForcingSpec forcing = ForcingSpec::constant(force);
    SolverConfig prox = config;
    prox.backend = Backend::prox;
    const double dt = prox.time_step(grid);
    const auto total = static_cast<std::size_t>(std::ceil(duration / dt));

    std::vector<std::vector<double>> reference;
    {
        Stepper stepper(grid, field, forcing, prox);
        State state = State::flat(grid);
        for (std::size_t k = 0;; ++k) {
            if (k % compare_stride == 0 || k == total) {
                reference.push_back(state.u);
            }
            if (k == total) {
                break;
            }
            stepper.step(state);
        }
    }

    EpsStudyReport report;
    report.force = force;
    report.duration = duration;
    report.epsilons = epsilons;
    report.gaps.assign(epsilons.size(), 0.0);
    parallel_for(epsilons.size(), [&](std::size_t e) {
        SolverConfig regularized = config;
        regularized.backend = Backend::regularized;
        regularized.epsilon = epsilons[e];
        Stepper stepper(grid, field, forcing, regularized);
        State state = State::flat(grid);
        double gap = 0.0;
        std::size_t snapshot = 0;
        for (std::size_t k = 0;; ++k) {
            if (k % compare_stride == 0 || k == total) {
                const auto& ref = reference[snapshot++];
                for (std::size_t i = 0; i < ref.size(); ++i) {
                    gap = std::max(gap, std::abs(state.u[i] - ref[i]));
                }
            }
            if (k == total) {
                break;
            }
            stepper.step(state);
        }
        report.gaps[e] = gap;
    });
    report.monotone = true;
    for (std::size_t i = 1; i < report.gaps.size(); ++i) {
        report.monotone = report.monotone && report.gaps[i] <= report.gaps[i - 1] + 1e-10;
    }
    return report;
}

nlohmann::json to_json(const EpsStudyReport& report) {
    return {{"force", report.force},
            {"duration", report.duration},
            {"epsilons", report.epsilons},
            {"gaps", report.gaps},
            {"monotone", report.monotone}};
}

// ---------------------------------------------------------------------------

EnsembleReport ensemble_statistics(const ObstacleSpec& spec, std::span<const std::uint64_t> seeds,
                                   const TorusGrid& grid, const SolverConfig& config,
                                   const PinningOptions& options) {
    if (seeds.size() < 8) {
        throw ContractViolation("ensemble: at least 8 seeds are required");
    }
    EnsembleReport report;
    report.members.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        ObstacleSpec member_spec = spec;
        member_spec.seed = seeds[i];
        const ObstacleField field = sample_field(member_spec);
        const PinningReport pin = estimate_pinning_threshold(field, grid, config, options);
        report.members[i] = EnsembleMember{seeds[i], pin.f_lo, pin.f_hi, pin.resolved};
    });
    std::vector<double> midpoints;
    for (const auto& m : report.members) {
        if (m.resolved) {
            midpoints.push_back(0.5 * (m.f_lo + m.f_hi));
        } else {
            ++report.excluded;
        }
    }
    if (!midpoints.empty()) {
        report.mean = mean_of(midpoints);
    }
    if (midpoints.size() > 1) {
        double sum = 0.0;
        for (double v : midpoints) {
            sum += (v - report.mean) * (v - report.mean);
        }
        report.variance = sum / static_cast<double>(midpoints.size() - 1);
    }
    return report;
}

nlohmann::json to_json(const EnsembleReport& report) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : report.members) {
        members.push_back({{"seed", m.seed}, {"bracket", {m.f_lo, m.f_hi}}, {"resolved", m.resolved}});
    }
    return {{"members", std::move(members)},
            {"mean_midpoint", report.mean},
            {"variance_midpoint", report.variance},
            {"excluded", report.excluded}};
}

}  // namespace pinning

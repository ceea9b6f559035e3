#include "pinning/dispatch.hpp"

#include <algorithm>

#include "pinning/errors.hpp"
#include "pinning/experiments.hpp"
#include "pinning/io.hpp"
#include "pinning/rng.hpp"
#include "pinning/svg.hpp"

namespace pinning {

namespace {

std::string loop_csv(const LoopRun& run) {
    std::string out = "t,f,mean_u\n";
    for (const auto& s : run.samples) {
        out += format_double(s.t) + ',' + format_double(s.f) + ',' + format_double(s.mean_u) + '\n';
    }
    return out;
}

Artifacts simulate(const RunConfig& config) {
    const ObstacleField field = sample_field(config.obstacle);
    const TorusGrid grid = config.grid();
    const RunResult run = run_until(State::flat(grid), field, config.forcing, config.solver);
    Artifacts out;
    out["field.json"] = dump_json(to_json(field));
    out["trajectory.csv"] = trajectory_csv(run.trajectory);
    out["final_state.json"] = dump_json(snapshot_to_json(run.final_state));
    out["result.json"] = dump_json({{"outcome", std::string(to_string(run.outcome))},
                                    {"steps", run.steps},
                                    {"t_end", run.final_state.t},
                                    {"dt", config.solver.time_step(grid)}});
    if (grid.dimension() == 1) {
        out["profile.svg"] = profile_svg(run.final_state, field);
    }
    return out;
}

Artifacts pin_threshold(const RunConfig& config) {
    const ObstacleField field = sample_field(config.obstacle);
    const PinningReport report = estimate_pinning_threshold(field, config.grid(), config.solver, config.pin);
    Artifacts out;
    out["field.json"] = dump_json(to_json(field));
    auto document = to_json(report);
    document["violations"] = report_violations(report);
    out["pinning_report.json"] = dump_json(document);
    if (config.obstacle.dimension == 1) {
        out["profile.svg"] = profile_svg(report.pinned_profile, field);
    }
    return out;
}

Artifacts hysteresis(const RunConfig& config) {
    const ObstacleField field = sample_field(config.obstacle);
    const TorusGrid grid = config.grid();
    Artifacts out;
    double pinned_force = 0.0;
    if (config.hysteresis.pinned_force) {
        pinned_force = *config.hysteresis.pinned_force;
    } else {
        const PinningReport pin = estimate_pinning_threshold(field, grid, config.solver, config.pin);
        if (!pin.resolved) {
            throw ContractViolation("hysteresis: the pinning bracket is unresolved");
        }
        pinned_force = pin.f_lo;
        out["pinning_report.json"] = dump_json(to_json(pin));
    }
    HysteresisOptions options;
    options.cycles = config.hysteresis.cycles;
    options.quasistatic_factor = config.hysteresis.quasistatic_factor;
    const HysteresisReport report =
        run_hysteresis(field, grid, config.hysteresis.amplitude_fraction * pinned_force, config.hysteresis.period,
                       pinned_force, config.solver, options);
    out["field.json"] = dump_json(to_json(field));
    out["hysteresis.json"] = dump_json(to_json(report));
    out["loop_P.csv"] = loop_csv(report.base);
    out["loop_2P.csv"] = loop_csv(report.doubled);
    return out;
}

Artifacts eps_study(const RunConfig& config) {
    const ObstacleField field = sample_field(config.obstacle);
    const EpsStudyReport report = epsilon_convergence_study(field, config.grid(), config.eps.force,
                                                            config.eps.epsilons, config.solver, config.eps.duration,
                                                            config.eps.stride);
    Artifacts out;
    out["field.json"] = dump_json(to_json(field));
    out["eps_study.json"] = dump_json(to_json(report));
    return out;
}

Artifacts ensemble(const RunConfig& config) {
    const auto seeds = config.member_seeds();
    const EnsembleReport report = ensemble_statistics(config.obstacle, seeds, config.grid(), config.solver, config.pin);
    Artifacts out;
    out["ensemble.json"] = dump_json(to_json(report));
    return out;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"simulate", "pin-threshold", "hysteresis", "eps-study", "ensemble"};
    return names;
}

Artifacts run_experiment(const std::string& subcommand, const RunConfig& config) {
    if (!config.experiment.empty() && config.experiment != subcommand) {
        throw ConfigError("config: experiment = " + config.experiment + " does not match subcommand " + subcommand);
    }
    if (subcommand == "simulate") {
        return simulate(config);
    }
    if (subcommand == "pin-threshold") {
        return pin_threshold(config);
    }
    if (subcommand == "hysteresis") {
        return hysteresis(config);
    }
    if (subcommand == "eps-study") {
        return eps_study(config);
    }
    if (subcommand == "ensemble") {
        return ensemble(config);
    }
    throw ConfigError("unknown subcommand '" + subcommand + "'");
}

std::filesystem::path run_directory(const std::string& subcommand, const RunConfig& config) {
    return std::filesystem::path(config.output_dir) / (subcommand + "-seed" + std::to_string(config.seed));
}

nlohmann::json make_manifest(const std::string& subcommand, const RunConfig& config, const Artifacts& artifacts) {
    nlohmann::json checksums = nlohmann::json::object();
    for (const auto& [name, bytes] : artifacts) {
        checksums[name] = sha256_hex(bytes);
    }
    nlohmann::json seeds = {{"master", config.seed}, {"obstacle", config.obstacle.seed}};
    if (subcommand == "ensemble") {
        seeds["ensemble"] = config.member_seeds();
    }
    return {{"subcommand", subcommand},
            {"config", dump_config(config)},
            {"seeds", std::move(seeds)},
            {"rng", std::string(Rng::name)},
            {"artifacts", std::move(checksums)}};
}

nlohmann::json error_document(const std::exception& error, int& exit_code) {
    std::string kind = "error";
    exit_code = 1;
    if (dynamic_cast<const ConfigError*>(&error) != nullptr) {
        kind = "config_error";
        exit_code = 2;
    } else if (dynamic_cast<const ContractViolation*>(&error) != nullptr) {
        kind = "contract_violation";
        exit_code = 3;
    } else if (const auto* numerical = dynamic_cast<const NumericalError*>(&error)) {
        kind = "numerical_error";
        exit_code = 4;
        return {{"error", kind}, {"message", error.what()}, {"exit_code", exit_code}, {"step", numerical->step()}};
    } else if (dynamic_cast<const UnsupportedDimension*>(&error) != nullptr) {
        kind = "unsupported_dimension";
        exit_code = 5;
    }
    return {{"error", kind}, {"message", error.what()}, {"exit_code", exit_code}};
}

DispatchOutcome dispatch(const std::string& subcommand, const RunConfig& config) {
    DispatchOutcome outcome;
    outcome.directory = run_directory(subcommand, config);
    try {
        const Artifacts artifacts = run_experiment(subcommand, config);
        for (const auto& [name, bytes] : artifacts) {
            write_text_file(outcome.directory / name, bytes);
        }
        outcome.summary = make_manifest(subcommand, config, artifacts);
        write_text_file(outcome.directory / "manifest.json", dump_json(outcome.summary));
        std::filesystem::remove(outcome.directory / "error.json");
    } catch (const std::exception& e) {
        outcome.summary = error_document(e, outcome.exit_code);
        try {
            write_text_file(outcome.directory / "error.json", dump_json(outcome.summary));
        } catch (const std::exception&) {
        }
    }
    return outcome;
}

ReplayOutcome replay_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir) {
    const nlohmann::json manifest = parse_json(read_text_file(manifest_path));
    std::string subcommand;
    RunConfig config;
    try {
        subcommand = manifest.at("subcommand").get<std::string>();
        config = parse_config(manifest.at("config").get<std::string>());
        if (manifest.at("rng").get<std::string>() != Rng::name) {
            throw ConfigError("manifest: generated with a different generator");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    config.output_dir = out_dir.string();
    const DispatchOutcome run = dispatch(subcommand, config);
    if (run.exit_code != 0) {
        throw std::runtime_error("replay failed: " + run.summary.at("message").get<std::string>());
    }
    ReplayOutcome outcome;
    outcome.directory = run.directory;
    const auto& expected = manifest.at("artifacts");
    const auto& actual = run.summary.at("artifacts");
    for (auto it = expected.begin(); it != expected.end(); ++it) {
        if (!actual.contains(it.key()) || actual.at(it.key()) != it.value()) {
            outcome.mismatches.push_back(it.key());
        }
    }
    for (auto it = actual.begin(); it != actual.end(); ++it) {
        if (!expected.contains(it.key())) {
            outcome.mismatches.push_back(it.key());
        }
    }
    outcome.identical = outcome.mismatches.empty();
    return outcome;
}

}  // namespace pinning

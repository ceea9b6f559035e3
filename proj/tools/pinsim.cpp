#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pinning/config.hpp"
#include "pinning/dispatch.hpp"
#include "pinning/io.hpp"

namespace {

int fail(const std::exception& error) {
    int code = 1;
    std::cerr << pinning::dump_json(pinning::error_document(error, code));
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interface evolution with dry friction in random obstacle fields"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    const std::map<std::string, std::string> descriptions{
        {"simulate", "evolve the interface under the configured forcing"},
        {"pin-threshold", "bracket the critical force by bisection"},
        {"hysteresis", "cyclic loading loops at periods P and 2P"},
        {"eps-study", "regularized backend against the prox backend"},
        {"ensemble", "threshold brackets over several field seeds"},
    };
    for (const auto& name : pinning::subcommand_names()) {
        auto* sub = app.add_subcommand(name, descriptions.at(name));
        sub->add_option("--config", config_path, "key = value config file")->required();
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }
    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "re-run a manifest and compare artifact checksums");
    replay->add_option("--manifest", manifest_path)->required();
    replay->add_option("--out", out_dir, "directory for the re-run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay->parsed()) {
            const auto outcome = pinning::replay_manifest(manifest_path, out_dir);
            nlohmann::json report = {{"identical", outcome.identical},
                                     {"mismatches", outcome.mismatches},
                                     {"directory", outcome.directory.string()}};
            std::cout << pinning::dump_json(report);
            return outcome.identical ? 0 : 6;
        }
        const std::string subcommand = app.get_subcommands().front()->get_name();
        pinning::RunConfig config = pinning::parse_config(pinning::read_text_file(config_path));
        if (seed) {
            config.reseed(*seed);
        }
        if (!out_dir.empty()) {
            config.output_dir = out_dir;
        }
        const auto outcome = pinning::dispatch(subcommand, config);
        if (outcome.exit_code != 0) {
            std::cerr << pinning::dump_json(outcome.summary);
            return outcome.exit_code;
        }
        std::cout << (outcome.directory / "manifest.json").string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

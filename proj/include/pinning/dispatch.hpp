#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinning/config.hpp"

namespace pinning {

/// File name -> exact bytes.
using Artifacts = std::map<std::string, std::string>;

const std::vector<std::string>& subcommand_names();

/// Runs one subcommand in memory. Throws on any failure.
Artifacts run_experiment(const std::string& subcommand, const RunConfig& config);

/// `<output.dir>/<subcommand>-seed<seed>`
std::filesystem::path run_directory(const std::string& subcommand, const RunConfig& config);

/// Normalized config, seeds, generator name and SHA-256 of every artifact.
nlohmann::json make_manifest(const std::string& subcommand, const RunConfig& config, const Artifacts& artifacts);

struct DispatchOutcome {
    int exit_code = 0;
    std::filesystem::path directory;
    nlohmann::json summary;  ///< the manifest on success, the error document otherwise
};

/// Exit codes: 0 ok, 2 configuration error, 3 contract violation,
/// 4 numerical failure, 5 unsupported dimension, 1 anything else. On failure
/// `error.json` is written to the run directory (when one can be made).
DispatchOutcome dispatch(const std::string& subcommand, const RunConfig& config);

struct ReplayOutcome {
    bool identical = false;
    std::vector<std::string> mismatches;  ///< artifact names whose checksum changed
    std::filesystem::path directory;
};

/// Re-runs the manifest's subcommand and config under `out_dir` and compares
/// artifact checksums.
ReplayOutcome replay_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

/// {"error": kind, "message": what, "exit_code": code}
nlohmann::json error_document(const std::exception& error, int& exit_code);

}  // namespace pinning

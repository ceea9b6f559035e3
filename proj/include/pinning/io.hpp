#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pinning/grid.hpp"
#include "pinning/solver.hpp"

namespace pinning {

/// Decimal with 17 significant digits; parses back to the identical double.
std::string format_double(double value);

/// JSON text where every floating-point number is written with 17
/// significant digits. Keys are emitted in sorted order.
std::string dump_json(const nlohmann::json& value, int indent = 2);

nlohmann::json parse_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Header `t,mean_u,min_u,max_u,max_excess,energy`.
std::string trajectory_csv(std::span<const TrajectoryRow> rows);

nlohmann::json snapshot_to_json(const State& state);
State snapshot_from_json(const nlohmann::json& document);

}  // namespace pinning

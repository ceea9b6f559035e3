#pragma once

#include <filesystem>
#include <string>

#include "pinning/grid.hpp"
#include "pinning/obstacle_field.hpp"

namespace pinning {

/// SVG of a 1D interface profile over the obstacle disks. Each center gets
/// one `<circle class="obstacle">` filled with a radial gradient whose
/// opacity follows phi; the interface is one `<polyline class="interface">`.
/// Output bytes depend only on the inputs. Throws UnsupportedDimension for
/// n = 2.
std::string profile_svg(const State& snapshot, const ObstacleField& field);

void render_profile_svg(const State& snapshot, const ObstacleField& field, const std::filesystem::path& path);

}  // namespace pinning

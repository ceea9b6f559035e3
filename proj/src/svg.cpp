#include "pinning/svg.hpp"

#include <array>
#include <cstdio>

#include "pinning/errors.hpp"
#include "pinning/io.hpp"

namespace pinning {

namespace {

constexpr double scale = 600.0;  // pixels per unit length
constexpr int gradient_stops = 9;

std::string fixed(double value) {
    std::array<char, 48> buffer{};
    std::snprintf(buffer.data(), buffer.size(), "%.3f", value);
    std::string out = buffer.data();
    return out == "-0.000" ? "0.000" : out;
}

}  // namespace

std::string profile_svg(const State& snapshot, const ObstacleField& field) {
    if (snapshot.grid.dimension() != 1 || field.spec().dimension != 1) {
        throw UnsupportedDimension("svg: only n = 1 profiles can be rendered");
    }
    const auto& spec = field.spec();
    const double y_extent = spec.slab_half_height;
    const double width = scale;
    const double height = 2.0 * y_extent * scale;
    auto px = [&](double x) { return fixed(x * scale); };
    auto py = [&](double h) { return fixed((y_extent - h) * scale); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
           "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\">\n";
    svg += "<defs>\n<radialGradient id=\"phi\">\n";
    // phi as a function of r / (rho + delta): 1 inside rho - delta, smoothstep ramp to 0 at the rim.
    const double outer = spec.support_radius();
    const double inner = spec.radius - spec.mollification_width;
    for (int s = 0; s < gradient_stops; ++s) {
        const double r = inner + (outer - inner) * s / (gradient_stops - 1);
        const double phi = smoothstep((spec.radius + spec.mollification_width - r) / (2.0 * spec.mollification_width));
        svg += "<stop offset=\"" + fixed(r / outer) + "\" stop-color=\"#4a4a4a\" stop-opacity=\"" + fixed(phi) +
               "\"/>\n";
    }
    svg += "</radialGradient>\n</defs>\n";
    svg += "<rect width=\"" + fixed(width) + "\" height=\"" + fixed(height) + "\" fill=\"white\"/>\n";
    for (const auto& c : field.centers()) {
        svg += "<circle class=\"obstacle\" cx=\"" + px(c[0]) + "\" cy=\"" + py(c[1]) + "\" r=\"" +
               fixed(outer * scale) + "\" fill=\"url(#phi)\"/>\n";
    }
    svg += "<polyline class=\"interface\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
    const double h = snapshot.grid.spacing();
    for (std::size_t i = 0; i <= snapshot.u.size(); ++i) {
        const std::size_t k = i % snapshot.u.size();
        svg += (i == 0 ? "" : " ") + px(static_cast<double>(i) * h) + "," + py(snapshot.u[k]);
    }
    svg += "\"/>\n</svg>\n";
    return svg;
}

void render_profile_svg(const State& snapshot, const ObstacleField& field, const std::filesystem::path& path) {
    write_text_file(path, profile_svg(snapshot, field));
}

}  // namespace pinning

#include "pinning/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pinning/errors.hpp"

namespace pinning {

namespace {

bool is_scalar(const nlohmann::json& value) {
    return !value.is_object() && !value.is_array();
}

void dump_value(const nlohmann::json& value, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (value.type()) {
        case nlohmann::json::value_t::number_float: {
            const double v = value.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        case nlohmann::json::value_t::object: {
            if (value.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = value.begin(); it != value.end(); ++it) {
                if (!first) {
                    out += ",\n";
                }
                first = false;
                out += pad;
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                dump_value(it.value(), indent, depth + 1, out);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (value.empty()) {
                out += "[]";
                return;
            }
            const bool flat = std::all_of(value.begin(), value.end(), is_scalar);
            out += flat ? "[" : "[\n";
            bool first = true;
            for (const auto& item : value) {
                if (!first) {
                    out += flat ? ", " : ",\n";
                }
                first = false;
                if (!flat) {
                    out += pad;
                }
                dump_value(item, indent, depth + 1, out);
            }
            out += flat ? "]" : "\n" + close_pad + "]";
            return;
        }
        default:
            out += value.dump();
            return;
    }
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 40> buffer{};
    std::snprintf(buffer.data(), buffer.size(), "%.17g", value);
    return buffer.data();
}

std::string dump_json(const nlohmann::json& value, int indent) {
    std::string out;
    dump_value(value, indent, 0, out);
    out += '\n';
    return out;
}

nlohmann::json parse_json(std::string_view text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("json: ") + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string trajectory_csv(std::span<const TrajectoryRow> rows) {
    std::string out = "t,mean_u,min_u,max_u,max_excess,energy\n";
    for (const auto& r : rows) {
        out += format_double(r.t) + ',' + format_double(r.mean_u) + ',' + format_double(r.min_u) + ',' +
               format_double(r.max_u) + ',' + format_double(r.max_excess) + ',' +
               format_double(r.energy) + '\n';
    }
    return out;
}

nlohmann::json snapshot_to_json(const State& state) {
    return {{"grid", {{"n", state.grid.dimension()}, {"m", state.grid.points_per_axis()}}},
            {"t", state.t},
            {"u", state.u}};
}

State snapshot_from_json(const nlohmann::json& document) {
    try {
        TorusGrid grid(document.at("grid").at("n").get<int>(), document.at("grid").at("m").get<int>());
        State state{grid, document.at("u").get<std::vector<double>>(), document.at("t").get<double>()};
        if (state.u.size() != grid.size()) {
            throw ConfigError("snapshot: u has the wrong number of entries");
        }
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("snapshot json: ") + e.what());
    }
}

}  // namespace pinning

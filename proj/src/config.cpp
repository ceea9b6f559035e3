#include "pinning/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "pinning/errors.hpp"
#include "pinning/io.hpp"

namespace pinning {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "seed",          "experiment",        "obstacle.lambda",    "obstacle.rho",
        "obstacle.delta", "obstacle.Y",       "obstacle.n",         "grid.m",
        "solver.backend", "solver.epsilon",   "solver.cfl",         "solver.tol_pin",
        "solver.dwell",   "solver.escape_margin", "solver.t_max",   "solver.output_stride",
        "forcing.kind",   "forcing.F",        "forcing.A",          "forcing.P",
        "forcing.times",  "forcing.values",   "pin.F_init_hi",      "pin.steps",
        "pin.max_doublings", "pin.clear_path_exit", "hysteresis.A_fraction", "hysteresis.P",
        "hysteresis.cycles", "hysteresis.quasistatic_factor", "hysteresis.pinned_force",
        "eps.list",       "eps.F",            "eps.T",              "eps.stride",
        "ensemble.seeds", "output.dir"};
    return keys;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string text(const std::string& key, std::string fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }

    double number(const std::string& key, double fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : to_number(key, it->second);
    }

    std::optional<double> optional_number(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end() || it->second.value == "auto") {
            return std::nullopt;
        }
        return to_number(key, it->second);
    }

    long long integer(const std::string& key, long long fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : to_integer(key, it->second.value, it->second.line);
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : to_unsigned(key, it->second.value, it->second.line);
    }

    bool boolean(const std::string& key, bool fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            return fallback;
        }
        if (it->second.value == "true") {
            return true;
        }
        if (it->second.value == "false") {
            return false;
        }
        throw error(key, it->second.line, "expected true or false, got '" + it->second.value + "'");
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            return fallback;
        }
        std::vector<double> out;
        for (const auto& item : split(it->second.value)) {
            out.push_back(to_number(key, Entry{item, it->second.line}));
        }
        return out;
    }

    std::optional<std::vector<std::uint64_t>> optional_seeds(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end() || it->second.value == "auto") {
            return std::nullopt;
        }
        std::vector<std::uint64_t> out;
        for (const auto& item : split(it->second.value)) {
            out.push_back(to_unsigned(key, item, it->second.line));
        }
        return out;
    }

    int line(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

private:
    static ConfigError error(const std::string& key, int line, const std::string& what) {
        return ConfigError("config line " + std::to_string(line) + ": " + key + ": " + what);
    }

    static std::vector<std::string> split(const std::string& value) {
        std::vector<std::string> items;
        std::stringstream stream(value);
        std::string item;
        while (std::getline(stream, item, ',')) {
            items.emplace_back(trim(item));
        }
        return items;
    }

    static double to_number(const std::string& key, const Entry& entry) {
        const char* begin = entry.value.c_str();
        char* end = nullptr;
        errno = 0;
        const double value = std::strtod(begin, &end);
        if (entry.value.empty() || end != begin + entry.value.size() || errno == ERANGE || !std::isfinite(value)) {
            throw error(key, entry.line, "expected a finite number, got '" + entry.value + "'");
        }
        return value;
    }

    static long long to_integer(const std::string& key, const std::string& text, int line) {
        const char* begin = text.c_str();
        char* end = nullptr;
        errno = 0;
        const long long value = std::strtoll(begin, &end, 10);
        if (text.empty() || end != begin + text.size() || errno == ERANGE) {
            throw error(key, line, "expected an integer, got '" + text + "'");
        }
        return value;
    }

    static std::uint64_t to_unsigned(const std::string& key, const std::string& text, int line) {
        const char* begin = text.c_str();
        char* end = nullptr;
        errno = 0;
        const unsigned long long value = std::strtoull(begin, &end, 10);
        if (text.empty() || text.front() == '-' || end != begin + text.size() || errno == ERANGE) {
            throw error(key, line, "expected a non-negative integer, got '" + text + "'");
        }
        return value;
    }

    std::map<std::string, Entry> entries_;
};

std::string join_numbers(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i == 0 ? "" : ", ") + format_double(values[i]);
    }
    return out;
}

std::string join_seeds(std::span<const std::uint64_t> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i == 0 ? "" : ", ") + std::to_string(values[i]);
    }
    return out;
}

std::string list_keys(const std::vector<std::string>& keys) {
    std::string out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out += (i == 0 ? "" : ", ") + keys[i];
    }
    return out;
}

const std::vector<std::string> subcommands{"simulate", "pin-threshold", "hysteresis", "eps-study", "ensemble"};

void validate(const RunConfig& config) {
    config.obstacle.validate();
    const TorusGrid grid = config.grid();
    config.solver.validate();
    config.forcing.validate(grid.size());
    if (!config.experiment.empty() &&
        std::find(subcommands.begin(), subcommands.end(), config.experiment) == subcommands.end()) {
        throw ConfigError("config: experiment must be one of simulate, pin-threshold, hysteresis, eps-study, ensemble");
    }
    if (!(config.pin.initial_upper > 0.0)) {
        throw ConfigError("pin: F_init_hi must be positive");
    }
    if (config.pin.bisection_steps < 6) {
        throw ConfigError("pin: steps must be at least 6");
    }
    if (config.pin.max_doublings < 0) {
        throw ConfigError("pin: max_doublings must be non-negative");
    }
    const auto& h = config.hysteresis;
    if (!(h.amplitude_fraction >= 0.0 && h.amplitude_fraction <= 1.0)) {
        throw ConfigError("hysteresis: A_fraction must lie in [0, 1]");
    }
    if (!(h.period > 0.0) || h.cycles < 2 || !(h.quasistatic_factor > 0.0)) {
        throw ConfigError("hysteresis: need P > 0, cycles >= 2 and quasistatic_factor > 0");
    }
    if (h.pinned_force && !(*h.pinned_force > 0.0)) {
        throw ConfigError("hysteresis: pinned_force must be positive");
    }
    const auto& e = config.eps;
    if (e.epsilons.empty()) {
        throw ConfigError("eps: list must not be empty");
    }
    for (std::size_t i = 0; i < e.epsilons.size(); ++i) {
        if (!(e.epsilons[i] > 0.0) || (i > 0 && !(e.epsilons[i] < e.epsilons[i - 1]))) {
            throw ConfigError("eps: list must be positive and strictly decreasing");
        }
    }
    if (!(e.duration > 0.0) || e.stride == 0) {
        throw ConfigError("eps: T and stride must be positive");
    }
    if (config.ensemble_seeds && config.ensemble_seeds->size() < 8) {
        throw ConfigError("ensemble: at least 8 seeds are required");
    }
    if (config.output_dir.empty()) {
        throw ConfigError("output: dir must not be empty");
    }
}

}  // namespace

std::vector<std::uint64_t> RunConfig::member_seeds() const {
    if (ensemble_seeds) {
        return *ensemble_seeds;
    }
    std::vector<std::uint64_t> seeds(8);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        seeds[i] = seed + i;
    }
    return seeds;
}

void RunConfig::reseed(std::uint64_t value) {
    seed = value;
    obstacle.seed = value;
}

bool RunConfig::operator==(const RunConfig& other) const {
    return seed == other.seed && experiment == other.experiment && obstacle == other.obstacle &&
           points_per_axis == other.points_per_axis && solver == other.solver && forcing == other.forcing &&
           pin == other.pin && hysteresis == other.hysteresis && eps == other.eps &&
           ensemble_seeds == other.ensemble_seeds && output_dir == other.output_dir;
}

const std::vector<std::string>& required_config_keys() {
    static const std::vector<std::string> keys{"grid.m", "obstacle.Y", "obstacle.delta", "obstacle.lambda",
                                               "obstacle.rho"};
    return keys;
}

RunConfig parse_config(std::string_view text) {
    std::map<std::string, Entry> entries;
    int line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto newline = text.find('\n', pos);
        std::string_view line = text.substr(pos, newline == std::string_view::npos ? text.npos : newline - pos);
        pos = newline == std::string_view::npos ? text.size() + 1 : newline + 1;
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_number) + ": syntax error, expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(line_number) + ": syntax error, empty key or value");
        }
        if (entries.count(key) != 0) {
            throw ConfigError("config line " + std::to_string(line_number) + ": duplicate key " + key +
                              " (first set on line " + std::to_string(entries[key].line) + ")");
        }
        entries[key] = Entry{value, line_number};
    }

    std::vector<std::string> unknown;
    for (const auto& [key, entry] : entries) {
        if (known_keys().count(key) == 0) {
            unknown.push_back(key);
        }
    }
    if (!unknown.empty()) {
        throw ConfigError("config: unknown keys: " + list_keys(unknown));
    }
    std::vector<std::string> missing;
    for (const auto& key : required_config_keys()) {
        if (entries.count(key) == 0) {
            missing.push_back(key);
        }
    }
    if (!missing.empty()) {
        throw ConfigError("config: missing required keys: " + list_keys(missing));
    }

    const Reader in(std::move(entries));
    RunConfig config;
    config.reseed(in.unsigned_integer("seed", 1));
    config.experiment = in.text("experiment", "");

    config.obstacle.intensity = in.number("obstacle.lambda", 0.0);
    config.obstacle.radius = in.number("obstacle.rho", 0.0);
    config.obstacle.mollification_width = in.number("obstacle.delta", 0.0);
    config.obstacle.slab_half_height = in.number("obstacle.Y", 0.0);
    config.obstacle.dimension = static_cast<int>(in.integer("obstacle.n", 1));
    config.points_per_axis = static_cast<int>(in.integer("grid.m", 0));

    const std::string backend = in.text("solver.backend", "prox");
    if (backend == "prox") {
        config.solver.backend = Backend::prox;
    } else if (backend == "regularized") {
        config.solver.backend = Backend::regularized;
    } else {
        throw ConfigError("config line " + std::to_string(in.line("solver.backend")) +
                          ": solver.backend must be prox or regularized");
    }
    config.solver.epsilon = in.number("solver.epsilon", config.solver.epsilon);
    config.solver.cfl_factor = in.number("solver.cfl", config.solver.cfl_factor);
    config.solver.tol_pin = in.number("solver.tol_pin", config.solver.tol_pin);
    config.solver.dwell = in.optional_number("solver.dwell");
    config.solver.escape_margin = in.optional_number("solver.escape_margin");
    config.solver.t_max = in.number("solver.t_max", config.solver.t_max);
    const long long stride = in.integer("solver.output_stride", 100);
    if (stride <= 0) {
        throw ConfigError("solver: output_stride must be positive");
    }
    config.solver.output_stride = static_cast<std::size_t>(stride);

    const std::string kind = in.text("forcing.kind", "constant");
    std::vector<std::string> foreign;
    auto reject = [&](std::initializer_list<const char*> keys) {
        for (const char* key : keys) {
            if (in.has(key)) {
                foreign.emplace_back(key);
            }
        }
    };
    if (kind == "constant") {
        config.forcing = ForcingSpec::constant(in.number("forcing.F", 0.0));
        reject({"forcing.A", "forcing.P", "forcing.times", "forcing.values"});
    } else if (kind == "cycle") {
        if (!in.has("forcing.A") || !in.has("forcing.P")) {
            throw ConfigError("config: forcing.kind = cycle requires forcing.A and forcing.P");
        }
        config.forcing = ForcingSpec::cycle(in.number("forcing.A", 0.0), in.number("forcing.P", 1.0));
        reject({"forcing.F", "forcing.times", "forcing.values"});
    } else if (kind == "tabulated") {
        if (!in.has("forcing.times") || !in.has("forcing.values")) {
            throw ConfigError("config: forcing.kind = tabulated requires forcing.times and forcing.values");
        }
        config.forcing = ForcingSpec::tabulated(in.numbers("forcing.times", {}), in.numbers("forcing.values", {}));
        reject({"forcing.F", "forcing.A", "forcing.P"});
    } else {
        throw ConfigError("config line " + std::to_string(in.line("forcing.kind")) +
                          ": forcing.kind must be constant, cycle or tabulated");
    }
    if (!foreign.empty()) {
        throw ConfigError("config: keys not used by forcing.kind = " + kind + ": " + list_keys(foreign));
    }

    config.pin.initial_upper = in.number("pin.F_init_hi", config.pin.initial_upper);
    config.pin.bisection_steps = static_cast<int>(in.integer("pin.steps", config.pin.bisection_steps));
    config.pin.max_doublings = static_cast<int>(in.integer("pin.max_doublings", config.pin.max_doublings));
    config.pin.clear_path_exit = in.boolean("pin.clear_path_exit", config.pin.clear_path_exit);

    auto& h = config.hysteresis;
    h.amplitude_fraction = in.number("hysteresis.A_fraction", h.amplitude_fraction);
    h.period = in.number("hysteresis.P", h.period);
    h.cycles = static_cast<int>(in.integer("hysteresis.cycles", h.cycles));
    h.quasistatic_factor = in.number("hysteresis.quasistatic_factor", h.quasistatic_factor);
    h.pinned_force = in.optional_number("hysteresis.pinned_force");

    auto& e = config.eps;
    e.epsilons = in.numbers("eps.list", e.epsilons);
    e.force = in.number("eps.F", e.force);
    e.duration = in.number("eps.T", e.duration);
    const long long eps_stride = in.integer("eps.stride", static_cast<long long>(e.stride));
    if (eps_stride <= 0) {
        throw ConfigError("eps: stride must be positive");
    }
    e.stride = static_cast<std::size_t>(eps_stride);

    config.ensemble_seeds = in.optional_seeds("ensemble.seeds");
    config.output_dir = in.text("output.dir", config.output_dir);

    validate(config);
    return config;
}

std::string dump_config(const RunConfig& config) {
    std::map<std::string, std::string> out;
    const auto num = [](double v) { return format_double(v); };
    const auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("auto"); };

    out["seed"] = std::to_string(config.seed);
    if (!config.experiment.empty()) {
        out["experiment"] = config.experiment;
    }
    out["obstacle.lambda"] = num(config.obstacle.intensity);
    out["obstacle.rho"] = num(config.obstacle.radius);
    out["obstacle.delta"] = num(config.obstacle.mollification_width);
    out["obstacle.Y"] = num(config.obstacle.slab_half_height);
    out["obstacle.n"] = std::to_string(config.obstacle.dimension);
    out["grid.m"] = std::to_string(config.points_per_axis);

    const auto& s = config.solver;
    out["solver.backend"] = std::string(to_string(s.backend));
    out["solver.epsilon"] = num(s.epsilon);
    out["solver.cfl"] = num(s.cfl_factor);
    out["solver.tol_pin"] = num(s.tol_pin);
    out["solver.dwell"] = opt(s.dwell);
    out["solver.escape_margin"] = opt(s.escape_margin);
    out["solver.t_max"] = num(s.t_max);
    out["solver.output_stride"] = std::to_string(s.output_stride);

    if (const auto* c = std::get_if<ForcingSpec::Constant>(&config.forcing.profile)) {
        out["forcing.kind"] = "constant";
        out["forcing.F"] = num(c->value);
    } else if (const auto* cycle = std::get_if<ForcingSpec::Cycle>(&config.forcing.profile)) {
        out["forcing.kind"] = "cycle";
        out["forcing.A"] = num(cycle->amplitude);
        out["forcing.P"] = num(cycle->period);
    } else {
        const auto& tab = std::get<ForcingSpec::Tabulated>(config.forcing.profile);
        out["forcing.kind"] = "tabulated";
        out["forcing.times"] = join_numbers(tab.times);
        out["forcing.values"] = join_numbers(tab.values);
    }

    out["pin.F_init_hi"] = num(config.pin.initial_upper);
    out["pin.steps"] = std::to_string(config.pin.bisection_steps);
    out["pin.max_doublings"] = std::to_string(config.pin.max_doublings);
    out["pin.clear_path_exit"] = config.pin.clear_path_exit ? "true" : "false";

    const auto& h = config.hysteresis;
    out["hysteresis.A_fraction"] = num(h.amplitude_fraction);
    out["hysteresis.P"] = num(h.period);
    out["hysteresis.cycles"] = std::to_string(h.cycles);
    out["hysteresis.quasistatic_factor"] = num(h.quasistatic_factor);
    out["hysteresis.pinned_force"] = opt(h.pinned_force);

    out["eps.list"] = join_numbers(config.eps.epsilons);
    out["eps.F"] = num(config.eps.force);
    out["eps.T"] = num(config.eps.duration);
    out["eps.stride"] = std::to_string(config.eps.stride);

    out["ensemble.seeds"] = config.ensemble_seeds ? join_seeds(*config.ensemble_seeds) : "auto";
    out["output.dir"] = config.output_dir;

    std::string text;
    for (const auto& [key, value] : out) {
        text += key + " = " + value + "\n";
    }
    return text;
}

}  // namespace pinning

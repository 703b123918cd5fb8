#include "hhmmo/config.hpp"

#include "hhmmo/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace hhmmo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(out))
        fail(ErrorKind::ConfigError, fmt::format("{}: '{}' is not a number", key, value));
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    int out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
        fail(ErrorKind::ConfigError, fmt::format("{}: '{}' is not an integer", key, value));
    return out;
}

Regime to_regime(const std::string& value) {
    if (value == "h_slow") return Regime::h_slow;
    if (value == "n_slow") return Regime::n_slow;
    fail(ErrorKind::ConfigError, "run.regime must be h_slow or n_slow");
}

SystemKind to_system(const std::string& value) {
    if (value == "full4d") return SystemKind::full4d;
    if (value == "reduced3d") return SystemKind::reduced3d;
    fail(ErrorKind::ConfigError, "integrator.system must be full4d or reduced3d");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

Setter num(double ModelParameters::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.model.*field = to_double(k, v); };
}

const std::map<std::string, Setter>& model_setters() {
    static const std::map<std::string, Setter> s = {
        {"model.gbar_k", num(&ModelParameters::gbar_K)},   {"model.gbar_l", num(&ModelParameters::gbar_L)},
        {"model.e_na", num(&ModelParameters::E_Na)},       {"model.e_k", num(&ModelParameters::E_K)},
        {"model.e_l", num(&ModelParameters::E_L)},         {"model.epsilon_mid", num(&ModelParameters::epsilon_mid)},
        {"model.delta_h", num(&ModelParameters::delta_h)}, {"model.delta_n", num(&ModelParameters::delta_n)},
        {"model.k_v", num(&ModelParameters::k_v)},         {"model.k_t", num(&ModelParameters::k_t)},
        {"model.c", num(&ModelParameters::C)},             {"model.g_na", num(&ModelParameters::g_Na)},
    };
    return s;
}

const std::map<std::string, Setter>& other_setters() {
    static const std::map<std::string, Setter> s = {
        {"integrator.system", [](RunConfig& c, const std::string&, const std::string& v) { c.simulation.system = to_system(v); }},
        {"integrator.rel_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.rel_tol = to_double(k, v); }},
        {"integrator.abs_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.abs_tol = to_double(k, v); }},
        {"simulate.duration", [](RunConfig& c, const std::string& k, const std::string& v) { c.duration = to_double(k, v); }},
        {"simulate.initial_duration", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.initial_duration = to_double(k, v); }},
        {"simulate.max_duration", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.max_duration = to_double(k, v); }},
        {"classifier.amplitude_fraction", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.amplitude_fraction = to_double(k, v); }},
        {"classifier.slow_rate_fraction", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.slow_rate_fraction = to_double(k, v); }},
        {"classifier.epoch_min_fraction", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.epoch_min_fraction = to_double(k, v); }},
        {"classifier.transient_fraction", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.transient_fraction = to_double(k, v); }},
        {"classifier.min_periods", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.min_periods = to_int(k, v); }},
        {"classifier.steady_range", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.steady_range = to_double(k, v); }},
        {"classifier.v_split", [](RunConfig& c, const std::string& k, const std::string& v) { c.simulation.classifier.v_split = to_double(k, v); }},
        {"sweep.i_min", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.i_min = to_double(k, v); }},
        {"sweep.i_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.i_max = to_double(k, v); }},
        {"sweep.step", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.step = to_double(k, v); }},
        {"sweep.resolution", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.resolution = to_double(k, v); }},
        {"sweep.workers", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.workers = to_int(k, v); }},
        {"geometry.grid_points", [](RunConfig& c, const std::string& k, const std::string& v) { c.geometry_grid_points = to_int(k, v); }},
        {"local.epsilon", [](RunConfig& c, const std::string& k, const std::string& v) { c.local_epsilon = to_double(k, v); }},
        {"local.grid_points", [](RunConfig& c, const std::string& k, const std::string& v) { c.local_grid_points = to_int(k, v); }},
        {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
    };
    return s;
}

const std::vector<std::string> kSpecialKeys = {"run.regime", "model.current", "model.ibar", "model.gamma"};

}  // namespace

std::vector<std::string> known_config_keys() {
    std::vector<std::string> keys = kSpecialKeys;
    for (const auto& [k, _] : model_setters()) keys.push_back(k);
    for (const auto& [k, _] : other_setters()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::string model_to_config(const ModelParameters& p) {
    const std::vector<std::pair<const char*, double>> rows = {
        {"model.gbar_k", p.gbar_K},   {"model.gbar_l", p.gbar_L},   {"model.e_na", p.E_Na},
        {"model.e_k", p.E_K},         {"model.e_l", p.E_L},         {"model.ibar", p.Ibar},
        {"model.gamma", p.gamma},     {"model.epsilon_mid", p.epsilon_mid},
        {"model.delta_h", p.delta_h}, {"model.delta_n", p.delta_n}, {"model.k_v", p.k_v},
        {"model.k_t", p.k_t},         {"model.c", p.C},             {"model.g_na", p.g_Na},
    };
    std::string out;
    for (const auto& [k, v] : rows) out += fmt::format("{} = {:.17g}\n", k, v);
    return out;
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::ConfigError, fmt::format("line {}: expected key = value", line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(ErrorKind::ConfigError, fmt::format("line {}: empty key or value", line_no));
        if (!kv.emplace(key, value).second) fail(ErrorKind::ConfigError, fmt::format("line {}: duplicate key {}", line_no, key));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigError, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

RunConfig build_config(const KeyValues& kv) {
    for (const auto& [k, _] : kv) {
        const bool special = std::find(kSpecialKeys.begin(), kSpecialKeys.end(), k) != kSpecialKeys.end();
        if (!special && !model_setters().count(k) && !other_setters().count(k))
            fail(ErrorKind::ConfigError, "unknown key " + k);
    }
    if (kv.count("model.current") && kv.count("model.ibar"))
        fail(ErrorKind::ConfigError, "model.current and model.ibar are mutually exclusive");

    RunConfig c;
    if (auto it = kv.find("run.regime"); it != kv.end()) c.regime = to_regime(it->second);
    c.model = regime_defaults(c.regime);
    for (const auto& [k, v] : kv) {
        if (auto it = model_setters().find(k); it != model_setters().end()) it->second(c, k, v);
        if (auto it = other_setters().find(k); it != other_setters().end()) it->second(c, k, v);
    }
    const ModelParameters& m = c.model;
    if (!(m.epsilon_mid > 0.0 && m.delta_h > 0.0 && m.delta_n > 0.0 && m.C > 0.0 && m.k_t > 0.0 && m.g_Na > 0.0 &&
          m.k_v > 0.0))
        fail(ErrorKind::ConfigError, "scale parameters must be strictly positive");
    if (!(m.gbar_K >= 0.0 && m.gbar_L >= 0.0)) fail(ErrorKind::ConfigError, "conductances must be non-negative");
    if (!(m.E_K < m.E_Na)) fail(ErrorKind::ConfigError, "model.e_k must be below model.e_na");
    c.model.gamma = c.model.small_epsilon() / c.model.epsilon_mid;
    if (auto it = kv.find("model.gamma"); it != kv.end()) c.model.gamma = to_double(it->first, it->second);
    if (!(c.model.gamma > 0.0)) fail(ErrorKind::ConfigError, "model.gamma must be strictly positive");
    c.model.refresh_timescales();

    if (auto it = kv.find("model.current"); it != kv.end()) {
        const double I = to_double(it->first, it->second);
        c.model.Ibar = rescale_current(I, c.model);
        c.notes.push_back(fmt::format("current {:.17g} uA/cm^2 -> Ibar {:.17g}", I, c.model.Ibar));
    } else if (auto it2 = kv.find("model.ibar"); it2 != kv.end()) {
        c.model.Ibar = to_double(it2->first, it2->second);
    }
    if (c.simulation.rel_tol <= 0.0 || c.simulation.abs_tol <= 0.0)
        fail(ErrorKind::ConfigError, "integrator tolerances must be positive");
    if (c.sweep.step <= 0.0 || c.sweep.resolution <= 0.0 || c.sweep.i_max < c.sweep.i_min || c.sweep.workers < 1)
        fail(ErrorKind::ConfigError, "invalid sweep settings");
    if (c.geometry_grid_points < 2 || c.local_grid_points < 2)
        fail(ErrorKind::ConfigError, "grid point counts must be at least 2");
    if (c.duration && *c.duration < 0.0) fail(ErrorKind::ConfigError, "simulate.duration must be non-negative");
    return c;
}

}  // namespace hhmmo

#pragma once

#include "hhmmo/dynamics.hpp"
#include "hhmmo/geometry.hpp"
#include "hhmmo/model_core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hhmmo {

using KeyValues = std::map<std::string, std::string>;

struct SweepSettings {
    double i_min = 5.0;  // uA/cm^2
    double i_max = 35.0;
    double step = 0.25;
    double resolution = 0.01;
    int workers = 1;
};

struct RunConfig {
    ModelParameters model;
    Regime regime = Regime::h_slow;
    std::optional<double> duration;  // simulate: fixed duration; unset = extend until classifiable
    SimulationSettings simulation;
    SweepSettings sweep;
    int geometry_grid_points = 400;
    double local_epsilon = 0.1;
    int local_grid_points = 4000;
    std::string output_dir = ".";
    std::vector<std::string> notes;  // human-readable conversions, printed to stderr by the CLI
};

// Flat "key = value" text, '#' comments. Throws ConfigError on syntax errors or duplicates.
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::string& path);

// Unknown keys, malformed numbers, or both model.current and model.ibar raise ConfigError.
RunConfig build_config(const KeyValues& kv);

std::vector<std::string> known_config_keys();

// model.* lines (17 significant digits) that build_config reads back to the same parameters.
std::string model_to_config(const ModelParameters& p);

}  // namespace hhmmo

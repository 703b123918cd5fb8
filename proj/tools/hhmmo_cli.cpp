#include "commands.hpp"

#include "hhmmo/errors.hpp"

#include <CLI11.hpp>

#include <fmt/format.h>

#include <functional>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Hodgkin-Huxley mixed-mode oscillation analysis"};
    app.require_subcommand(1);

    std::string config_path, regime, out_dir;
    std::optional<double> current;
    std::optional<int> workers;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--regime", regime, "h_slow or n_slow")->check(CLI::IsMember({"h_slow", "n_slow"}));
    app.add_option("--current", current, "applied current in uA/cm^2");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "sweep worker threads")->check(CLI::PositiveNumber);

    using Command = std::function<void(const hhmmo::RunConfig&)>;
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"geometry", "fold curves, slow manifolds, folded singularities, singular cycle", hhmmo::cli::cmd_geometry},
        {"thresholds", "current thresholds of the regime", hhmmo::cli::cmd_thresholds},
        {"simulate", "integrate and write the trajectory and its pattern", hhmmo::cli::cmd_simulate},
        {"classify", "pattern class at the configured current", hhmmo::cli::cmd_classify},
        {"sweep", "pattern classes over a current range and their boundaries", hhmmo::cli::cmd_sweep},
        {"local", "stability of the partially perturbed system along the slow curve", hhmmo::cli::cmd_local},
    };
    for (const auto& [name, help, _] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    hhmmo::RunConfig config;
    try {
        hhmmo::KeyValues kv;
        if (!config_path.empty()) kv = hhmmo::read_key_values(config_path);
        if (!regime.empty()) kv["run.regime"] = regime;
        if (current) {
            kv.erase("model.ibar");
            kv["model.current"] = fmt::format("{:.17g}", *current);
        }
        if (!out_dir.empty()) kv["output.dir"] = out_dir;
        if (workers) kv["sweep.workers"] = std::to_string(*workers);
        config = hhmmo::build_config(kv);
    } catch (const hhmmo::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    for (const auto& note : config.notes) std::cerr << note << '\n';

    for (const auto& [name, _, run] : commands) {
        if (!app.got_subcommand(name)) continue;
        try {
            run(config);
            return 0;
        } catch (const hhmmo::Error& e) {
            std::cerr << e.what() << '\n';
            return e.kind() == hhmmo::ErrorKind::ConfigError ? 2 : 3;
        } catch (const std::exception& e) {
            std::cerr << "IOError: " << e.what() << '\n';
            return 3;
        }
    }
    return 2;
}

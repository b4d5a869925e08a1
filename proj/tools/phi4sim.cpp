// Command-line front end: single runs and figure presets.
#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phi4/harness.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_io = 5;

struct Flag {
    std::string key;
    std::string help;
    std::optional<std::string> value;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrate the phi^4 wave equation and report conservation diagnostics"};
    app.set_help_all_flag("--help-all");

    std::vector<Flag> flags{
        {"scheme", "newton | bddv | msilcc | midpoint0d", {}},
        {"initial", "sine | cn (homogeneous Jacobi oscillation)", {}},
        {"amplitude", "initial amplitude A", {}},
        {"r", "quadratic coefficient of V", {}},
        {"lambda", "quartic coefficient of V", {}},
        {"r-tilde", "quadratic coefficient of the auxiliary potential", {}},
        {"lambda-tilde", "quartic coefficient of the auxiliary potential", {}},
        {"sites", "number of lattice sites N", {}},
        {"length", "spatial period L", {}},
        {"duration", "integration time in units of L", {}},
        {"record-every", "write every k-th row", {}},
        {"snapshot-every", "store the field every k rows (0 = never)", {}},
        {"tol", "cell solver residual tolerance", {}},
        {"max-iter", "cell solver iteration cap", {}},
        {"damping", "initial Levenberg-Marquardt damping", {}},
        {"overflow", "divergence bound on |phi|", {}},
        {"threads", "OpenMP threads (0 = default)", {}},
        {"out", "output file (run) or directory (preset)", {}},
        {"format", "csv | json", {}},
    };
    for (Flag& f : flags) app.add_option("--" + f.key, f.value, f.help);

    bool force = false;
    std::string preset_name;
    std::string config_path;
    bool list_presets = false;
    app.add_flag("--force", force, "overwrite existing outputs");
    app.add_option("--preset", preset_name, "run a figure preset");
    app.add_option("--config", config_path, "key=value file; command-line flags take precedence");
    app.add_flag("--list-presets", list_presets, "print preset names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    if (list_presets) {
        for (const auto& n : phi4::preset_names()) std::cout << n << '\n';
        return 0;
    }

    try {
        phi4::RunConfig cfg;
        std::map<std::string, std::string> settings;
        if (!config_path.empty()) settings = phi4::read_config_file(config_path);
        for (const Flag& f : flags)
            if (f.value) settings[f.key] = *f.value;
        if (force) settings["force"] = "true";
        if (preset_name.empty()) {
            auto it = settings.find("preset");
            if (it != settings.end()) preset_name = it->second;
        }
        settings.erase("preset");
        for (const auto& [k, v] : settings) {
            try {
                phi4::apply_setting(cfg, k, v);
            } catch (const phi4::ConfigError& e) {
                throw phi4::ConfigError(std::string("--") + k + ": " + e.what());
            }
        }
        if (!preset_name.empty()) return phi4::run_preset(preset_name, cfg, std::cerr);
        return phi4::run(cfg, std::cerr);
    } catch (const phi4::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const phi4::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return exit_io;
    }
}

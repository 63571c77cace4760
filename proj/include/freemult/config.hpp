#pragma once

#include <string>

namespace freemult {

// Runtime knobs shared by the CLI and the experiment drivers. Defaults
// match the module-level defaults; a JSON file (FREEMULT_CONFIG or
// --config) overrides them, and command-line flags override the file.
struct Config {
    int circle_grid = 2048;
    int halfline_grid = 2048;
    double fixed_point_tol = 1e-10;
    double newton_tol = 1e-12;
    int recovery_j_min = 4;
    int recovery_j_max = 12;
    std::string output_dir = ".";
    int parallelism = 1;

    void validate() const;
    std::string to_json() const;
    static Config from_json(const std::string& text);
    // FREEMULT_CONFIG points at a config file; absent -> defaults
    static Config from_environment();
};

}  // namespace freemult

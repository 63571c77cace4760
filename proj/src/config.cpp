#include "freemult/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "freemult/errors.hpp"

namespace freemult {

using nlohmann::json;

void Config::validate() const {
    if (circle_grid < 64 || halfline_grid < 64)
        throw ValidationError("config: grid sizes must be >= 64");
    if (!(fixed_point_tol > 0.0) || !(newton_tol > 0.0))
        throw ValidationError("config: tolerances must be > 0");
    if (recovery_j_min < 1 || recovery_j_max <= recovery_j_min)
        throw ValidationError("config: recovery dyadic range must increase");
    if (parallelism < 1) throw ValidationError("config: parallelism must be >= 1");
}

std::string Config::to_json() const {
    json doc;
    doc["circle_grid"] = circle_grid;
    doc["halfline_grid"] = halfline_grid;
    doc["fixed_point_tol"] = fixed_point_tol;
    doc["newton_tol"] = newton_tol;
    doc["recovery_j_min"] = recovery_j_min;
    doc["recovery_j_max"] = recovery_j_max;
    doc["output_dir"] = output_dir;
    doc["parallelism"] = parallelism;
    return doc.dump(2);
}

Config Config::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config json: ") + e.what());
    }
    Config c;
    auto get_int = [&](const char* key, int& slot) {
        if (doc.contains(key)) slot = doc.at(key).get<int>();
    };
    auto get_double = [&](const char* key, double& slot) {
        if (doc.contains(key)) slot = doc.at(key).get<double>();
    };
    get_int("circle_grid", c.circle_grid);
    get_int("halfline_grid", c.halfline_grid);
    get_double("fixed_point_tol", c.fixed_point_tol);
    get_double("newton_tol", c.newton_tol);
    get_int("recovery_j_min", c.recovery_j_min);
    get_int("recovery_j_max", c.recovery_j_max);
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
    get_int("parallelism", c.parallelism);
    c.validate();
    return c;
}

Config Config::from_environment() {
    const char* path = std::getenv("FREEMULT_CONFIG");
    if (!path || !*path) return Config{};
    std::ifstream in(path);
    if (!in) throw ValidationError(std::string("config: cannot read ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace freemult

#pragma once

// Run configuration for the CLI: one JSON object per experiment, overridable
// from the command line with --set key=value. The desk-scale defaults live
// here, in the configuration layer, not in the library.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "dendrite/io.hpp"
#include "dendrite/model.hpp"

namespace dendrite {

/// Raised for invalid or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    PhysicalParams params;
    double ell = 1.0;
    double a0 = 1.0;
    double S = 2.0;
    double M = 4.0;  ///< upper rho bound for the bounded class
    std::size_t x_cells = 2048;
    std::size_t y_cells = 2048;
    std::size_t modes = 64;
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    static RunConfig desk_defaults() {
        RunConfig cfg;  // params default-construct to the desk values
        cfg.params.G_s = 0.5;
        return cfg;
    }

    void validate() const {
        try {
            params.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (!(ell > 0.0)) throw ConfigError("config: ell must be positive");
        if (!(a0 > 0.0)) throw ConfigError("config: a0 must be positive");
        if (!(S > a0 * ell)) throw ConfigError("config: need S > a0 * ell");
        if (!(M > a0 * a0 * a0)) throw ConfigError("config: need M > a0^3");
        if (x_cells < 8 || y_cells < 8) throw ConfigError("config: need >= 8 cells");
        if (modes == 0) throw ConfigError("config: need modes >= 1");
        if (modes >= x_cells) throw ConfigError("config: need modes < x_cells");
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig cfg = desk_defaults();
        try {
            for (const char* key : {"R_a", "C_m", "G_m", "G_s", "A_s"})
                if (j.contains(key)) cfg.set(key, j.at(key).get<double>());
            if (j.contains("ell")) cfg.ell = j.at("ell").get<double>();
            if (j.contains("a0")) cfg.a0 = j.at("a0").get<double>();
            if (j.contains("S")) cfg.S = j.at("S").get<double>();
            if (j.contains("M")) cfg.M = j.at("M").get<double>();
            if (j.contains("x_cells")) cfg.x_cells = j.at("x_cells").get<std::size_t>();
            if (j.contains("y_cells")) cfg.y_cells = j.at("y_cells").get<std::size_t>();
            if (j.contains("modes")) cfg.modes = j.at("modes").get<std::size_t>();
            if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        return cfg;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: parse error in ") + path + ": " +
                              e.what());
        }
        return from_json(j);
    }

    /// Apply one `key=value` override.
    void set(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: --set expects key=value, got '" + assignment + "'");
        set(assignment.substr(0, eq), assignment.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) {
        try {
            if (key == "out_dir") { out_dir = value; return; }
            if (key == "seed") { seed = std::stoull(value); return; }
            if (key == "x_cells") { x_cells = std::stoul(value); return; }
            if (key == "y_cells") { y_cells = std::stoul(value); return; }
            if (key == "modes") { modes = std::stoul(value); return; }
            set(key, std::stod(value));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config: bad value for " + key + ": '" + value + "'");
        }
    }

    void set(const std::string& key, double value) {
        if (key == "R_a") params.R_a = value;
        else if (key == "C_m") params.C_m = value;
        else if (key == "G_m") params.G_m = value;
        else if (key == "G_s") params.G_s = value;
        else if (key == "A_s") params.A_s = value;
        else if (key == "ell") ell = value;
        else if (key == "a0") a0 = value;
        else if (key == "S") S = value;
        else if (key == "M") M = value;
        else throw ConfigError("config: unknown key '" + key + "'");
    }

    nlohmann::json to_json() const {
        nlohmann::json j = io::params_to_json(params);
        j["ell"] = ell;
        j["a0"] = a0;
        j["S"] = S;
        j["M"] = M;
        j["x_cells"] = x_cells;
        j["y_cells"] = y_cells;
        j["modes"] = modes;
        j["seed"] = seed;
        j["out_dir"] = out_dir;
        return j;
    }
};

}  // namespace dendrite

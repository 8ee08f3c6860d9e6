#pragma once

// File formats: taper profiles as `x,a` CSV, parameter sets as JSON, and the
// CSV/JSON report writers shared by the CLI. Numbers are printed with 17
// significant digits so identical runs produce byte-identical outputs.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dendrite/model.hpp"

namespace dendrite::io {

/// Shortest-lossless decimal: 17 significant digits round-trip any double.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline void write_taper_csv(const std::string& path, const TaperProfile& a) {
    std::vector<std::vector<double>> rows;
    rows.reserve(a.nodes().size());
    for (std::size_t i = 0; i < a.nodes().size(); ++i)
        rows.push_back({a.nodes()[i], a.radii()[i]});
    write_csv(path, "x,a", rows);
}

inline TaperProfile read_taper_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_taper_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,a", 0) != 0)
        throw std::runtime_error("read_taper_csv: expected header 'x,a' in " + path);
    std::vector<double> x, a;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_taper_csv: malformed row '" + line + "'");
        x.push_back(std::stod(line.substr(0, comma)));
        a.push_back(std::stod(line.substr(comma + 1)));
    }
    return TaperProfile(std::move(x), std::move(a));
}

inline PhysicalParams params_from_json(const nlohmann::json& j) {
    PhysicalParams p;
    p.R_a = j.at("R_a").get<double>();
    p.C_m = j.at("C_m").get<double>();
    p.G_m = j.at("G_m").get<double>();
    p.G_s = j.at("G_s").get<double>();
    p.A_s = j.at("A_s").get<double>();
    p.validate();
    return p;
}

inline nlohmann::json params_to_json(const PhysicalParams& p) {
    return {{"R_a", p.R_a}, {"C_m", p.C_m}, {"G_m", p.G_m},
            {"G_s", p.G_s}, {"A_s", p.A_s}};
}

}  // namespace dendrite::io

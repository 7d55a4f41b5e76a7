#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pshlab {

// All tunable defaults in one place. A config file or CLI flag may override
// any of them; reports echo the values actually used.
struct Defaults {
    double value_cap = 1.0e6;          // saturation cap (fixed, documented)
    double psh_tol_cells = 2.0;        // tol_psh = psh_tol_cells * h^2
    double tol_fix_scale = 1e-9;       // envelope fixed-point tolerance scale
    double tol_fix_scale_large = 1e-6; // used on grids above the fast-node budget
    std::size_t large_grid_nodes = 100000;
    double eps_tame_scale = 1e-3;
    double tol_prop_scale = 1e-3;
    double tol_lp = 1e-8;
    double toric_depth = 8.0;
    std::vector<double> lambda_ladder{1, 2, 4, 8, 16, 32};
    std::vector<double> lelong_radii{0.7, 0.4, 0.2};
    double trend_ratio = 1.5;          // divergence classifier threshold
};

inline const Defaults& defaults() {
    static const Defaults d;
    return d;
}

enum class Command { RunCase, Suite, Ladder, DualitySweep, List };

struct RunConfig {
    Command command = Command::List;
    std::vector<std::string> cases;
    std::vector<int> resolutions;
    std::vector<double> lambda_ladder;   // empty -> per-case choice
    std::string suite_name = "prop-basic";
    std::string domain = "Disc1D";
    int samples = 20;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    double tol_lp = defaults().tol_lp;
    int workers = 1;
};

// Minimal key = value / [section] reader for run configs.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse(std::istream& in) {
        ConfigFile cf;
        std::string line, section;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            if (line.front() == '[' && line.back() == ']') {
                section = line.substr(1, line.size() - 2);
                cf.sections[section];
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: expected key = value: " + line);
            auto trim = [](std::string s) {
                auto a = s.find_first_not_of(" \t");
                auto b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            cf.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return cf;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config " + path);
        return parse(in);
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const {
        auto s = sections.find(section);
        if (s == sections.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }
};

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace pshlab

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamlab/grid.hpp"

namespace yamlab {

/// Raised for malformed configs / unknown scenarios; the CLI maps it to
/// the usage exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Warp presets: "const:c" or "sin:a,b" meaning a + b*sin(t).
struct RhoPreset {
    enum class Kind { Const, Sin } kind = Kind::Const;
    double a = 1.0;
    double b = 0.0;

    static RhoPreset parse(const std::string& text) {
        RhoPreset p;
        auto colon = text.find(':');
        std::string name = text.substr(0, colon);
        std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
        try {
            if (name == "const") {
                p.kind = Kind::Const;
                p.a = std::stod(args);
            } else if (name == "sin") {
                p.kind = Kind::Sin;
                auto comma = args.find(',');
                if (comma == std::string::npos) throw ConfigError("sin preset needs a,b");
                p.a = std::stod(args.substr(0, comma));
                p.b = std::stod(args.substr(comma + 1));
            } else {
                throw ConfigError("unknown rho preset: " + text);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("bad rho preset: " + text);
        }
        return p;
    }

    double operator()(double t) const {
        return kind == Kind::Const ? a : a + b * std::sin(t);
    }

    std::vector<double> sample(const AxisGrid& axis) const {
        std::vector<double> out(axis.cells());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(axis.coord[i]);
        return out;
    }

    std::string describe() const {
        return kind == Kind::Const ? "const:" + std::to_string(a)
                                   : "sin:" + std::to_string(a) + "," + std::to_string(b);
    }
};

struct ScenarioConfig {
    std::string scenario;
    std::string out_path;          // empty = no CSV file
    std::uint64_t seed = 1234567;  // battery / restart randomness
    int res = 0;                   // primary resolution override, 0 = scenario default
    int res_fiber = 0;             // fiber resolution override
    int trials = 0;                // battery size override
    int restarts = -1;             // random restarts override, -1 = scenario default
    std::string rho;               // warp preset override, empty = scenario default
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace detail

/// Line-based `key = value` text, `#` starts a comment. Unknown keys
/// are rejected so typos fail loudly.
inline void apply_config_text(ScenarioConfig& cfg, const std::string& text) {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        try {
            if (key == "scenario") cfg.scenario = value;
            else if (key == "out") cfg.out_path = value;
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "res") cfg.res = std::stoi(value);
            else if (key == "res_fiber") cfg.res_fiber = std::stoi(value);
            else if (key == "trials") cfg.trials = std::stoi(value);
            else if (key == "restarts") cfg.restarts = std::stoi(value);
            else if (key == "rho") { RhoPreset::parse(value); cfg.rho = value; }
            else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
}

}  // namespace yamlab

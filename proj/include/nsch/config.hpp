#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nsch/errors.hpp"

namespace nsch {

/// Initial-profile request: a preset name plus numeric arguments.
///   constant <value>
///   tanh <x0> <w>                    phi = tanh((x - x0)/w)
///   random <base> <amp> <seed>       base + amp * band-limited noise
///   zero                             (velocity)
///   taylor_green <grad_norm>         projected vortex, ||grad u|| rescaled
struct ProfileSpec {
    std::string kind;
    std::vector<double> args;
};

struct GridConfig {
    int nx = 64, ny = 64;
    double lx = 1.0, ly = 1.0;
};

struct FluidsConfig {
    double nu1 = 0.1, nu2 = 0.1;
    double eps0 = 1.0;
    ProfileSpec rho_profile{"constant", {1.0}};
    ProfileSpec phi_profile{"constant", {1.0}};
    ProfileSpec u_profile{"zero", {}};
};

struct SchemeConfig {
    bool auto_dt = true;
    double dt = 0.0;  // used when auto_dt is false
    double stabilization = 2.0;
    double proj_tol = 1e-10;
    double ch_tol = 1e-9;
    int max_iter = 50000;
    double serrin_r = 12.0;
    double t_end = 1.0;
};

struct OutputConfig {
    std::string directory = "out";
    int series_every = 1;
    int snapshot_every = 0;    // 0: initial and final only
    int checkpoint_every = 0;  // 0: final only
};

struct Config {
    GridConfig grid;
    FluidsConfig fluids;
    SchemeConfig scheme;
    OutputConfig output;
    std::optional<unsigned long long> seed_override;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_real(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line) + ": key '" + key +
                           "' expects a real number, got '" + v + "'");
    }
}

inline int parse_int(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(x);
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line) + ": key '" + key +
                           "' expects an integer, got '" + v + "'");
    }
}

inline ProfileSpec parse_profile(const std::string& v, const std::string& key, int line) {
    std::istringstream is(v);
    ProfileSpec p;
    if (!(is >> p.kind))
        throw config_error("line " + std::to_string(line) + ": key '" + key +
                           "' expects a profile spec");
    std::string tok;
    while (is >> tok) p.args.push_back(parse_real(tok, key, line));
    return p;
}

}  // namespace detail

/// Parse and fully validate an INI-style configuration file. Unknown
/// sections or keys are errors; every numeric field is range-checked.
inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");

    Config cfg;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const std::size_t cpos = s.find_first_of("#;");
        if (cpos != std::string::npos) s = s.substr(0, cpos);
        s = detail::trim(s);
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']')
                throw config_error("line " + std::to_string(line) + ": malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (section != "grid" && section != "fluids" && section != "scheme" &&
                section != "output")
                throw config_error("line " + std::to_string(line) + ": unknown section [" +
                                   section + "]");
            continue;
        }

        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw config_error("line " + std::to_string(line) + ": expected 'key = value'");

        if (section == "grid") {
            if (key == "nx") cfg.grid.nx = detail::parse_int(val, key, line);
            else if (key == "ny") cfg.grid.ny = detail::parse_int(val, key, line);
            else if (key == "lx") cfg.grid.lx = detail::parse_real(val, key, line);
            else if (key == "ly") cfg.grid.ly = detail::parse_real(val, key, line);
            else throw config_error("line " + std::to_string(line) + ": unknown key '" + key +
                                    "' in [grid]");
        } else if (section == "fluids") {
            if (key == "nu1") cfg.fluids.nu1 = detail::parse_real(val, key, line);
            else if (key == "nu2") cfg.fluids.nu2 = detail::parse_real(val, key, line);
            else if (key == "eps0") cfg.fluids.eps0 = detail::parse_real(val, key, line);
            else if (key == "rho_profile") cfg.fluids.rho_profile = detail::parse_profile(val, key, line);
            else if (key == "phi_profile") cfg.fluids.phi_profile = detail::parse_profile(val, key, line);
            else if (key == "u_profile") cfg.fluids.u_profile = detail::parse_profile(val, key, line);
            else throw config_error("line " + std::to_string(line) + ": unknown key '" + key +
                                    "' in [fluids]");
        } else if (section == "scheme") {
            if (key == "dt") {
                if (val == "auto") {
                    cfg.scheme.auto_dt = true;
                } else {
                    cfg.scheme.auto_dt = false;
                    cfg.scheme.dt = detail::parse_real(val, key, line);
                }
            } else if (key == "stabilization") cfg.scheme.stabilization = detail::parse_real(val, key, line);
            else if (key == "proj_tol") cfg.scheme.proj_tol = detail::parse_real(val, key, line);
            else if (key == "ch_tol") cfg.scheme.ch_tol = detail::parse_real(val, key, line);
            else if (key == "max_iter") cfg.scheme.max_iter = detail::parse_int(val, key, line);
            else if (key == "serrin_r") cfg.scheme.serrin_r = detail::parse_real(val, key, line);
            else if (key == "t_end") cfg.scheme.t_end = detail::parse_real(val, key, line);
            else throw config_error("line " + std::to_string(line) + ": unknown key '" + key +
                                    "' in [scheme]");
        } else if (section == "output") {
            if (key == "directory") cfg.output.directory = val;
            else if (key == "series_every") cfg.output.series_every = detail::parse_int(val, key, line);
            else if (key == "snapshot_every") cfg.output.snapshot_every = detail::parse_int(val, key, line);
            else if (key == "checkpoint_every") cfg.output.checkpoint_every = detail::parse_int(val, key, line);
            else throw config_error("line " + std::to_string(line) + ": unknown key '" + key +
                                    "' in [output]");
        } else {
            throw config_error("line " + std::to_string(line) + ": key outside of any section");
        }
    }

    // range validation
    if (cfg.grid.nx < 4) throw config_error("grid.nx must be >= 4");
    if (cfg.grid.ny < 4) throw config_error("grid.ny must be >= 4");
    if (!(cfg.grid.lx > 0.0)) throw config_error("grid.lx must be positive");
    if (!(cfg.grid.ly > 0.0)) throw config_error("grid.ly must be positive");
    if (!(cfg.fluids.nu1 > 0.0)) throw config_error("fluids.nu1 must be positive");
    if (!(cfg.fluids.nu2 > 0.0)) throw config_error("fluids.nu2 must be positive");
    if (!(cfg.fluids.eps0 > 0.0)) throw config_error("fluids.eps0 must be positive");
    if (!cfg.scheme.auto_dt && !(cfg.scheme.dt > 0.0))
        throw config_error("scheme.dt must be positive or 'auto'");
    if (cfg.scheme.stabilization < 0.0)
        throw config_error("scheme.stabilization must be non-negative");
    if (!(cfg.scheme.proj_tol > 0.0)) throw config_error("scheme.proj_tol must be positive");
    if (!(cfg.scheme.ch_tol > 0.0)) throw config_error("scheme.ch_tol must be positive");
    if (cfg.scheme.max_iter < 1) throw config_error("scheme.max_iter must be >= 1");
    if (!(cfg.scheme.serrin_r > 6.0))
        throw config_error("scheme.serrin_r must be > 6: the blow-up functional uses the "
                           "time exponent 4r/(r-6), which is undefined for r <= 6");
    if (cfg.scheme.t_end < 0.0) throw config_error("scheme.t_end must be non-negative");
    if (cfg.output.series_every < 1) throw config_error("output.series_every must be >= 1");
    if (cfg.output.snapshot_every < 0) throw config_error("output.snapshot_every must be >= 0");
    if (cfg.output.checkpoint_every < 0)
        throw config_error("output.checkpoint_every must be >= 0");
    return cfg;
}

}  // namespace nsch

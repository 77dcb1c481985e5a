// Command-line front end: run a simulation, requadrature the blow-up
// accumulator from a series file, or check a series against the decay
// envelope. Exit codes: 0 success, 1 usage/config error, 2 numerical
// failure, 3 violated check.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "nsch/driver.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir,
            const std::optional<double>& t_end, const std::optional<long long>& seed) {
    nsch::Config cfg = nsch::load_config(config_path);
    if (out_dir) cfg.output.directory = *out_dir;
    if (t_end) {
        if (*t_end < 0.0) throw nsch::config_error("--t-end must be non-negative");
        cfg.scheme.t_end = *t_end;
    }
    if (seed) cfg.seed_override = static_cast<unsigned long long>(*seed);
    return nsch::run(cfg);
}

int cmd_diag(const std::string& series_path, double r) {
    const auto rows = nsch::read_series(series_path);
    const double stored = rows.back().serrin_acc;
    const double recomputed = nsch::recompute_serrin(rows, r);
    std::cout << "rows = " << rows.size() << '\n'
              << "serrin exponent 4r/(r-6) = " << nsch::format_real(nsch::serrin_exponent(r))
              << '\n'
              << "stored accumulator    = " << nsch::format_real(stored) << '\n'
              << "recomputed from rows  = " << nsch::format_real(recomputed) << '\n';
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (!(rows[k].serrin_acc >= rows[k - 1].serrin_acc)) {
            std::cerr << "violation: serrin_acc decreases at row " << k << '\n';
            return 3;
        }
        if (!std::isfinite(rows[k].serrin_acc)) {
            std::cerr << "violation: serrin_acc is not finite at row " << k << '\n';
            return 3;
        }
    }
    std::cout << "serrin_acc column is finite and non-decreasing\n";
    return 0;
}

int cmd_check_decay(const std::string& series_path, double eps0, double c0, double nu_star) {
    const auto rows = nsch::read_series(series_path);
    const nsch::EnvelopeCheck ec = nsch::check_decay_envelope(rows, eps0, c0, nu_star);
    std::cout << "a0 = " << nsch::format_real(ec.a0) << '\n'
              << "floor (a0/4 * mass0) = " << nsch::format_real(ec.floor) << '\n'
              << "c fitted at t = 0    = " << nsch::format_real(ec.c_fit) << '\n';
    if (!ec.pass) {
        const auto& row = rows[ec.first_violation];
        std::cerr << "violation: E(t) exceeds the envelope at t = " << nsch::format_real(row.t)
                  << " (E = " << nsch::format_real(row.energy) << ")\n";
        return 3;
    }
    std::cout << "E(t) stays below the envelope on all " << rows.size() << " rows\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonhomogeneous Navier-Stokes-Cahn-Hilliard desk simulator"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run a simulation from a config file");
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<double> t_end;
    std::optional<long long> seed;
    run_cmd->add_option("--config", config_path, "path to INI config")->required();
    run_cmd->add_option("--out", out_dir, "override output directory");
    run_cmd->add_option("--t-end", t_end, "override end time");
    run_cmd->add_option("--seed", seed, "override the seed of random profiles");

    auto* diag_cmd =
        app.add_subcommand("diag", "recompute the blow-up accumulator from a series file");
    std::string diag_series;
    double diag_r = 0.0;
    diag_cmd->add_option("--series", diag_series, "path to series.csv")->required();
    diag_cmd->add_option("--r", diag_r, "Lebesgue exponent r > 6")->required();

    auto* decay_cmd =
        app.add_subcommand("check-decay", "check a series against the decay envelope");
    std::string decay_series;
    double eps0 = 0.0, c0 = 0.0, nu_star = 0.0;
    decay_cmd->add_option("--series", decay_series, "path to series.csv")->required();
    decay_cmd->add_option("--eps0", eps0, "smallness quantity of the initial data")->required();
    decay_cmd->add_option("--c0", c0, "constant C0 in the a0 formula")->required();
    decay_cmd->add_option("--nu-star", nu_star, "lower viscosity bound nu_*")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, out_dir, t_end, seed);
        if (diag_cmd->parsed()) return cmd_diag(diag_series, diag_r);
        if (decay_cmd->parsed()) return cmd_check_decay(decay_series, eps0, c0, nu_star);
    } catch (const nsch::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const nsch::contract_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nsch/cahn_hilliard.hpp"
#include "nsch/config.hpp"
#include "nsch/diagnostics.hpp"
#include "nsch/initial.hpp"
#include "nsch/momentum.hpp"
#include "nsch/transport.hpp"

namespace nsch {

// ---------------------------------------------------------------------------
// coupled step
// ---------------------------------------------------------------------------

/// Largest dt the explicit pieces admit, with a 0.9 safety factor:
/// advective CFL, the viscous bound, and a capillary bound
/// 0.25 min(h)^2 sqrt(min rho).
inline double auto_dt(const State& s, const ViscosityLaw& law) {
    const Grid& g = s.rho.grid;
    const double h = std::min(g.hx, g.hy);
    const double capillary = 0.25 * h * h * std::sqrt(s.rho.min_value());
    return 0.9 * std::min({advective_cfl_dt(s.u), viscous_cfl_dt(s.rho, law, g), capillary});
}

struct StepResult {
    State state;
    DiagRecord diag;
};

/// One operator-split step, in this fixed order:
///   1. density transport with u^n
///   2. Cahn-Hilliard with rho^{n+1}, u^n
///   3. explicit momentum predictor with phi^{n+1}, mu^{n+1}
///   4. pressure projection
///   5. diagnostics; the blow-up accumulator adds the left-endpoint
///      contribution dt ||u^n||^q.
inline StepResult step(const State& s, const Config& cfg, double dt, double serrin_prev) {
    const ViscosityLaw law(cfg.fluids.nu1, cfg.fluids.nu2);

    State next;
    next.rho = density_step(s.rho, s.u, dt);

    ChParams chp(cfg.scheme.stabilization, cfg.scheme.ch_tol, cfg.scheme.max_iter);
    ChResult ch = ch_step(next.rho, s.u, s.phi, dt, chp);
    next.phi = std::move(ch.phi);
    next.mu = std::move(ch.mu);

    State mid;
    mid.t = s.t;
    mid.rho = next.rho;
    mid.u = s.u;
    mid.p = s.p;
    mid.phi = next.phi;
    mid.mu = next.mu;
    VectorField u_star = predictor_step(mid, law, dt);

    ProjectResult pr = project(next.rho, u_star, dt, cfg.scheme.proj_tol,
                               cfg.scheme.max_iter, &s.p);
    next.u = std::move(pr.u);
    next.p = std::move(pr.p);
    next.t = s.t + dt;

    const double acc = serrin_accumulate(serrin_prev, s.u, cfg.scheme.serrin_r, dt);
    StepResult out;
    out.diag = make_diag_record(next, law, cfg.scheme.serrin_r, acc);
    out.state = std::move(next);
    return out;
}

inline StepResult step(const State& s, const Config& cfg, double serrin_prev = 0.0) {
    const ViscosityLaw law(cfg.fluids.nu1, cfg.fluids.nu2);
    const double dt = cfg.scheme.auto_dt ? auto_dt(s, law) : cfg.scheme.dt;
    return step(s, cfg, dt, serrin_prev);
}

// ---------------------------------------------------------------------------
// text output: decimal with 17 significant digits, LF line endings
// ---------------------------------------------------------------------------

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline constexpr const char* series_header =
    "t,E,D,mass,rho_min,rho_max,grad_u_l2,grad_mu_l2,lr_norm_u,serrin_acc,divu_max,"
    "rho_phi_total";

inline void write_series_row(std::ostream& os, const DiagRecord& d) {
    os << format_real(d.t) << ',' << format_real(d.energy) << ',' << format_real(d.dissipation)
       << ',' << format_real(d.mass) << ',' << format_real(d.rho_min) << ','
       << format_real(d.rho_max) << ',' << format_real(d.grad_u_l2) << ','
       << format_real(d.grad_mu_l2) << ',' << format_real(d.lr_norm_u) << ','
       << format_real(d.serrin_acc) << ',' << format_real(d.divu_max) << ','
       << format_real(d.rho_phi_total) << '\n';
}

inline void write_snapshot(const std::string& path, const State& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot write snapshot '" + path + "'");
    os << "i,j,x,y,rho,u,v,p,phi,mu\n";
    const Grid& g = s.rho.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double uc = 0.5 * (s.u.u_at(i, j) + s.u.u_at(i + 1, j));
            const double vc = 0.5 * (s.u.v_at(i, j) + s.u.v_at(i, j + 1));
            os << i << ',' << j << ',' << format_real(g.xc(i)) << ',' << format_real(g.yc(j))
               << ',' << format_real(s.rho(i, j)) << ',' << format_real(uc) << ','
               << format_real(vc) << ',' << format_real(s.p(i, j)) << ','
               << format_real(s.phi(i, j)) << ',' << format_real(s.mu(i, j)) << '\n';
        }
}

// ---------------------------------------------------------------------------
// binary checkpoints (bit-exact round trip)
// ---------------------------------------------------------------------------

inline void save_state(const std::string& path, const State& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot write checkpoint '" + path + "'");
    const char magic[8] = {'N', 'S', 'C', 'H', 'S', 'T', 'A', '1'};
    os.write(magic, 8);
    const Grid& g = s.rho.grid;
    const std::int32_t dims[2] = {g.nx, g.ny};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    const double geom[3] = {g.lx, g.ly, s.t};
    os.write(reinterpret_cast<const char*>(geom), sizeof(geom));
    auto dump = [&os](const std::vector<double>& v) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    dump(s.rho.v);
    dump(s.u.u);
    dump(s.u.v);
    dump(s.p.v);
    dump(s.phi.v);
    dump(s.mu.v);
    if (!os) throw config_error("short write on checkpoint '" + path + "'");
}

inline State load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open checkpoint '" + path + "'");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "NSCHSTA1")
        throw config_error("'" + path + "' is not a checkpoint file");
    std::int32_t dims[2];
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    double geom[3];
    is.read(reinterpret_cast<char*>(geom), sizeof(geom));
    if (!is) throw config_error("truncated checkpoint '" + path + "'");
    const Grid g(dims[0], dims[1], geom[0], geom[1]);

    State s;
    s.t = geom[2];
    s.rho = ScalarField(g);
    s.u = VectorField(g);
    s.p = ScalarField(g, BoundaryKind::neumann_zero);
    s.phi = ScalarField(g, BoundaryKind::neumann_zero);
    s.mu = ScalarField(g, BoundaryKind::neumann_zero);
    auto slurp = [&is, &path](std::vector<double>& v) {
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!is) throw config_error("truncated checkpoint '" + path + "'");
    };
    slurp(s.rho.v);
    slurp(s.u.u);
    slurp(s.u.v);
    slurp(s.p.v);
    slurp(s.phi.v);
    slurp(s.mu.v);
    return s;
}

// ---------------------------------------------------------------------------
// series files
// ---------------------------------------------------------------------------

inline std::vector<DiagRecord> read_series(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open series file '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw config_error("empty series file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != series_header)
        throw config_error("'" + path + "' does not look like a series file (bad header)");
    std::vector<DiagRecord> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double f[12];
        std::size_t pos = 0;
        for (int k = 0; k < 12; ++k) {
            const std::size_t next = line.find(',', pos);
            const std::string tok = line.substr(pos, next == std::string::npos
                                                         ? std::string::npos
                                                         : next - pos);
            try {
                f[k] = std::stod(tok);
            } catch (const std::exception&) {
                throw config_error(path + ": line " + std::to_string(lineno) +
                                   ": bad numeric field");
            }
            if (k < 11) {
                if (next == std::string::npos)
                    throw config_error(path + ": line " + std::to_string(lineno) +
                                       ": too few fields");
                pos = next + 1;
            }
        }
        DiagRecord d;
        d.t = f[0];
        d.energy = f[1];
        d.dissipation = f[2];
        d.mass = f[3];
        d.rho_min = f[4];
        d.rho_max = f[5];
        d.grad_u_l2 = f[6];
        d.grad_mu_l2 = f[7];
        d.lr_norm_u = f[8];
        d.serrin_acc = f[9];
        d.divu_max = f[10];
        d.rho_phi_total = f[11];
        rows.push_back(d);
    }
    if (rows.empty()) throw config_error("series file '" + path + "' has no rows");
    return rows;
}

/// Left-endpoint requadrature of the blow-up integral from the lr_norm_u
/// column. Reproduces the run's accumulator exactly when every step was
/// recorded.
inline double recompute_serrin(const std::vector<DiagRecord>& rows, double r) {
    const double q = serrin_exponent(r);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        acc += (rows[k + 1].t - rows[k].t) * std::pow(rows[k].lr_norm_u, q);
    return acc;
}

struct EnvelopeCheck {
    double eps0 = 0.0;
    double c0 = 0.0;
    double nu_star = 0.0;
    double a0 = 0.0;
    double floor = 0.0;   // (a0/4) * initial mass
    double c_fit = 0.0;   // envelope matched to E at t = 0
    bool pass = false;
    std::size_t first_violation = 0;
};

/// Fit the free constant at t = 0, then require
/// E(t) <= c eps0 exp(-a0 t) + floor on every row.
inline EnvelopeCheck check_decay_envelope(const std::vector<DiagRecord>& rows, double eps0,
                                          double c0, double nu_star) {
    EnvelopeCheck ec;
    ec.eps0 = eps0;
    ec.c0 = c0;
    ec.nu_star = nu_star;
    ec.a0 = a0_coefficient(nu_star, c0, eps0);
    ec.floor = 0.25 * ec.a0 * rows.front().mass;
    ec.c_fit = (rows.front().energy - ec.floor) / eps0;
    ec.pass = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double env = decay_envelope(rows[k].t, ec.c_fit, eps0, ec.a0, rows.front().mass);
        if (rows[k].energy > env + 1e-12 * std::max(1.0, std::abs(env))) {
            ec.pass = false;
            ec.first_violation = k;
            break;
        }
    }
    return ec;
}

// ---------------------------------------------------------------------------
// full run
// ---------------------------------------------------------------------------

/// Time-march to t_end, writing series.csv, snapshots, checkpoints and
/// summary.txt under cfg.output.directory. Returns a process exit status:
/// 0 on success, 2 on numerical failure (the last checkpoint stays valid).
inline int run(const Config& cfg, std::ostream& log = std::cout) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream series(dir / "series.csv", std::ios::binary);
    if (!series)
        throw config_error("output directory '" + cfg.output.directory + "' is not writable");
    series << series_header << '\n';

    InitialData init = build_initial(cfg);
    const ViscosityLaw law(cfg.fluids.nu1, cfg.fluids.nu2);
    log << "smallness: quantity = " << format_real(init.smallness.quantity)
        << ", target eps0 = " << format_real(init.smallness.eps0_target) << " -> "
        << (init.smallness.pass ? "pass" : "warn (initial data is not small)") << '\n';

    State s = std::move(init.state);
    std::vector<DiagRecord> written;
    write_series_row(series, init.diag);
    written.push_back(init.diag);
    write_snapshot((dir / "snap_0.csv").string(), s);

    DiagRecord last = init.diag;
    bool last_written = true;
    long step_index = 0;
    const double t_end = cfg.scheme.t_end;
    const double t_eps = 1e-9 * std::max(1.0, t_end);

    try {
        while (t_end - s.t > t_eps) {
            double dt = cfg.scheme.auto_dt ? auto_dt(s, law) : cfg.scheme.dt;
            dt = std::min(dt, t_end - s.t);
            StepResult r = step(s, cfg, dt, last.serrin_acc);
            if (r.diag.serrin_acc < last.serrin_acc)
                throw std::runtime_error("driver: blow-up accumulator decreased");
            s = std::move(r.state);
            last = r.diag;
            ++step_index;

            last_written = (step_index % cfg.output.series_every == 0);
            if (last_written) {
                write_series_row(series, last);
                written.push_back(last);
            }
            if (cfg.output.snapshot_every > 0 && step_index % cfg.output.snapshot_every == 0)
                write_snapshot((dir / ("snap_" + std::to_string(step_index) + ".csv")).string(), s);
            if (cfg.output.checkpoint_every > 0 && step_index % cfg.output.checkpoint_every == 0)
                save_state((dir / "checkpoint.dat").string(), s);
        }
    } catch (const std::exception& e) {
        log.flush();
        std::cerr << "run failed at t = " << format_real(s.t) << ": " << e.what() << '\n';
        return 2;
    }

    if (!last_written) {
        write_series_row(series, last);
        written.push_back(last);
    }
    series.flush();
    if (step_index > 0)
        write_snapshot((dir / ("snap_" + std::to_string(step_index) + ".csv")).string(), s);
    save_state((dir / "checkpoint.dat").string(), s);

    const EnvelopeCheck env =
        check_decay_envelope(written, init.smallness.quantity, 1.0, law.nu_star());

    {
        std::ofstream sum(dir / "summary.txt", std::ios::binary);
        sum << "t_end = " << format_real(s.t) << '\n'
            << "steps = " << step_index << '\n'
            << "smallness = " << format_real(init.smallness.quantity) << '\n'
            << "eps0_target = " << format_real(init.smallness.eps0_target) << '\n'
            << "smallness_pass = " << (init.smallness.pass ? 1 : 0) << '\n'
            << "nu_star = " << format_real(law.nu_star()) << '\n'
            << "E0 = " << format_real(written.front().energy) << '\n'
            << "E_end = " << format_real(last.energy) << '\n'
            << "serrin_acc = " << format_real(last.serrin_acc) << '\n'
            << "a0 = " << format_real(env.a0) << '\n'
            << "envelope_floor = " << format_real(env.floor) << '\n'
            << "envelope_c = " << format_real(env.c_fit) << '\n'
            << "envelope_pass = " << (env.pass ? 1 : 0) << '\n';
    }

    log << "done: t = " << format_real(s.t) << ", steps = " << step_index
        << ", serrin_acc = " << format_real(last.serrin_acc)
        << ", E(t_end) = " << format_real(last.energy)
        << ", envelope = " << (env.pass ? "pass" : "VIOLATED") << '\n';
    return 0;
}

}  // namespace nsch

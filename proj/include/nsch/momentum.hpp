#pragma once

#include <sstream>
#include <vector>

#include "nsch/elliptic.hpp"
#include "nsch/materials.hpp"
#include "nsch/operators.hpp"

namespace nsch {

// Staggered-stencil momentum pieces. Cell-corner (node) quantities use one
// ghost layer consistent with no-slip walls: tangential velocities reflect
// oddly, normal faces are identically zero.

namespace detail {

inline std::size_t nidx(const Grid& g, int i, int j) {
    return static_cast<std::size_t>(j) * (g.nx + 1) + i;
}

/// du/dy at nodes, odd wall reflection.
inline std::vector<double> dudy_nodes(const VectorField& w) {
    const Grid& g = w.grid;
    std::vector<double> out(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double hi = j < g.ny ? w.u_at(i, j) : -w.u_at(i, g.ny - 1);
            const double lo = j > 0 ? w.u_at(i, j - 1) : -w.u_at(i, 0);
            out[nidx(g, i, j)] = (hi - lo) / g.hy;
        }
    return out;
}

/// dv/dx at nodes, odd wall reflection.
inline std::vector<double> dvdx_nodes(const VectorField& w) {
    const Grid& g = w.grid;
    std::vector<double> out(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double hi = i < g.nx ? w.v_at(i, j) : -w.v_at(g.nx - 1, j);
            const double lo = i > 0 ? w.v_at(i - 1, j) : -w.v_at(0, j);
            out[nidx(g, i, j)] = (hi - lo) / g.hx;
        }
    return out;
}

/// Average of the adjacent cell values at each node.
inline std::vector<double> centers_to_nodes(const ScalarField& f) {
    const Grid& g = f.grid;
    std::vector<double> out(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double s = 0.0;
            int n = 0;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci >= 0 && ci < g.nx && cj >= 0 && cj < g.ny) {
                        s += f(ci, cj);
                        ++n;
                    }
                }
            out[nidx(g, i, j)] = s / n;
        }
    return out;
}

/// div(nu(phi) D u) with D u = (grad u + grad u^T)/2, evaluated at interior
/// faces. Its discrete work against u is -sum nu |D u|^2 up to the wall
/// stress rows.
inline VectorField viscous_force(const VectorField& w, const ScalarField& nu_c) {
    const Grid& g = w.grid;
    ScalarField txx(g), tyy(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            txx(i, j) = nu_c(i, j) * (w.u_at(i + 1, j) - w.u_at(i, j)) / g.hx;
            tyy(i, j) = nu_c(i, j) * (w.v_at(i, j + 1) - w.v_at(i, j)) / g.hy;
        }
    const std::vector<double> uy = dudy_nodes(w);
    const std::vector<double> vx = dvdx_nodes(w);
    const std::vector<double> nu_n = centers_to_nodes(nu_c);
    std::vector<double> txy(uy.size());
    for (std::size_t k = 0; k < txy.size(); ++k)
        txy[k] = 0.5 * nu_n[k] * (uy[k] + vx[k]);

    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.u_at(i, j) = (txx(i, j) - txx(i - 1, j)) / g.hx +
                             (txy[nidx(g, i, j + 1)] - txy[nidx(g, i, j)]) / g.hy;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.v_at(i, j) = (txy[nidx(g, i + 1, j)] - txy[nidx(g, i, j)]) / g.hx +
                             (tyy(i, j) - tyy(i, j - 1)) / g.hy;
    return out;
}

/// (u . grad) u with first-order upwind derivatives at interior faces.
inline VectorField convective_term(const VectorField& w) {
    const Grid& g = w.grid;
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double ua = w.u_at(i, j);
            const double dudx = ua >= 0.0 ? (w.u_at(i, j) - w.u_at(i - 1, j)) / g.hx
                                          : (w.u_at(i + 1, j) - w.u_at(i, j)) / g.hx;
            const double vbar = 0.25 * (w.v_at(i - 1, j) + w.v_at(i, j) +
                                        w.v_at(i - 1, j + 1) + w.v_at(i, j + 1));
            const double up = j < g.ny - 1 ? w.u_at(i, j + 1) : -w.u_at(i, g.ny - 1);
            const double dn = j > 0 ? w.u_at(i, j - 1) : -w.u_at(i, 0);
            const double dudy = vbar >= 0.0 ? (w.u_at(i, j) - dn) / g.hy
                                            : (up - w.u_at(i, j)) / g.hy;
            out.u_at(i, j) = ua * dudx + vbar * dudy;
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double va = w.v_at(i, j);
            const double dvdy = va >= 0.0 ? (w.v_at(i, j) - w.v_at(i, j - 1)) / g.hy
                                          : (w.v_at(i, j + 1) - w.v_at(i, j)) / g.hy;
            const double ubar = 0.25 * (w.u_at(i, j - 1) + w.u_at(i + 1, j - 1) +
                                        w.u_at(i, j) + w.u_at(i + 1, j));
            const double rt = i < g.nx - 1 ? w.v_at(i + 1, j) : -w.v_at(g.nx - 1, j);
            const double lf = i > 0 ? w.v_at(i - 1, j) : -w.v_at(0, j);
            const double dvdx = ubar >= 0.0 ? (w.v_at(i, j) - lf) / g.hx
                                            : (rt - w.v_at(i, j)) / g.hx;
            out.v_at(i, j) = ubar * dvdx + va * dvdy;
        }
    return out;
}

}  // namespace detail

/// Capillary force -div(grad phi x grad phi), sampled at faces.
/// phi needs neumann-zero ghosting.
inline VectorField korteweg_force(const ScalarField& phi) {
    if (phi.bc != BoundaryKind::neumann_zero)
        throw contract_error("korteweg_force: phi must have neumann-zero boundary kind");
    const Grid& g = phi.grid;
    const VectorField gp = gradient(phi);

    ScalarField t11(g), t22(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double gx = 0.5 * (gp.u_at(i, j) + gp.u_at(i + 1, j));
            const double gy = 0.5 * (gp.v_at(i, j) + gp.v_at(i, j + 1));
            t11(i, j) = gx * gx;
            t22(i, j) = gy * gy;
        }
    // grad phi x grad phi off-diagonal at nodes, mirror ghost rows/columns
    std::vector<double> t12(static_cast<std::size_t>(g.nx + 1) * (g.ny + 1));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double gxh = gp.u_at(i, j < g.ny ? j : g.ny - 1);
            const double gxl = gp.u_at(i, j > 0 ? j - 1 : 0);
            const double gyh = gp.v_at(i < g.nx ? i : g.nx - 1, j);
            const double gyl = gp.v_at(i > 0 ? i - 1 : 0, j);
            t12[detail::nidx(g, i, j)] = 0.5 * (gxh + gxl) * 0.5 * (gyh + gyl);
        }

    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.u_at(i, j) = -((t11(i, j) - t11(i - 1, j)) / g.hx +
                               (t12[detail::nidx(g, i, j + 1)] - t12[detail::nidx(g, i, j)]) / g.hy);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.v_at(i, j) = -((t12[detail::nidx(g, i + 1, j)] - t12[detail::nidx(g, i, j)]) / g.hx +
                               (t22(i, j) - t22(i, j - 1)) / g.hy);
    ensure_finite(out, "korteweg_force");
    return out;
}

inline double viscous_cfl_dt(const ScalarField& rho, const ViscosityLaw& law, const Grid& g) {
    const double h = std::min(g.hx, g.hy);
    return 0.25 * h * h * rho.min_value() / law.nu_upper();
}

/// Explicit predictor
///   u* = u + dt/rho_f [ -rho_f (u.grad)u + div(nu(phi) D u) + K(phi) ],
/// no-slip enforced on the result.
inline VectorField predictor_step(const State& s, const ViscosityLaw& law, double dt) {
    const Grid& g = s.rho.grid;
    const double visc_dt = viscous_cfl_dt(s.rho, law, g);
    if (dt > visc_dt) {
        std::ostringstream os;
        os << "predictor_step: viscous stability bound violated, dt = " << dt
           << " exceeds " << visc_dt;
        throw cfl_error(os.str(), visc_dt);
    }
    const double adv_dt = advective_cfl_dt(s.u);
    if (dt > adv_dt) {
        std::ostringstream os;
        os << "predictor_step: advective CFL violated, dt = " << dt << " exceeds " << adv_dt;
        throw cfl_error(os.str(), adv_dt);
    }

    ScalarField nu_c(g);
    for (std::size_t k = 0; k < nu_c.v.size(); ++k) nu_c.v[k] = viscosity(law, s.phi.v[k]);

    const VectorField rho_f = interpolate_center_to_face(s.rho);
    const VectorField conv = detail::convective_term(s.u);
    const VectorField visc = detail::viscous_force(s.u, nu_c);
    const VectorField kort = korteweg_force(s.phi);

    VectorField out = s.u;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const std::size_t k = g.uidx(i, j);
            out.u[k] += dt * (-conv.u[k] + (visc.u[k] + kort.u[k]) / rho_f.u[k]);
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.vidx(i, j);
            out.v[k] += dt * (-conv.v[k] + (visc.v[k] + kort.v[k]) / rho_f.v[k]);
        }
    out.zero_normal_boundary();
    ensure_finite(out, "predictor_step");
    return out;
}

struct ProjectResult {
    VectorField u;
    ScalarField p;
    SolveReport report;
};

/// Variable-density pressure projection: solve
///   div((1/rho_f) grad p) = div(u*) / dt
/// with pure-Neumann treatment (mean-zero p), then u = u* - (dt/rho_f) grad p.
inline ProjectResult project(const ScalarField& rho, const VectorField& u_star, double dt,
                             double tol, int max_iter = 50000,
                             const ScalarField* p_guess = nullptr) {
    require_same_grid(rho.grid, u_star.grid, "project");
    if (!(rho.min_value() > 0.0))
        throw contract_error("project: density must be strictly positive");
    if (!(dt > 0.0)) throw contract_error("project: dt must be positive");
    const Grid& g = rho.grid;

    VectorField coef = interpolate_center_to_face(rho);
    for (double& c : coef.u) c = 1.0 / c;
    for (double& c : coef.v) c = 1.0 / c;
    LinearOperator spd = negated(make_variable_poisson(coef, BoundaryKind::neumann_zero));
    spd.name = "pressure_projection";

    ScalarField b = divergence(u_star);
    for (double& x : b.v) x = -x / dt;

    ScalarField x0 = p_guess ? *p_guess : ScalarField(g);
    auto [p, report] = solve_cg(spd, b, tol, max_iter, x0);
    if (!report.converged)
        throw solver_error("project: CG did not converge (relative residual " +
                               std::to_string(report.final_residual) + " after " +
                               std::to_string(report.iterations) + " iterations)",
                           report);
    p.bc = BoundaryKind::neumann_zero;

    VectorField gp = gradient(p);
    VectorField u = u_star;
    for (std::size_t k = 0; k < u.u.size(); ++k) u.u[k] -= dt * coef.u[k] * gp.u[k];
    for (std::size_t k = 0; k < u.v.size(); ++k) u.v[k] -= dt * coef.v[k] * gp.v[k];
    u.zero_normal_boundary();
    ensure_finite(u, "project");
    return {std::move(u), std::move(p), std::move(report)};
}

}  // namespace nsch

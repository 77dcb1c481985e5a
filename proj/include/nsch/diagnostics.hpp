#pragma once

#include <cmath>
#include <string>

#include "nsch/materials.hpp"
#include "nsch/momentum.hpp"
#include "nsch/operators.hpp"

namespace nsch {

/// One diagnostics row; the columns of series.csv in order.
struct DiagRecord {
    double t = 0.0;
    double energy = 0.0;        // E
    double dissipation = 0.0;   // D
    double mass = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double grad_u_l2 = 0.0;
    double grad_mu_l2 = 0.0;
    double lr_norm_u = 0.0;     // for the configured r
    double serrin_acc = 0.0;    // running time integral
    double divu_max = 0.0;
    double rho_phi_total = 0.0;

    bool all_finite() const {
        for (double x : {t, energy, dissipation, mass, rho_min, rho_max, grad_u_l2,
                         grad_mu_l2, lr_norm_u, serrin_acc, divu_max, rho_phi_total})
            if (!std::isfinite(x)) return false;
        return true;
    }
};

/// E = sum [ rho |u|^2 / 2 + rho psi(phi) + |grad phi|^2 / 2 ] h^2,
/// squares of face values averaged to centers.
inline double total_energy(const State& s) {
    const Grid& g = s.rho.grid;
    const VectorField gp = gradient(s.phi);
    double e = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double u2 = 0.5 * (s.u.u_at(i, j) * s.u.u_at(i, j) +
                                     s.u.u_at(i + 1, j) * s.u.u_at(i + 1, j)) +
                              0.5 * (s.u.v_at(i, j) * s.u.v_at(i, j) +
                                     s.u.v_at(i, j + 1) * s.u.v_at(i, j + 1));
            const double gp2 = 0.5 * (gp.u_at(i, j) * gp.u_at(i, j) +
                                      gp.u_at(i + 1, j) * gp.u_at(i + 1, j)) +
                               0.5 * (gp.v_at(i, j) * gp.v_at(i, j) +
                                      gp.v_at(i, j + 1) * gp.v_at(i, j + 1));
            e += 0.5 * s.rho(i, j) * u2 + s.rho(i, j) * psi(s.phi(i, j)) + 0.5 * gp2;
        }
    return e * g.cell_volume();
}

/// D = sum nu(phi) |D u|^2 + |grad mu|^2. The shear part of |D u|^2 is
/// sampled at interior nodes, so prescribed interior fields are measured
/// without wall-reflection artifacts.
inline double dissipation(const State& s, const ViscosityLaw& law) {
    const Grid& g = s.rho.grid;
    double d = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dux = (s.u.u_at(i + 1, j) - s.u.u_at(i, j)) / g.hx;
            const double dvy = (s.u.v_at(i, j + 1) - s.u.v_at(i, j)) / g.hy;
            d += viscosity(law, s.phi(i, j)) * (dux * dux + dvy * dvy);
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double uy = (s.u.u_at(i, j) - s.u.u_at(i, j - 1)) / g.hy;
            const double vx = (s.u.v_at(i, j) - s.u.v_at(i - 1, j)) / g.hx;
            const double nu_n = 0.25 * (viscosity(law, s.phi(i - 1, j - 1)) +
                                        viscosity(law, s.phi(i, j - 1)) +
                                        viscosity(law, s.phi(i - 1, j)) +
                                        viscosity(law, s.phi(i, j)));
            d += nu_n * 0.5 * (uy + vx) * (uy + vx);
        }
    const VectorField gm = gradient(s.mu);
    double gm2 = 0.0;
    for (double x : gm.u) gm2 += x * x;
    for (double x : gm.v) gm2 += x * x;
    return (d + gm2) * g.cell_volume();
}

/// ||grad u||_L2 over all components; shear derivatives at nodes with
/// no-slip wall reflection.
inline double grad_u_l2(const VectorField& u) {
    const Grid& g = u.grid;
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dux = (u.u_at(i + 1, j) - u.u_at(i, j)) / g.hx;
            const double dvy = (u.v_at(i, j + 1) - u.v_at(i, j)) / g.hy;
            s += dux * dux + dvy * dvy;
        }
    const std::vector<double> uy = detail::dudy_nodes(u);
    const std::vector<double> vx = detail::dvdx_nodes(u);
    for (double x : uy) s += x * x;
    for (double x : vx) s += x * x;
    return std::sqrt(s * g.cell_volume());
}

inline double grad_l2(const ScalarField& f) {
    const VectorField gf = gradient(f);
    double s = 0.0;
    for (double x : gf.u) s += x * x;
    for (double x : gf.v) s += x * x;
    return std::sqrt(s * f.grid.cell_volume());
}

/// (integral |u|^r)^(1/r) with |u| built from face-averaged components.
inline double lr_norm(const VectorField& u, double r) {
    if (!(r >= 1.0)) throw contract_error("lr_norm: r must be >= 1");
    const Grid& g = u.grid;
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double uc = 0.5 * (u.u_at(i, j) + u.u_at(i + 1, j));
            const double vc = 0.5 * (u.v_at(i, j) + u.v_at(i, j + 1));
            s += std::pow(std::sqrt(uc * uc + vc * vc), r);
        }
    return std::pow(s * g.cell_volume(), 1.0 / r);
}

/// Time exponent 4r/(r-6) of the blow-up functional; defined for r > 6.
inline double serrin_exponent(double r) {
    if (!(r > 6.0))
        throw contract_error("serrin_exponent: the blow-up functional requires r > 6 (got " +
                             std::to_string(r) + ")");
    return 4.0 * r / (r - 6.0);
}

/// Left-endpoint quadrature of the blow-up time integral:
/// prev + dt ||u||_{L^r}^{4r/(r-6)}. Never decreases.
inline double serrin_accumulate(double prev, const VectorField& u, double r, double dt) {
    if (!(dt > 0.0)) throw contract_error("serrin_accumulate: dt must be positive");
    return prev + dt * std::pow(lr_norm(u, r), serrin_exponent(r));
}

/// ||grad u0|| + ||grad mu0|| + max rho0, the quantity compared against
/// the smallness target.
inline double smallness_quantity(const State& s0) {
    return grad_u_l2(s0.u) + grad_l2(s0.mu) + s0.rho.max_value();
}

/// a0 = ( max{ sqrt(2)/(2 nu_star), c0 eps0 } eps0 )^{-1}.
inline double a0_coefficient(double nu_star, double c0, double eps0) {
    if (!(nu_star > 0.0) || !(c0 > 0.0) || !(eps0 > 0.0))
        throw contract_error("a0_coefficient: all inputs must be positive");
    return 1.0 / (std::max(std::sqrt(2.0) / (2.0 * nu_star), c0 * eps0) * eps0);
}

/// c eps0 exp(-a0 t) + (a0/4) mass0: exponential decay toward a floor set
/// by the initial mass.
inline double decay_envelope(double t, double c, double eps0, double a0, double mass0) {
    return c * eps0 * std::exp(-a0 * t) + 0.25 * a0 * mass0;
}

inline double total_mass(const ScalarField& rho) {
    return rho.sum() * rho.grid.cell_volume();
}

inline double rho_phi_total(const ScalarField& rho, const ScalarField& phi) {
    double s = 0.0;
    for (std::size_t k = 0; k < rho.v.size(); ++k) s += rho.v[k] * phi.v[k];
    return s * rho.grid.cell_volume();
}

inline DiagRecord make_diag_record(const State& s, const ViscosityLaw& law, double serrin_r,
                                   double serrin_acc) {
    DiagRecord d;
    d.t = s.t;
    d.energy = total_energy(s);
    d.dissipation = dissipation(s, law);
    d.mass = total_mass(s.rho);
    d.rho_min = s.rho.min_value();
    d.rho_max = s.rho.max_value();
    d.grad_u_l2 = grad_u_l2(s.u);
    d.grad_mu_l2 = grad_l2(s.mu);
    d.lr_norm_u = lr_norm(s.u, serrin_r);
    d.serrin_acc = serrin_acc;
    d.divu_max = max_abs_divergence(s.u);
    d.rho_phi_total = rho_phi_total(s.rho, s.phi);
    if (!d.all_finite())
        throw std::runtime_error("diagnostics: non-finite value in record at t = " +
                                 std::to_string(d.t));
    return d;
}

}  // namespace nsch

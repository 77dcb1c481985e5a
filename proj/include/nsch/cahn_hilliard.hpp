#pragma once

#include <utility>

#include "nsch/elliptic.hpp"
#include "nsch/materials.hpp"
#include "nsch/operators.hpp"

namespace nsch {

struct ChParams {
    double stabilization = 2.0;  // S >= 0; S >= 2 covers psi'' >= -1 with margin
    double tol = 1e-9;
    int max_iter = 20000;

    ChParams() = default;
    ChParams(double s, double t, int m) : stabilization(s), tol(t), max_iter(m) {
        if (stabilization < 0.0)
            throw contract_error("ChParams: stabilization must be non-negative");
    }
};

/// Pointwise chemical potential mu = -lap(phi)/rho + psi'(phi).
/// phi must carry neumann_zero ghosting; the result does too.
inline ScalarField chemical_potential(const ScalarField& rho, const ScalarField& phi) {
    require_same_grid(rho.grid, phi.grid, "chemical_potential");
    if (phi.bc != BoundaryKind::neumann_zero)
        throw contract_error("chemical_potential: phi must have neumann-zero boundary kind");
    if (!(rho.min_value() > 0.0))
        throw contract_error("chemical_potential: density must be strictly positive");
    ScalarField lap = laplacian(phi);
    ScalarField mu(phi.grid, BoundaryKind::neumann_zero);
    for (std::size_t k = 0; k < mu.v.size(); ++k)
        mu.v[k] = -lap.v[k] / rho.v[k] + psi_prime(phi.v[k]);
    ensure_finite(mu, "chemical_potential");
    return mu;
}

struct ChResult {
    ScalarField phi;
    ScalarField mu;
    SolveReport report;
};

namespace detail {

/// Implicit operator of the stabilized step, acting on the increment
/// d = phi' - phi^n:
///   L d = rho d / dt + lap((1/rho) lap d) - S lap d.
/// Symmetric positive definite in the plain inner product because the
/// Neumann Laplacian is symmetric and rho > 0.
inline LinearOperator make_ch_operator(const ScalarField& rho, double dt, double S) {
    const Grid g = rho.grid;
    LinearOperator op;
    op.name = "cahn_hilliard_implicit";
    op.constants_nullspace = false;
    std::vector<double> rho_v = rho.v;
    op.apply = [g, rho_v, dt, S](const ScalarField& d_in, ScalarField& out) {
        require_same_grid(g, d_in.grid, "cahn_hilliard_implicit");
        ScalarField d = d_in;
        d.bc = BoundaryKind::neumann_zero;
        ScalarField w1 = laplacian(d);
        ScalarField w2 = w1;
        w2.bc = BoundaryKind::neumann_zero;
        for (std::size_t k = 0; k < w2.v.size(); ++k) w2.v[k] /= rho_v[k];
        ScalarField w3 = laplacian(w2);
        out.grid = g;
        out.v.resize(w3.v.size());
        for (std::size_t k = 0; k < out.v.size(); ++k)
            out.v[k] = rho_v[k] * d_in.v[k] / dt + w3.v[k] - S * w1.v[k];
    };

    // exact diagonal: rho/dt + diag(lap D lap) + S diag(-lap)
    op.diag.assign(static_cast<std::size_t>(g.cells()), 0.0);
    const double ax = 1.0 / (g.hx * g.hx), ay = 1.0 / (g.hy * g.hy);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double eW = i > 0, eE = i < g.nx - 1, eS = j > 0, eN = j < g.ny - 1;
            const double center = (eW + eE) * ax + (eS + eN) * ay;
            double bih = center * center / rho(i, j);
            if (eW) bih += ax * ax / rho(i - 1, j);
            if (eE) bih += ax * ax / rho(i + 1, j);
            if (eS) bih += ay * ay / rho(i, j - 1);
            if (eN) bih += ay * ay / rho(i, j + 1);
            op.diag[g.cidx(i, j)] = rho(i, j) / dt + bih + S * center;
        }
    return op;
}

}  // namespace detail

/// Stabilized linearly-implicit step of the convective Cahn-Hilliard pair
///   rho (phi' - phi^n)/dt + div(u phi^n) = lap mu',
///   rho mu' = -lap phi' + rho (psi'(phi^n) + S (phi' - phi^n)),
/// with rho frozen at level n and neumann-zero ghosting on phi' and mu'.
/// Eliminating mu' leaves one SPD fourth-order system for the increment,
/// solved with preconditioned CG.
inline ChResult ch_step(const ScalarField& rho, const VectorField& u, const ScalarField& phi,
                        double dt, const ChParams& params = {}) {
    require_same_grid(rho.grid, phi.grid, "ch_step");
    require_same_grid(rho.grid, u.grid, "ch_step");
    if (!(dt > 0.0)) throw contract_error("ch_step: dt must be positive");
    if (!(rho.min_value() > 0.0))
        throw contract_error("ch_step: density must be strictly positive");

    ScalarField mu_n = chemical_potential(rho, phi);

    // rhs = -div(u phi^n) + lap mu^n
    ScalarField rhs = laplacian(mu_n);
    ScalarField conv = advect_scalar(phi, u);
    for (std::size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] -= conv.v[k];

    const double S = params.stabilization;
    LinearOperator L = detail::make_ch_operator(rho, dt, S);
    auto [delta, report] = solve_cg(L, rhs, params.tol, params.max_iter);
    if (!report.converged)
        throw solver_error("ch_step: CG did not converge (relative residual " +
                               std::to_string(report.final_residual) + " after " +
                               std::to_string(report.iterations) + " iterations)",
                           report);

    ChResult out;
    out.report = std::move(report);
    out.phi = phi;
    for (std::size_t k = 0; k < out.phi.v.size(); ++k) out.phi.v[k] += delta.v[k];
    out.phi.bc = BoundaryKind::neumann_zero;

    // mu' = mu^n - lap(delta)/rho + S delta
    delta.bc = BoundaryKind::neumann_zero;
    ScalarField lap_d = laplacian(delta);
    out.mu = mu_n;
    for (std::size_t k = 0; k < out.mu.v.size(); ++k)
        out.mu.v[k] += -lap_d.v[k] / rho.v[k] + S * delta.v[k];
    out.mu.bc = BoundaryKind::neumann_zero;

    ensure_finite(out.phi, "ch_step");
    ensure_finite(out.mu, "ch_step");
    return out;
}

}  // namespace nsch

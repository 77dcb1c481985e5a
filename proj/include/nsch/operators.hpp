#pragma once

#include <cmath>
#include <limits>

#include "nsch/grid.hpp"

namespace nsch {

// Discrete calculus on the MAC mesh. gradient and divergence form an exact
// adjoint pair on the subspace of vector fields with zero normal boundary
// faces: <grad f, v>_faces + <f, div v>_centers = 0.

/// Centered difference, cell centers to faces. Boundary faces use the
/// field's ghost convention (zero for neumann_zero, 2 f / h for
/// dirichlet_zero).
inline VectorField gradient(const ScalarField& f) {
    if (f.bc == BoundaryKind::none)
        throw contract_error("gradient: boundary kind is unset");
    const Grid& g = f.grid;
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i)
            out.u_at(i, j) = (f(i, j) - f(i - 1, j)) / g.hx;
        out.u_at(0, j) = (f(0, j) - f.ghost(-1, j)) / g.hx;
        out.u_at(g.nx, j) = (f.ghost(g.nx, j) - f(g.nx - 1, j)) / g.hx;
    }
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 1; j < g.ny; ++j)
            out.v_at(i, j) = (f(i, j) - f(i, j - 1)) / g.hy;
        out.v_at(i, 0) = (f(i, 0) - f.ghost(i, -1)) / g.hy;
        out.v_at(i, g.ny) = (f.ghost(i, g.ny) - f(i, g.ny - 1)) / g.hy;
    }
    ensure_finite(out, "gradient");
    return out;
}

/// Face-to-center difference; the exact (negative) adjoint of gradient.
inline ScalarField divergence(const VectorField& w) {
    const Grid& g = w.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = (w.u_at(i + 1, j) - w.u_at(i, j)) / g.hx +
                        (w.v_at(i, j + 1) - w.v_at(i, j)) / g.hy;
    ensure_finite(out, "divergence");
    return out;
}

/// divergence(gradient(f)), same code path by construction.
inline ScalarField laplacian(const ScalarField& f) {
    if (f.bc == BoundaryKind::none)
        throw contract_error("laplacian: boundary kind is unset");
    ScalarField out = divergence(gradient(f));
    out.bc = f.bc;
    return out;
}

/// Flux-form convective term div(u f) with first-order upwind donor values.
/// Requires zero normal boundary faces (no in/outflow), so the global sum
/// of the result telescopes to zero.
inline ScalarField advect_scalar(const ScalarField& f, const VectorField& w) {
    require_same_grid(f.grid, w.grid, "advect_scalar");
    if (!w.normal_boundary_is_zero())
        throw contract_error("advect_scalar: velocity has nonzero normal boundary faces");
    const Grid& g = f.grid;
    // upwind face fluxes; boundary faces carry none
    std::vector<double> fu(w.u.size(), 0.0), fv(w.v.size(), 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double a = w.u_at(i, j);
            fu[g.uidx(i, j)] = a * (a >= 0.0 ? f(i - 1, j) : f(i, j));
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double a = w.v_at(i, j);
            fv[g.vidx(i, j)] = a * (a >= 0.0 ? f(i, j - 1) : f(i, j));
        }
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = (fu[g.uidx(i + 1, j)] - fu[g.uidx(i, j)]) / g.hx +
                        (fv[g.vidx(i, j + 1)] - fv[g.vidx(i, j)]) / g.hy;
    ensure_finite(out, "advect_scalar");
    return out;
}

/// Arithmetic mean of the two adjacent centers; boundary faces copy the
/// adjacent cell. Output values stay inside [min f, max f].
inline VectorField interpolate_center_to_face(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j) {
        out.u_at(0, j) = f(0, j);
        for (int i = 1; i < g.nx; ++i)
            out.u_at(i, j) = 0.5 * (f(i - 1, j) + f(i, j));
        out.u_at(g.nx, j) = f(g.nx - 1, j);
    }
    for (int i = 0; i < g.nx; ++i) {
        out.v_at(i, 0) = f(i, 0);
        for (int j = 1; j < g.ny; ++j)
            out.v_at(i, j) = 0.5 * (f(i, j - 1) + f(i, j));
        out.v_at(i, g.ny) = f(i, g.ny - 1);
    }
    ensure_finite(out, "interpolate_center_to_face");
    return out;
}

// volume-weighted inner products (fixed summation order)

inline double inner_centers(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "inner_centers");
    double s = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return s * a.grid.cell_volume();
}

inline double inner_faces(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "inner_faces");
    double s = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k) s += a.u[k] * b.u[k];
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return s * a.grid.cell_volume();
}

inline double l2_norm_centers(const ScalarField& a) {
    return std::sqrt(inner_centers(a, a));
}

inline double max_abs_divergence(const VectorField& w) {
    ScalarField d = divergence(w);
    double m = 0.0;
    for (double x : d.v) m = std::max(m, std::abs(x));
    return m;
}

/// Largest dt with dt (max|u|/hx + max|v|/hy) <= 1.
inline double advective_cfl_dt(const VectorField& u) {
    const double rate = u.max_abs_u() / u.grid.hx + u.max_abs_v() / u.grid.hy;
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

}  // namespace nsch

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nsch/operators.hpp"

namespace nsch {

/// Matrix-free symmetric operator on cell-centered fields. When
/// constants_nullspace is set the operator annihilates constants
/// (pure-Neumann problems) and solves are done in the mean-zero subspace.
/// diag, when non-empty, is used for Jacobi preconditioning.
struct LinearOperator {
    std::string name = "operator";
    bool constants_nullspace = false;
    std::function<void(const ScalarField&, ScalarField&)> apply;
    std::vector<double> diag;

    ScalarField operator()(const ScalarField& x) const {
        ScalarField out(x.grid);
        apply(x, out);
        return out;
    }
};

inline LinearOperator negated(const LinearOperator& a) {
    LinearOperator out;
    out.name = "neg(" + a.name + ")";
    out.constants_nullspace = a.constants_nullspace;
    out.apply = [inner = a.apply](const ScalarField& x, ScalarField& y) {
        inner(x, y);
        for (double& t : y.v) t = -t;
    };
    out.diag = a.diag;
    for (double& d : out.diag) d = -d;
    return out;
}

namespace detail {
inline void subtract_mean(ScalarField& f) {
    const double m = f.mean();
    for (double& x : f.v) x -= m;
}
inline double plain_dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return s;
}
}  // namespace detail

/// Preconditioned conjugate gradient with an initial guess. A must be
/// symmetric positive (semi-)definite; for pure-Neumann operators the
/// right-hand side is projected to mean zero and the solution returned
/// mean-zero. Convergence criterion: ||b - A x|| / ||b|| <= tol in l2.
inline std::pair<ScalarField, SolveReport> solve_cg(const LinearOperator& A,
                                                    const ScalarField& b_in,
                                                    double tol, int max_iter,
                                                    const ScalarField& x0) {
    const Grid& g = b_in.grid;
    require_same_grid(g, x0.grid, "solve_cg");
    SolveReport rep;

    ScalarField b = b_in;
    if (A.constants_nullspace) detail::subtract_mean(b);
    const double bnorm = std::sqrt(detail::plain_dot(b, b));
    if (bnorm == 0.0) {
        rep.converged = true;
        return {ScalarField(g, b_in.bc, 0.0), rep};
    }

    const bool jacobi = !A.diag.empty();
    ScalarField x = x0;
    if (A.constants_nullspace) detail::subtract_mean(x);
    ScalarField r(g), z(g), p(g), q(g);
    A.apply(x, q);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = b.v[k] - q.v[k];

    // smoothed iterate; its residual norm never increases, and it is what
    // the solve returns
    ScalarField xs = x, rs = r;
    double rs_norm = std::sqrt(detail::plain_dot(rs, rs));

    double rz = 0.0;
    for (int it = 0;; ++it) {
        const double rel = rs_norm / bnorm;
        if (!std::isfinite(rel))
            throw solver_error("solve_cg: non-finite residual on operator '" + A.name + "'", rep);
        rep.residual_history.push_back(rel);
        rep.final_residual = rel;
        rep.iterations = it;
        if (rel <= tol) {
            rep.converged = true;
            break;
        }
        if (it >= max_iter) {
            rep.converged = false;
            break;
        }

        if (jacobi) {
            for (std::size_t k = 0; k < z.v.size(); ++k) z.v[k] = r.v[k] / A.diag[k];
        } else {
            z.v = r.v;
        }
        if (A.constants_nullspace) detail::subtract_mean(z);

        const double rz_new = detail::plain_dot(r, z);
        if (it == 0) {
            p.v = z.v;
        } else {
            const double beta = rz_new / rz;
            for (std::size_t k = 0; k < p.v.size(); ++k) p.v[k] = z.v[k] + beta * p.v[k];
        }
        rz = rz_new;

        A.apply(p, q);
        const double pq = detail::plain_dot(p, q);
        if (!(pq > 0.0))
            throw solver_error("solve_cg: operator '" + A.name +
                                   "' is not positive definite on the search space",
                               rep);
        const double alpha = rz / pq;
        for (std::size_t k = 0; k < x.v.size(); ++k) x.v[k] += alpha * p.v[k];
        for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] -= alpha * q.v[k];

        // minimal-residual smoothing: eta minimizes ||(1 - eta) rs + eta r||
        double dd = 0.0, rd = 0.0;
        for (std::size_t k = 0; k < r.v.size(); ++k) {
            const double d = r.v[k] - rs.v[k];
            dd += d * d;
            rd += rs.v[k] * d;
        }
        const double eta = dd > 0.0 ? std::clamp(-rd / dd, 0.0, 1.0) : 1.0;
        for (std::size_t k = 0; k < rs.v.size(); ++k) rs.v[k] += eta * (r.v[k] - rs.v[k]);
        for (std::size_t k = 0; k < xs.v.size(); ++k) xs.v[k] += eta * (x.v[k] - xs.v[k]);
        rs_norm = std::sqrt(detail::plain_dot(rs, rs));
    }

    if (A.constants_nullspace) detail::subtract_mean(xs);
    xs.bc = b_in.bc;
    return {std::move(xs), rep};
}

inline std::pair<ScalarField, SolveReport> solve_cg(const LinearOperator& A,
                                                    const ScalarField& b, double tol,
                                                    int max_iter) {
    return solve_cg(A, b, tol, max_iter, ScalarField(b.grid));
}

/// A f = div(coef * grad f) with the given ghosting for f. coef lives on
/// faces and must be strictly positive everywhere. Symmetric and negative
/// semi-definite; constants span the null space iff bc is neumann_zero.
inline LinearOperator make_variable_poisson(const VectorField& coef, BoundaryKind bc) {
    const Grid g = coef.grid;
    if (bc == BoundaryKind::none)
        throw contract_error("make_variable_poisson: boundary kind is unset");
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            if (!(coef.u_at(i, j) > 0.0))
                throw contract_error("make_variable_poisson: non-positive coefficient at u-face (" +
                                     std::to_string(i) + "," + std::to_string(j) + ")");
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (!(coef.v_at(i, j) > 0.0))
                throw contract_error("make_variable_poisson: non-positive coefficient at v-face (" +
                                     std::to_string(i) + "," + std::to_string(j) + ")");

    LinearOperator op;
    op.name = "variable_poisson";
    op.constants_nullspace = (bc == BoundaryKind::neumann_zero);
    op.apply = [g, coef, bc](const ScalarField& f_in, ScalarField& out) {
        require_same_grid(g, f_in.grid, "variable_poisson");
        ScalarField f = f_in;
        f.bc = bc;
        VectorField gr = gradient(f);
        for (std::size_t k = 0; k < gr.u.size(); ++k) gr.u[k] *= coef.u[k];
        for (std::size_t k = 0; k < gr.v.size(); ++k) gr.v[k] *= coef.v[k];
        ScalarField d = divergence(gr);
        out.grid = g;
        out.v = std::move(d.v);
    };

    // exact diagonal for Jacobi preconditioning
    op.diag.assign(static_cast<std::size_t>(g.cells()), 0.0);
    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
    const bool dirichlet = (bc == BoundaryKind::dirichlet_zero);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double d = 0.0;
            d -= (i > 0 ? coef.u_at(i, j) : (dirichlet ? 2.0 * coef.u_at(0, j) : 0.0)) * ihx2;
            d -= (i < g.nx - 1 ? coef.u_at(i + 1, j) : (dirichlet ? 2.0 * coef.u_at(g.nx, j) : 0.0)) * ihx2;
            d -= (j > 0 ? coef.v_at(i, j) : (dirichlet ? 2.0 * coef.v_at(i, 0) : 0.0)) * ihy2;
            d -= (j < g.ny - 1 ? coef.v_at(i, j + 1) : (dirichlet ? 2.0 * coef.v_at(i, g.ny) : 0.0)) * ihy2;
            op.diag[g.cidx(i, j)] = d;
        }
    return op;
}

}  // namespace nsch

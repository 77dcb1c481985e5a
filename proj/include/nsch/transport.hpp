#pragma once

#include <cmath>
#include <sstream>

#include "nsch/operators.hpp"

namespace nsch {

/// One conservative upwind step of the transport equation
/// rho_t + div(u rho) = 0. With discretely divergence-free u this is a
/// convex combination of neighbor values, so the update preserves the
/// cellwise bounds of rho and, being in flux form, the exact total mass.
inline ScalarField density_step(const ScalarField& rho, const VectorField& u, double dt,
                                double divfree_tol = 1e-6) {
    require_same_grid(rho.grid, u.grid, "density_step");
    if (!u.normal_boundary_is_zero())
        throw contract_error("density_step: velocity has nonzero normal boundary faces");
    const double divmax = max_abs_divergence(u);
    if (divmax > divfree_tol) {
        std::ostringstream os;
        os << "density_step: velocity is not divergence-free (max |div u| = " << divmax
           << " > " << divfree_tol << ")";
        throw contract_error(os.str());
    }
    const double admissible = advective_cfl_dt(u);
    if (dt > admissible) {
        std::ostringstream os;
        os << "density_step: CFL violated, dt = " << dt << " exceeds " << admissible;
        throw cfl_error(os.str(), admissible);
    }

    ScalarField out = advect_scalar(rho, u);
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = rho.v[k] - dt * out.v[k];
    out.bc = rho.bc;
    ensure_finite(out, "density_step");
    return out;
}

}  // namespace nsch

#pragma once

#include <cstdint>
#include <random>

#include "nsch/cahn_hilliard.hpp"
#include "nsch/config.hpp"
#include "nsch/diagnostics.hpp"
#include "nsch/momentum.hpp"

namespace nsch {

struct SmallnessReport {
    double quantity = 0.0;
    double eps0_target = 0.0;
    bool pass = false;  // quantity <= target; failing is a warning, not an error
};

struct InitialData {
    State state;
    DiagRecord diag;
    SmallnessReport smallness;
};

namespace detail {

// platform-independent uniform in [-1, 1)
inline double symmetric_uniform(std::mt19937_64& eng) {
    return 2.0 * ((eng() >> 11) * (1.0 / 9007199254740992.0)) - 1.0;
}

/// Zero-mean band-limited noise: cosine modes up to wavenumber 3 in each
/// direction with seeded coefficients, scaled to unit max amplitude.
/// Cosine modes keep the normal derivative zero at the walls.
inline ScalarField band_limited_noise(const Grid& g, unsigned long long seed) {
    std::mt19937_64 eng(seed);
    constexpr int kmax = 3;
    double coef[kmax + 1][kmax + 1];
    for (int m = 0; m <= kmax; ++m)
        for (int n = 0; n <= kmax; ++n) coef[m][n] = symmetric_uniform(eng);
    coef[0][0] = 0.0;

    ScalarField p(g);
    constexpr double pi = 3.14159265358979323846;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double s = 0.0;
            for (int m = 0; m <= kmax; ++m)
                for (int n = 0; n <= kmax; ++n)
                    s += coef[m][n] * std::cos(pi * m * g.xc(i) / g.lx) *
                         std::cos(pi * n * g.yc(j) / g.ly);
            p(i, j) = s;
        }
    double amax = 0.0;
    for (double x : p.v) amax = std::max(amax, std::abs(x));
    if (amax > 0.0)
        for (double& x : p.v) x /= amax;
    return p;
}

inline void require_args(const ProfileSpec& p, std::size_t n, const char* what) {
    if (p.args.size() != n)
        throw config_error(std::string(what) + ": profile '" + p.kind + "' expects " +
                           std::to_string(n) + " argument(s), got " +
                           std::to_string(p.args.size()));
}

inline ScalarField make_scalar_profile(const Grid& g, const ProfileSpec& p, BoundaryKind bc,
                                       const char* what,
                                       std::optional<unsigned long long> seed_override) {
    ScalarField f(g, bc);
    if (p.kind == "constant") {
        require_args(p, 1, what);
        for (double& x : f.v) x = p.args[0];
    } else if (p.kind == "tanh") {
        require_args(p, 2, what);
        const double x0 = p.args[0], w = p.args[1];
        if (!(w > 0.0)) throw config_error(std::string(what) + ": tanh width must be positive");
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) f(i, j) = std::tanh((g.xc(i) - x0) / w);
    } else if (p.kind == "random") {
        require_args(p, 3, what);
        const double base = p.args[0], amp = p.args[1];
        const unsigned long long seed =
            seed_override ? *seed_override : static_cast<unsigned long long>(p.args[2]);
        ScalarField noise = band_limited_noise(g, seed);
        for (std::size_t k = 0; k < f.v.size(); ++k) f.v[k] = base + amp * noise.v[k];
    } else {
        throw config_error(std::string(what) + ": unknown profile '" + p.kind + "'");
    }
    return f;
}

}  // namespace detail

/// Instantiate the configured initial data:
/// rho0 > 0, phi0 with zero-Neumann ghosting, u0 made discretely
/// divergence-free by one projection, mu0 = chemical_potential(rho0, phi0).
inline InitialData build_initial(const Config& cfg) {
    const Grid g(cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly);
    const ViscosityLaw law(cfg.fluids.nu1, cfg.fluids.nu2);

    State s;
    s.t = 0.0;
    s.rho = detail::make_scalar_profile(g, cfg.fluids.rho_profile, BoundaryKind::none,
                                        "fluids.rho_profile", cfg.seed_override);
    if (!(s.rho.min_value() > 0.0))
        throw config_error("fluids.rho_profile: initial density must be strictly positive (min = " +
                           std::to_string(s.rho.min_value()) + ")");
    s.phi = detail::make_scalar_profile(g, cfg.fluids.phi_profile, BoundaryKind::neumann_zero,
                                        "fluids.phi_profile", cfg.seed_override);

    const ProfileSpec& up = cfg.fluids.u_profile;
    VectorField u0(g);
    double grad_target = 0.0;
    if (up.kind == "zero") {
        detail::require_args(up, 0, "fluids.u_profile");
    } else if (up.kind == "taylor_green") {
        detail::require_args(up, 1, "fluids.u_profile");
        grad_target = up.args[0];
        if (!(grad_target >= 0.0))
            throw config_error("fluids.u_profile: taylor_green norm target must be >= 0");
        constexpr double pi = 3.14159265358979323846;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                u0.u_at(i, j) = std::sin(pi * g.xf(i) / g.lx) * std::cos(pi * g.yc(j) / g.ly);
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u0.v_at(i, j) = -(g.ly / g.lx) * std::cos(pi * g.xc(i) / g.lx) *
                                std::sin(pi * g.yf(j) / g.ly);
    } else {
        throw config_error("fluids.u_profile: unknown profile '" + up.kind + "'");
    }
    u0.zero_normal_boundary();

    s.p = ScalarField(g, BoundaryKind::neumann_zero);
    if (u0.max_abs_u() > 0.0 || u0.max_abs_v() > 0.0) {
        ProjectResult pr = project(s.rho, u0, 1.0, cfg.scheme.proj_tol, cfg.scheme.max_iter);
        s.u = std::move(pr.u);
        s.p = std::move(pr.p);
        if (grad_target > 0.0) {
            const double have = grad_u_l2(s.u);
            if (have > 0.0) {
                const double scale = grad_target / have;
                for (double& x : s.u.u) x *= scale;
                for (double& x : s.u.v) x *= scale;
                for (double& x : s.p.v) x *= scale;
            }
        }
    } else {
        s.u = std::move(u0);
    }

    s.mu = chemical_potential(s.rho, s.phi);

    InitialData out;
    out.diag = make_diag_record(s, law, cfg.scheme.serrin_r, 0.0);
    out.smallness.quantity = smallness_quantity(s);
    out.smallness.eps0_target = cfg.fluids.eps0;
    out.smallness.pass = out.smallness.quantity <= cfg.fluids.eps0;
    out.state = std::move(s);
    return out;
}

}  // namespace nsch

#include <catch2/catch_amalgamated.hpp>

#include "nsch/cahn_hilliard.hpp"
#include "nsch/momentum.hpp"
#include "test_helpers.hpp"

using namespace nsch;
using namespace nsch::testing;

TEST_CASE("korteweg force of a constant field vanishes") {
    const Grid g(16, 16, 1.0, 1.0);
    ScalarField phi(g, BoundaryKind::neumann_zero, 0.7);
    VectorField f = korteweg_force(phi);
    CHECK(f.max_abs_u() == 0.0);
    CHECK(f.max_abs_v() == 0.0);
    ScalarField bad(g, BoundaryKind::none, 0.7);
    CHECK_THROWS_AS(korteweg_force(bad), contract_error);
}

TEST_CASE("korteweg force of a linear field vanishes in the interior") {
    const Grid g(16, 16, 1.0, 1.0);
    ScalarField phi(g, BoundaryKind::neumann_zero);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) phi(i, j) = 0.8 * g.xc(i);
    VectorField f = korteweg_force(phi);
    for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 2; i < g.nx - 1; ++i)
            CHECK(std::abs(f.u_at(i, j)) < 1e-12);
}

TEST_CASE("korteweg force matches the chemical-potential form at second order") {
    const double r32 = korteweg_identity_residual(32);
    const double r64 = korteweg_identity_residual(64);
    CHECK(std::log2(r32 / r64) > 1.9);
}

TEST_CASE("quiescent uniform state stays quiescent through the predictor") {
    const Grid g(16, 16, 1.0, 1.0);
    State s;
    s.rho = ScalarField(g, BoundaryKind::none, 1.3);
    s.u = VectorField(g);
    s.p = ScalarField(g, BoundaryKind::neumann_zero);
    s.phi = ScalarField(g, BoundaryKind::neumann_zero, 0.6);
    s.mu = chemical_potential(s.rho, s.phi);
    const ViscosityLaw law(0.1, 0.2);
    VectorField u_star = predictor_step(s, law, 1e-3);
    CHECK(u_star.max_abs_u() == 0.0);
    CHECK(u_star.max_abs_v() == 0.0);
}

TEST_CASE("with zero velocity only the capillary term acts") {
    const Grid g(24, 24, 1.0, 1.0);
    State s;
    s.rho = ScalarField(g, BoundaryKind::none, 2.0);
    s.u = VectorField(g);
    s.p = ScalarField(g, BoundaryKind::neumann_zero);
    s.phi = ScalarField(g, BoundaryKind::neumann_zero);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) s.phi(i, j) = std::tanh((g.xc(i) - 0.5) / 0.15);
    s.mu = chemical_potential(s.rho, s.phi);
    const ViscosityLaw law(0.05, 0.05);
    const double dt = 1e-4;
    VectorField u_star = predictor_step(s, law, dt);
    const VectorField kf = korteweg_force(s.phi);
    const VectorField rho_f = interpolate_center_to_face(s.rho);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const std::size_t k = g.uidx(i, j);
            CHECK(u_star.u[k] == Catch::Approx(dt * kf.u[k] / rho_f.u[k]).margin(1e-15));
        }
}

TEST_CASE("predictor enforces the stated stability bounds") {
    const Grid g(16, 16, 1.0, 1.0);
    State s;
    s.rho = ScalarField(g, BoundaryKind::none, 1.0);
    s.u = swirl_velocity(g, 1.0);
    s.p = ScalarField(g, BoundaryKind::neumann_zero);
    s.phi = ScalarField(g, BoundaryKind::neumann_zero, 1.0);
    s.mu = chemical_potential(s.rho, s.phi);
    const ViscosityLaw law(0.5, 0.5);
    const double visc_bound = viscous_cfl_dt(s.rho, law, g);
    try {
        predictor_step(s, law, 2.0 * visc_bound);
        FAIL("expected cfl_error");
    } catch (const cfl_error& e) {
        CHECK(e.admissible_dt == Catch::Approx(visc_bound));
    }
}

TEST_CASE("projection leaves divergence-free fields untouched") {
    const Grid g(32, 32, 1.0, 1.0);
    ScalarField rho(g, BoundaryKind::none, 1.0);
    VectorField w = swirl_velocity(g, 1.0);
    ProjectResult pr = project(rho, w, 1e-2, 1e-10);
    CHECK(max_abs_diff(pr.u, w) < 1e-12);
    CHECK(max_abs(pr.p) < 1e-9);
    CHECK(std::abs(pr.p.mean()) < 1e-12);
}

TEST_CASE("projection annihilates pure gradients") {
    const Grid g(32, 32, 1.0, 1.0);
    std::mt19937_64 eng(81);
    ScalarField rho(g, BoundaryKind::none, 1.0);
    ScalarField gfield(g, BoundaryKind::neumann_zero);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            gfield(i, j) = std::cos(pi * g.xc(i) / g.lx) * std::cos(2.0 * pi * g.yc(j) / g.ly);
    const double gm = gfield.mean();
    for (double& x : gfield.v) x -= gm;
    VectorField w = gradient(gfield);
    const double dt = 0.05;
    ProjectResult pr = project(rho, w, dt, 1e-12);
    CHECK(pr.u.max_abs_u() < 1e-6);
    CHECK(pr.u.max_abs_v() < 1e-6);
    double perr = 0.0;
    for (std::size_t k = 0; k < gfield.v.size(); ++k)
        perr = std::max(perr, std::abs(dt * pr.p.v[k] - gfield.v[k]));
    CHECK(perr < 1e-6);
}

TEST_CASE("projection is idempotent") {
    const Grid g(24, 24, 1.0, 1.0);
    std::mt19937_64 eng(83);
    ScalarField rho = random_scalar(g, eng, BoundaryKind::none, 0.5, 2.0);
    VectorField w = random_velocity(g, eng);
    const double tol = 1e-11;
    ProjectResult p1 = project(rho, w, 1e-2, tol);
    ProjectResult p2 = project(rho, p1.u, 1e-2, tol);
    double scale = std::max(1.0, std::max(p1.u.max_abs_u(), p1.u.max_abs_v()));
    CHECK(max_abs_diff(p2.u, p1.u) <= 10.0 * tol * scale);
    CHECK(p2.u.normal_boundary_is_zero());
}

TEST_CASE("projection failure carries the solve report") {
    const Grid g(16, 16, 1.0, 1.0);
    std::mt19937_64 eng(85);
    ScalarField rho(g, BoundaryKind::none, 1.0);
    VectorField w = random_velocity(g, eng);
    try {
        project(rho, w, 1e-2, 1e-14, 2);
        FAIL("expected solver_error");
    } catch (const solver_error& e) {
        CHECK_FALSE(e.report.converged);
    }
}

TEST_CASE("predictor plus projection self-converges at first order in dt") {
    const Grid g(24, 24, 1.0, 1.0);
    ScalarField rho(g, BoundaryKind::none, 1.0);
    ScalarField phi(g, BoundaryKind::neumann_zero, 1.0);
    const ViscosityLaw law(0.02, 0.02);
    const double t_final = 2e-3;

    auto advance = [&](int steps) {
        State s;
        s.rho = rho;
        s.u = swirl_velocity(g, 1.0);
        s.p = ScalarField(g, BoundaryKind::neumann_zero);
        s.phi = phi;
        s.mu = chemical_potential(rho, phi);
        const double dt = t_final / steps;
        for (int k = 0; k < steps; ++k) {
            VectorField u_star = predictor_step(s, law, dt);
            ProjectResult pr = project(s.rho, u_star, dt, 1e-12);
            s.u = std::move(pr.u);
            s.p = std::move(pr.p);
        }
        return s.u;
    };

    const VectorField u1 = advance(4);
    const VectorField u2 = advance(8);
    const VectorField u4 = advance(16);
    const double e12 = max_abs_diff(u1, u2);
    const double e24 = max_abs_diff(u2, u4);
    CHECK(e24 <= 0.6 * e12);
}

#include <catch2/catch_amalgamated.hpp>

#include "nsch/elliptic.hpp"
#include "test_helpers.hpp"

using namespace nsch;
using namespace nsch::testing;

namespace {

LinearOperator identity_op(const Grid& g) {
    LinearOperator op;
    op.name = "identity";
    op.apply = [g](const ScalarField& x, ScalarField& y) {
        y.grid = g;
        y.v = x.v;
    };
    return op;
}

VectorField unit_coef(const Grid& g, double c = 1.0) {
    VectorField w(g);
    for (double& x : w.u) x = c;
    for (double& x : w.v) x = c;
    return w;
}

}  // namespace

TEST_CASE("CG solves the identity in one iteration") {
    const Grid g(16, 16, 1.0, 1.0);
    std::mt19937_64 eng(31);
    ScalarField b = random_scalar(g, eng, BoundaryKind::none);
    auto [x, rep] = solve_cg(identity_op(g), b, 1e-12, 100);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(max_abs_diff(x, b) < 1e-12);
}

TEST_CASE("CG returns zero for zero right-hand side without iterating") {
    const Grid g(8, 8, 1.0, 1.0);
    ScalarField b(g);
    auto [x, rep] = solve_cg(identity_op(g), b, 1e-12, 100);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(max_abs(x) == 0.0);
}

TEST_CASE("CG inverts the Neumann Laplacian on an exact eigenfield") {
    const Grid g(32, 32, 1.0, 1.0);
    ScalarField b(g, BoundaryKind::neumann_zero);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) b(i, j) = std::cos(pi * g.xc(i) / g.lx);
    // discrete eigenvalue of -laplacian for this mode
    const double lam = std::pow(2.0 / g.hx * std::sin(pi * g.hx / (2.0 * g.lx)), 2);

    LinearOperator A = negated(make_variable_poisson(unit_coef(g), BoundaryKind::neumann_zero));
    auto [x, rep] = solve_cg(A, b, 1e-12, 2000);
    REQUIRE(rep.converged);
    double err = 0.0;
    for (std::size_t k = 0; k < x.v.size(); ++k)
        err = std::max(err, std::abs(x.v[k] - b.v[k] / lam));
    CHECK(err < 1e-8);
    CHECK(std::abs(x.mean()) < 1e-12);
}

TEST_CASE("CG residual history is monotonically non-increasing") {
    const Grid g(24, 24, 1.0, 1.0);
    std::mt19937_64 eng(33);
    VectorField coef = unit_coef(g);
    for (double& c : coef.u) c = uniform(eng, 0.5, 2.0);
    for (double& c : coef.v) c = uniform(eng, 0.5, 2.0);
    LinearOperator A = negated(make_variable_poisson(coef, BoundaryKind::neumann_zero));
    ScalarField b = random_scalar(g, eng, BoundaryKind::none);
    auto [x, rep] = solve_cg(A, b, 1e-11, 5000);
    REQUIRE(rep.converged);
    REQUIRE(rep.residual_history.size() >= 2);
    for (std::size_t k = 1; k < rep.residual_history.size(); ++k)
        CHECK(rep.residual_history[k] <= rep.residual_history[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("pure-Neumann solves return mean-zero solutions that reproduce b") {
    const Grid g(20, 20, 1.0, 1.0);
    std::mt19937_64 eng(35);
    LinearOperator A = negated(make_variable_poisson(unit_coef(g), BoundaryKind::neumann_zero));
    ScalarField b = random_scalar(g, eng, BoundaryKind::none);
    const double tol = 1e-10;
    auto [x, rep] = solve_cg(A, b, tol, 5000);
    REQUIRE(rep.converged);
    CHECK(std::abs(x.mean()) < 1e-12);

    ScalarField ax = A(x);
    ScalarField b0 = b;
    const double bm = b0.mean();
    for (double& t : b0.v) t -= bm;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < ax.v.size(); ++k) {
        num += (ax.v[k] - b0.v[k]) * (ax.v[k] - b0.v[k]);
        den += b0.v[k] * b0.v[k];
    }
    CHECK(std::sqrt(num / den) <= 2.0 * tol);
}

TEST_CASE("make_variable_poisson reduces to the Laplacian for unit coefficient") {
    const Grid g(16, 16, 1.2, 0.8);
    std::mt19937_64 eng(37);
    LinearOperator A1 = make_variable_poisson(unit_coef(g, 1.0), BoundaryKind::neumann_zero);
    LinearOperator A2 = make_variable_poisson(unit_coef(g, 2.0), BoundaryKind::neumann_zero);
    CHECK(A1.constants_nullspace);
    for (int rep = 0; rep < 5; ++rep) {
        ScalarField f = random_scalar(g, eng);
        ScalarField lap = laplacian(f);
        ScalarField a1 = A1(f);
        ScalarField a2 = A2(f);
        CHECK(max_abs_diff(a1, lap) < 1e-14 * std::max(1.0, max_abs(lap)));
        for (std::size_t k = 0; k < a2.v.size(); ++k)
            CHECK(a2.v[k] == Catch::Approx(2.0 * lap.v[k]).margin(1e-12));
    }
}

TEST_CASE("variable-coefficient operator is symmetric and negative semi-definite") {
    const Grid g(12, 12, 1.0, 1.0);
    std::mt19937_64 eng(39);
    VectorField coef = unit_coef(g);
    for (double& c : coef.u) c = uniform(eng, 0.1, 3.0);
    for (double& c : coef.v) c = uniform(eng, 0.1, 3.0);
    LinearOperator A = make_variable_poisson(coef, BoundaryKind::neumann_zero);
    for (int rep = 0; rep < 10; ++rep) {
        ScalarField f = random_scalar(g, eng);
        ScalarField h = random_scalar(g, eng);
        const double afh = inner_centers(A(f), h);
        const double fah = inner_centers(f, A(h));
        CHECK(std::abs(afh - fah) <= 1e-10 * std::max({std::abs(afh), std::abs(fah), 1.0}));
        CHECK(inner_centers(A(f), f) <= 1e-12);
    }
}

TEST_CASE("non-positive coefficients are rejected with the face named") {
    const Grid g(8, 8, 1.0, 1.0);
    VectorField coef = unit_coef(g);
    coef.u[g.uidx(3, 5)] = 0.0;
    try {
        make_variable_poisson(coef, BoundaryKind::neumann_zero);
        FAIL("expected contract_error");
    } catch (const contract_error& e) {
        CHECK(std::string(e.what()).find("(3,5)") != std::string::npos);
    }
}

TEST_CASE("CG reports divergence on a broken operator") {
    const Grid g(8, 8, 1.0, 1.0);
    LinearOperator bad;
    bad.name = "broken";
    bad.apply = [g](const ScalarField&, ScalarField& y) {
        y.grid = g;
        y.v.assign(static_cast<std::size_t>(g.cells()),
                   std::numeric_limits<double>::infinity());
    };
    ScalarField b(g, BoundaryKind::none, 1.0);
    try {
        solve_cg(bad, b, 1e-10, 10);
        FAIL("expected solver_error");
    } catch (const solver_error& e) {
        CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
}

TEST_CASE("CG reports non-convergence when max_iter is exhausted") {
    const Grid g(16, 16, 1.0, 1.0);
    std::mt19937_64 eng(41);
    LinearOperator A = negated(make_variable_poisson(unit_coef(g), BoundaryKind::neumann_zero));
    ScalarField b = random_scalar(g, eng, BoundaryKind::none);
    auto [x, rep] = solve_cg(A, b, 1e-14, 2);
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 2);
    CHECK(rep.final_residual > 1e-14);
}

TEST_CASE("warm starts converge immediately on the solved system") {
    const Grid g(16, 16, 1.0, 1.0);
    std::mt19937_64 eng(43);
    LinearOperator A = negated(make_variable_poisson(unit_coef(g), BoundaryKind::neumann_zero));
    ScalarField b = random_scalar(g, eng, BoundaryKind::none);
    auto [x, rep] = solve_cg(A, b, 1e-11, 5000);
    REQUIRE(rep.converged);
    auto [x2, rep2] = solve_cg(A, b, 1e-10, 5000, x);
    CHECK(rep2.converged);
    CHECK(rep2.iterations <= 1);
}

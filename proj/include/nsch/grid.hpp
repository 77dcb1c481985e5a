#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nsch/errors.hpp"

namespace nsch {

/// Ghost-cell convention applied by the discrete operators.
/// neumann_zero mirrors the first interior cell (zero normal derivative),
/// dirichlet_zero reflects it oddly (zero boundary value).
enum class BoundaryKind { none, neumann_zero, dirichlet_zero };

/// Uniform rectangular MAC mesh. Scalars live at cell centers,
/// velocity components at the faces normal to them.
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    double hx = 0.0;
    double hy = 0.0;
    static constexpr int dim = 2;

    Grid() = default;
    Grid(int nx_, int ny_, double lx_, double ly_)
        : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
        if (nx < 4 || ny < 4)
            throw contract_error("Grid: cell counts must be >= 4 (got " +
                                 std::to_string(nx) + "x" + std::to_string(ny) + ")");
        if (!(lx > 0.0) || !(ly > 0.0))
            throw contract_error("Grid: domain extents must be positive");
        hx = lx / nx;
        hy = ly / ny;
    }

    // cell-center and face coordinates
    double xc(int i) const { return (i + 0.5) * hx; }
    double yc(int j) const { return (j + 0.5) * hy; }
    double xf(int i) const { return i * hx; }
    double yf(int j) const { return j * hy; }

    int cells() const { return nx * ny; }
    double cell_volume() const { return hx * hy; }

    std::size_t cidx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    // u-faces: (nx+1) x ny, v-faces: nx x (ny+1)
    std::size_t uidx(int i, int j) const { return static_cast<std::size_t>(j) * (nx + 1) + i; }
    std::size_t vidx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    bool same_as(const Grid& o) const {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!a.same_as(b))
        throw contract_error(std::string(where) + ": grid mismatch");
}

/// Cell-centered scalar field with an attached ghosting convention.
struct ScalarField {
    Grid grid;
    BoundaryKind bc = BoundaryKind::none;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, BoundaryKind bk = BoundaryKind::none, double init = 0.0)
        : grid(g), bc(bk), v(static_cast<std::size_t>(g.cells()), init) {}

    double& operator()(int i, int j) { return v[grid.cidx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.cidx(i, j)]; }

    /// Value at (i, j) with one layer of ghost cells, -1 <= i <= nx.
    double ghost(int i, int j) const {
        const int nx = grid.nx, ny = grid.ny;
        bool outside = (i < 0 || i >= nx || j < 0 || j >= ny);
        if (!outside) return v[grid.cidx(i, j)];
        if (bc == BoundaryKind::none)
            throw contract_error("ScalarField: ghost access requires a boundary kind");
        const int ii = std::clamp(i, 0, nx - 1);
        const int jj = std::clamp(j, 0, ny - 1);
        const double inner = v[grid.cidx(ii, jj)];
        return bc == BoundaryKind::neumann_zero ? inner : -inner;
    }

    double min_value() const {
        double m = v[0];
        for (double x : v) m = std::min(m, x);
        return m;
    }
    double max_value() const {
        double m = v[0];
        for (double x : v) m = std::max(m, x);
        return m;
    }
    double sum() const {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    double sum_abs() const {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    double mean() const { return sum() / static_cast<double>(v.size()); }

    bool is_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

/// Staggered vector field: u on vertical faces, v on horizontal faces.
struct VectorField {
    Grid grid;
    std::vector<double> u;  // (nx+1) * ny
    std::vector<double> v;  // nx * (ny+1)

    VectorField() = default;
    explicit VectorField(const Grid& g)
        : grid(g),
          u(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0),
          v(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0) {}

    double& u_at(int i, int j) { return u[grid.uidx(i, j)]; }
    double u_at(int i, int j) const { return u[grid.uidx(i, j)]; }
    double& v_at(int i, int j) { return v[grid.vidx(i, j)]; }
    double v_at(int i, int j) const { return v[grid.vidx(i, j)]; }

    /// Force the no-slip normal components: boundary faces exactly zero.
    void zero_normal_boundary() {
        for (int j = 0; j < grid.ny; ++j) {
            u[grid.uidx(0, j)] = 0.0;
            u[grid.uidx(grid.nx, j)] = 0.0;
        }
        for (int i = 0; i < grid.nx; ++i) {
            v[grid.vidx(i, 0)] = 0.0;
            v[grid.vidx(i, grid.ny)] = 0.0;
        }
    }

    bool normal_boundary_is_zero() const {
        for (int j = 0; j < grid.ny; ++j)
            if (u[grid.uidx(0, j)] != 0.0 || u[grid.uidx(grid.nx, j)] != 0.0) return false;
        for (int i = 0; i < grid.nx; ++i)
            if (v[grid.vidx(i, 0)] != 0.0 || v[grid.vidx(i, grid.ny)] != 0.0) return false;
        return true;
    }

    double max_abs_u() const {
        double m = 0.0;
        for (double x : u) m = std::max(m, std::abs(x));
        return m;
    }
    double max_abs_v() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    bool is_finite() const {
        for (double x : u)
            if (!std::isfinite(x)) return false;
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline void ensure_finite(const ScalarField& f, const char* op) {
    if (!f.is_finite())
        throw std::runtime_error(std::string(op) + ": produced a non-finite value");
}

inline void ensure_finite(const VectorField& f, const char* op) {
    if (!f.is_finite())
        throw std::runtime_error(std::string(op) + ": produced a non-finite value");
}

/// One time slice of the coupled system.
struct State {
    double t = 0.0;
    ScalarField rho;
    VectorField u;
    ScalarField p;
    ScalarField phi;
    ScalarField mu;
};

}  // namespace nsch

#pragma once

// Uniform node grids on rectangles with link phases from a vector potential
// whose x-component depends on y only and whose y-component depends on x only.
// Both the strip gauge (-x2^2/2, 0) and the symmetric gauge (-x2/2, x1/2) are
// of this form, which makes half-edge transport exactly half the edge phase.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>

#include "glzero/error.hpp"
#include "glzero/lattice.hpp"

namespace glzero::rect {

using lattice::cplx;
using lattice::Field;

struct RectGrid {
    double x0 = 0.0, y0 = 0.0;  ///< lower-left corner
    double lx = 1.0, ly = 1.0;  ///< side lengths
    std::size_t nx = 3, ny = 3;

    RectGrid() = default;
    RectGrid(double x0_, double y0_, double lx_, double ly_, std::size_t nx_, std::size_t ny_)
        : x0(x0_), y0(y0_), lx(lx_), ly(ly_), nx(nx_), ny(ny_) {
        require(std::isfinite(lx) && lx > 0.0 && std::isfinite(ly) && ly > 0.0, "RectGrid: side lengths must be positive");
        require(nx >= 3 && ny >= 3, "RectGrid: need at least 3 nodes per direction");
    }

    double hx() const { return lx / static_cast<double>(nx - 1); }
    double hy() const { return ly / static_cast<double>(ny - 1); }
    double x(std::size_t i) const { return x0 + lx * static_cast<double>(i) / static_cast<double>(nx - 1); }
    double y(std::size_t j) const { return y0 + ly * static_cast<double>(j) / static_cast<double>(ny - 1); }
    std::size_t index(std::size_t i, std::size_t j) const { return i + nx * j; }
    std::size_t size() const { return nx * ny; }
    bool boundary(std::size_t i, std::size_t j) const { return i == 0 || j == 0 || i + 1 == nx || j + 1 == ny; }

    RectGrid refined() const { return RectGrid(x0, y0, lx, ly, 2 * nx - 1, 2 * ny - 1); }
    std::optional<RectGrid> coarsened() const {
        if ((nx - 1) % 2 || (ny - 1) % 2 || nx < 5 || ny < 5) return std::nullopt;
        return RectGrid(x0, y0, lx, ly, (nx - 1) / 2 + 1, (ny - 1) / 2 + 1);
    }
};

/// Line integrals of A along the edge from (x, y) to (x + h, y) and from
/// (x, y) to (x, y + h).
struct Gauge {
    std::function<double(double x, double y, double h)> along_x;
    std::function<double(double x, double y, double h)> along_y;
};

inline Gauge strip_gauge() {
    return {[](double, double y, double h) { return -0.5 * y * y * h; }, [](double, double, double) { return 0.0; }};
}

inline Gauge symmetric_gauge() {
    return {[](double, double y, double h) { return -0.5 * y * h; }, [](double x, double, double h) { return 0.5 * x * h; }};
}

enum class Boundary { Dirichlet, Neumann };

/// Dirichlet pins the boundary nodes. Neumann keeps them free with half
/// (edge) or quarter (corner) areas and half weights on boundary edges, so
/// that the quadrature is the trapezoid rule on the rectangle. `pin` marks
/// extra nodes held at zero.
inline lattice::Lattice build(const RectGrid& g, const Gauge& A, Boundary bc,
                              const std::function<bool(double, double)>& pin = {}) {
    lattice::Lattice lat;
    const double hx = g.hx(), hy = g.hy();
    lat.area.assign(g.size(), hx * hy);
    lat.pinned.assign(g.size(), 0);
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const bool ex = i == 0 || i + 1 == g.nx, ey = j == 0 || j + 1 == g.ny;
            if (bc == Boundary::Dirichlet) {
                lat.pinned[k] = (ex || ey) ? 1 : 0;
            } else {
                lat.area[k] *= (ex ? 0.5 : 1.0) * (ey ? 0.5 : 1.0);
            }
            if (pin && pin(g.x(i), g.y(j))) lat.pinned[k] = 1;
        }
    auto live = [&](std::size_t a, std::size_t b) { return !lat.pinned[a] || !lat.pinned[b]; };
    lat.edges.reserve(2 * g.size());
    for (std::size_t j = 0; j < g.ny; ++j) {
        const bool ey = j == 0 || j + 1 == g.ny;
        for (std::size_t i = 0; i < g.nx; ++i) {
            const bool ex = i == 0 || i + 1 == g.nx;
            const std::size_t a = g.index(i, j);
            if (i + 1 < g.nx && live(a, g.index(i + 1, j))) {
                const double w = hy / hx * (bc == Boundary::Neumann && ey ? 0.5 : 1.0);
                lat.edges.emplace_back(a, g.index(i + 1, j), w, A.along_x(g.x(i), g.y(j), hx));
            }
            if (j + 1 < g.ny && live(a, g.index(i, j + 1))) {
                const double w = hx / hy * (bc == Boundary::Neumann && ex ? 0.5 : 1.0);
                lat.edges.emplace_back(a, g.index(i, j + 1), w, A.along_y(g.x(i), g.y(j), hy));
            }
        }
    }
    return lat;
}

/// Interpolate a field from `coarse` onto coarse.refined(): new nodes are
/// averages of their two neighbours after transporting each over half an edge.
inline Field prolong(const RectGrid& coarse, const Field& u, const Gauge& A) {
    const RectGrid fine = coarse.refined();
    require(u.size() == coarse.size(), "prolong: field shape mismatch");
    const double hx = coarse.hx(), hy = coarse.hy();
    auto at = [&](std::size_t i, std::size_t j) { return u[coarse.index(i, j)]; };
    auto avg = [](cplx a, cplx b, double theta) {
        return 0.5 * (a * std::polar(1.0, 0.5 * theta) + b * std::polar(1.0, -0.5 * theta));
    };
    auto mid_x = [&](std::size_t i, std::size_t j) {
        return avg(at(i, j), at(i + 1, j), A.along_x(coarse.x(i), coarse.y(j), hx));
    };
    Field out(fine.size());
    for (std::size_t J = 0; J < fine.ny; ++J)
        for (std::size_t I = 0; I < fine.nx; ++I) {
            const std::size_t i = I / 2, j = J / 2;
            cplx v;
            if (I % 2 == 0 && J % 2 == 0) {
                v = at(i, j);
            } else if (J % 2 == 0) {
                v = mid_x(i, j);
            } else if (I % 2 == 0) {
                v = avg(at(i, j), at(i, j + 1), A.along_y(coarse.x(i), coarse.y(j), hy));
            } else {
                const double xm = 0.5 * (coarse.x(i) + coarse.x(i + 1));
                v = avg(mid_x(i, j), mid_x(i, j + 1), A.along_y(xm, coarse.y(j), hy));
            }
            out[fine.index(I, J)] = v;
        }
    return out;
}

} // namespace glzero::rect

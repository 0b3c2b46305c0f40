#pragma once

// Constant-field cell problem on Q_r = (-r/2, r/2)^2 with A0 = (-x2, x1)/2:
// F(u) = int b|(grad - iA0)u|^2 - |u|^2 + |u|^4/2, Dirichlet or Neumann.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "glzero/error.hpp"
#include "glzero/lattice.hpp"
#include "glzero/ncg.hpp"
#include "glzero/rect.hpp"
#include "glzero/rng.hpp"

namespace glzero::cell {

using lattice::cplx;
using lattice::Field;
using rect::Boundary;
using rect::RectGrid;

inline const char* to_string(Boundary bc) { return bc == Boundary::Dirichlet ? "dirichlet" : "neumann"; }

/// Even number of cells per unit length, spacing <= min(1/8, sqrt(b)/4).
inline std::size_t cells_per_unit(double b) {
    const double h = std::min(0.125, std::sqrt(b) / 4.0);
    return 2 * static_cast<std::size_t>(std::ceil(0.5 / h - 1e-9));
}

inline RectGrid cell_grid(double b, double r) {
    require(std::isfinite(b) && b > 0.0, "cell: b must be positive");
    require(std::isfinite(r) && r > 0.0, "cell: r must be positive");
    const auto cells = static_cast<std::size_t>(std::ceil(r * static_cast<double>(cells_per_unit(b)) - 1e-9));
    const std::size_t n = cells + cells % 2 + 1;
    return RectGrid(-0.5 * r, -0.5 * r, r, r, n, n);
}

inline lattice::Coefficients coefficients(double b) { return {b, 1.0, 1.0}; }

inline lattice::Lattice build_lattice(const RectGrid& g, Boundary bc) {
    return rect::build(g, rect::symmetric_gauge(), bc);
}

inline double cell_energy(const Field& u, double b, const RectGrid& g, Boundary bc) {
    require(std::isfinite(b) && b > 0.0, "cell_energy: b must be positive");
    require(u.size() == g.size(), "cell_energy: field shape mismatch");
    if (bc == Boundary::Dirichlet)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                if (g.boundary(i, j) && u[g.index(i, j)] != cplx{})
                    throw ValidationError("cell_energy: Dirichlet field must vanish on the boundary");
    return lattice::energy(build_lattice(g, bc), coefficients(b), u);
}

/// Energy on the default grid for (b, r).
inline double cell_energy(const Field& u, double b, double r, Boundary bc) {
    return cell_energy(u, b, cell_grid(b, r), bc);
}

struct CellMinimizer {
    Field u;
    double b = 0.0;
    double r = 0.0;
    Boundary bc = Boundary::Dirichlet;
    RectGrid grid;
    double energy = 0.0;
    double residual = 0.0;
    double sup_u = 0.0;
    std::size_t iterations = 0;
    bool collapsed = false;
};

struct CellOptions {
    double tol = 1e-4;
    std::size_t max_iter = 100000;
    std::uint64_t seed = 1;
};

/// sqrt((1 - b)_+) plus complex noise of amplitude 0.1 on free nodes.
inline Field default_seed(double b, const RectGrid& g, Boundary bc, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const double a = std::sqrt(std::max(0.0, 1.0 - b));
    Field u(g.size());
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double re = rng.symmetric(), im = rng.symmetric();
            if (bc == Boundary::Dirichlet && g.boundary(i, j)) continue;
            u[g.index(i, j)] = a + 0.1 * cplx(re, im);
        }
    return u;
}

/// Single-level descent from `seed` on grid g.
inline CellMinimizer minimize_on(double b, double r, Boundary bc, const RectGrid& g, Field seed,
                                 const CellOptions& opt = {}) {
    require(std::isfinite(b) && b > 0.0, "minimize_cell: b must be positive");
    require(opt.tol > 0.0, "minimize_cell: tol must be positive");
    require(seed.size() == g.size(), "minimize_cell: seed shape mismatch");
    const lattice::Lattice lat = build_lattice(g, bc);
    lattice::NcgOptions no;
    no.tol = opt.tol;
    no.max_iter = opt.max_iter;
    const lattice::NcgResult res = lattice::minimize_ncg(lat, coefficients(b), seed, no);
    if (!res.converged)
        throw SolverError("minimize_cell: no convergence for b=" + std::to_string(b) + " r=" + std::to_string(r) + " (" +
                          to_string(bc) + ") after " + std::to_string(res.iterations) + " iterations (residual " +
                          std::to_string(res.residual) + ")");
    CellMinimizer m;
    m.u = std::move(seed);
    m.b = b;
    m.r = r;
    m.bc = bc;
    m.grid = g;
    m.energy = res.energy;
    m.residual = res.residual;
    m.sup_u = lattice::sup_norm(m.u);
    m.iterations = res.iterations;
    m.collapsed = res.collapsed;
    return m;
}

/// Nested iteration on the default grid: solve at twice the spacing from
/// `coarse_seed` (default seed when empty), interpolate, finish.
inline std::pair<CellMinimizer, std::optional<CellMinimizer>> minimize_two_level(double b, double r, Boundary bc,
                                                                                Field coarse_seed,
                                                                                const CellOptions& opt = {}) {
    const RectGrid g = cell_grid(b, r);
    const auto cg = g.coarsened();
    if (!cg) {
        if (coarse_seed.empty()) coarse_seed = default_seed(b, g, bc, opt.seed);
        return {minimize_on(b, r, bc, g, std::move(coarse_seed), opt), std::nullopt};
    }
    if (coarse_seed.empty()) coarse_seed = default_seed(b, *cg, bc, opt.seed);
    CellMinimizer mc = minimize_on(b, r, bc, *cg, std::move(coarse_seed), opt);
    CellMinimizer mf = minimize_on(b, r, bc, g, rect::prolong(*cg, mc.u, rect::symmetric_gauge()), opt);
    return {std::move(mf), std::move(mc)};
}

inline CellMinimizer minimize_cell(double b, double r, Boundary bc, const CellOptions& opt = {}) {
    require(std::isfinite(r) && r >= 1.0, "minimize_cell: r must be >= 1");
    return minimize_two_level(b, r, bc, Field{}, opt).first;
}

/// Magnetic translate u(x - a) e^{i(a1 x2 - a2 x1)/2}; exact for the lattice
/// phases when a is a multiple of the spacing.
inline cplx translation_phase(double a1, double a2, double x1, double x2) {
    return std::polar(1.0, 0.5 * (a1 * x2 - a2 * x1));
}

/// Four magnetic translates of a minimizer on Q_r placed in the quadrants of
/// Q_{2r}. Empty when the grids do not align.
inline Field tile_quadrants(const CellMinimizer& m, const RectGrid& target) {
    const RectGrid& s = m.grid;
    const std::size_t cells = s.nx - 1;
    if (target.nx - 1 != 2 * cells || target.ny != target.nx || s.ny != s.nx) return {};
    if (std::abs(target.hx() - s.hx()) > 1e-12 * s.hx()) return {};
    const double q = 0.5 * s.lx;
    Field u(target.size());
    for (std::size_t J = 0; J < target.ny; ++J)
        for (std::size_t I = 0; I < target.nx; ++I) {
            const std::size_t i = I < cells ? I : I - cells, j = J < cells ? J : J - cells;
            const double a1 = I < cells ? -q : q, a2 = J < cells ? -q : q;
            u[target.index(I, J)] = m.u[s.index(i, j)] * translation_phase(a1, a2, target.x(I), target.y(J));
        }
    return u;
}

struct GRow {
    double b = 0.0;
    double g_est = 0.0;
    double envelope = 0.0;  ///< sqrt(b)/r_max
    std::vector<double> r_list;
    std::vector<double> e_D;
    std::vector<double> e_N;
    double fit_c = 0.0;
};

using GTable = std::vector<GRow>;

/// e_D and e_N along r_list. Dirichlet solves after the first start on the
/// coarse level from tiled translates when r doubles. Neumann solves start on
/// the coarse level from the coarse Dirichlet minimizer; if the result lies
/// above e_D, the fine Neumann solve is redone from the Dirichlet minimizer,
/// which makes e_N <= e_D hold by descent.
inline GRow cell_ladder(double b, const std::vector<double>& r_list, const CellOptions& opt = {},
                        bool with_neumann = true) {
    require(std::isfinite(b) && b > 0.0, "estimate_g: b must be positive");
    require(!r_list.empty(), "estimate_g: empty r_list");
    require(r_list.front() >= 1.0, "estimate_g: r values must be >= 1");
    for (std::size_t k = 1; k < r_list.size(); ++k) require(r_list[k] > r_list[k - 1], "estimate_g: r_list must increase");
    GRow row;
    row.b = b;
    row.r_list = r_list;
    std::optional<CellMinimizer> prev;
    for (double r : r_list) {
        Field seed;
        if (prev && !prev->collapsed && std::abs(r - 2.0 * prev->r) < 1e-12) {
            if (const auto cg = cell_grid(b, r).coarsened()) seed = tile_quadrants(*prev, *cg);
        }
        auto [fine, coarse] = minimize_two_level(b, r, Boundary::Dirichlet, std::move(seed), opt);
        row.e_D.push_back(fine.energy);
        if (with_neumann) {
            Field nseed = coarse ? coarse->u : Field{};
            double e_n = minimize_two_level(b, r, Boundary::Neumann, std::move(nseed), opt).first.energy;
            if (e_n > fine.energy) e_n = std::min(e_n, minimize_on(b, r, Boundary::Neumann, fine.grid, fine.u, opt).energy);
            row.e_N.push_back(e_n);
        }
        prev = std::move(coarse);
    }
    return row;
}

/// Least-squares fit e_D/r^2 = g + c/r over r_list.
inline GRow fit_g(GRow row, double tol) {
    const std::size_t n = row.r_list.size();
    require(n >= 2, "estimate_g: need at least 2 r values");
    std::vector<double> x, y;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        x.push_back(1.0 / row.r_list[k]);
        y.push_back(row.e_D[k] / (row.r_list[k] * row.r_list[k]));
        scale = std::max(scale, std::abs(y.back()));
    }
    row.envelope = std::sqrt(row.b) / row.r_list.back();
    if (scale == 0.0) return row;
    for (std::size_t k = 1; k < n; ++k)
        if (y[k] > y[k - 1] + 0.05 * scale + tol)
            throw SolverError("estimate_g: e_D/r^2 not monotone in r at b=" + std::to_string(row.b) +
                              " (unconverged inner solves?)");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double dn = static_cast<double>(n);
    const double c = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    row.fit_c = c;
    row.g_est = std::min(0.0, (sy - c * sx) / dn);
    return row;
}

inline GRow estimate_g(double b, const std::vector<double>& r_list, const CellOptions& opt = {},
                       bool with_neumann = true) {
    return fit_g(cell_ladder(b, r_list, opt, with_neumann), opt.tol);
}

/// b values lo, ..., hi evenly spaced.
inline std::vector<double> b_samples(double lo, double hi, std::size_t samples) {
    require(samples >= 1 && lo > 0.0 && hi >= lo, "cell: bad b range");
    std::vector<double> b;
    for (std::size_t k = 0; k < samples; ++k)
        b.push_back(samples == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1));
    return b;
}

} // namespace glzero::cell

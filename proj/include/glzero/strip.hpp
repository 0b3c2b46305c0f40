#pragma once

// Reduced GL functional on the strip (-R, R) x (-M, M) with A = (-x2^2/2, 0),
// its thermodynamic limit E(L), and the disc variant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glzero/energy1d.hpp"
#include "glzero/error.hpp"
#include "glzero/lattice.hpp"
#include "glzero/montgomery.hpp"
#include "glzero/ncg.hpp"
#include "glzero/rect.hpp"
#include "glzero/rng.hpp"

namespace glzero::strip {

using lattice::cplx;
using lattice::Field;

inline double beta(double L) { return std::pow(L, -2.0 / 3.0); }

/// L above which the strip energy vanishes: lambda0^{-3/2}.
inline double trivial_threshold(double lambda0) { return std::pow(lambda0, -1.5); }

/// Node grid on [-R, R] x [-M, M]; boundary nodes carry Dirichlet zeros.
struct StripGrid {
    double R = 0.0;
    double M = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;

    StripGrid() = default;
    StripGrid(double R_, double M_, std::size_t nx_, std::size_t ny_) : R(R_), M(M_), nx(nx_), ny(ny_) {
        require(std::isfinite(R) && R > 0.0, "StripGrid: R must be positive");
        require(std::isfinite(M) && M > 0.0, "StripGrid: M must be positive");
        require(nx >= 3 && ny >= 3, "StripGrid: need at least 3 nodes per direction");
    }

    double hx() const { return 2.0 * R / static_cast<double>(nx - 1); }
    double hy() const { return 2.0 * M / static_cast<double>(ny - 1); }
    double x1(std::size_t i) const {
        return (2.0 * static_cast<double>(i) - static_cast<double>(nx - 1)) * R / static_cast<double>(nx - 1);
    }
    double x2(std::size_t j) const {
        return (2.0 * static_cast<double>(j) - static_cast<double>(ny - 1)) * M / static_cast<double>(ny - 1);
    }
    std::size_t index(std::size_t i, std::size_t j) const { return i + nx * j; }
    std::size_t size() const { return nx * ny; }
    bool boundary(std::size_t i, std::size_t j) const { return i == 0 || j == 0 || i + 1 == nx || j + 1 == ny; }
    rect::RectGrid rect() const { return rect::RectGrid(-R, -M, 2.0 * R, 2.0 * M, nx, ny); }
};

/// Transverse truncation M = 4 max(2, L^{-2/3}) + 6.
inline double default_truncation(double L) { return 4.0 * std::max(2.0, beta(L)) + 6.0; }

/// Default policy: spacing <= h, with an even number of cells per direction
/// so the grid is the exact 2x refinement of a grid with spacing <= 2h.
inline StripGrid default_grid(double L, double R, double h = 0.1, double M = 0.0) {
    require(L > 0.0 && std::isfinite(L), "strip: L must be positive");
    require(h > 0.0, "strip: spacing must be positive");
    if (M <= 0.0) M = default_truncation(L);
    const auto cx = static_cast<std::size_t>(std::ceil(R / h - 1e-9));
    const auto cy = static_cast<std::size_t>(std::ceil(M / h - 1e-9));
    return StripGrid(R, M, 2 * cx + 1, 2 * cy + 1);
}

inline StripGrid refine(const StripGrid& g) { return StripGrid(g.R, g.M, 2 * g.nx - 1, 2 * g.ny - 1); }

/// Grid with every other node, when that still has at least 3 nodes per direction.
inline std::optional<StripGrid> coarsen(const StripGrid& g) {
    if ((g.nx - 1) % 2 || (g.ny - 1) % 2 || g.nx < 5 || g.ny < 5) return std::nullopt;
    return StripGrid(g.R, g.M, (g.nx - 1) / 2 + 1, (g.ny - 1) / 2 + 1);
}

/// Peierls lattice for A = (-x2^2/2, 0). Nodes with |x| >= disc_radius are
/// pinned as well when disc_radius > 0.
inline lattice::Lattice build_lattice(const StripGrid& g, double disc_radius = 0.0) {
    std::function<bool(double, double)> pin;
    if (disc_radius > 0.0) pin = [disc_radius](double x, double y) { return std::hypot(x, y) >= disc_radius; };
    return rect::build(g.rect(), rect::strip_gauge(), rect::Boundary::Dirichlet, pin);
}

inline lattice::Coefficients coefficients(double L) {
    const double b = beta(L);
    return {1.0, b, b};
}

inline double strip_energy(const Field& u, double L, const StripGrid& g) {
    require(L > 0.0 && std::isfinite(L), "strip_energy: L must be positive");
    require(u.size() == g.size(), "strip_energy: field shape mismatch");
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i)
            if (g.boundary(i, j) && u[g.index(i, j)] != cplx{})
                throw ValidationError("strip_energy: field must vanish on the boundary");
    return lattice::energy(build_lattice(g), coefficients(L), u);
}

/// Smooth cutoff: 1 on |s| <= 1/2, 0 on |s| >= 1.
inline double cutoff(double s) {
    auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double a = f(1.0 - std::abs(s)), b = f(std::abs(s) - 0.5);
    return a + b > 0.0 ? a / (a + b) : 0.0;
}

/// nu = int phi0^4.
inline double nu(const montgomery::MontgomeryMinimum& mm) {
    double s = 0.0;
    for (std::size_t i = 0; i < mm.grid.n(); ++i) s += mm.grid.weight(i) * std::pow(mm.phi0[i], 4);
    return s;
}

/// t theta_R(x1) e^{i tau0 x1} phi0(x2) with t^2 = (beta - lambda0)/(2 nu beta).
/// Requires beta > lambda0.
inline Field seed_field(double L, const StripGrid& g, const montgomery::MontgomeryMinimum& mm, double t = -1.0) {
    const double b = beta(L);
    if (t < 0.0) {
        require(b > mm.lambda0, "strip seed: amplitude needs L^{-2/3} > lambda0");
        t = std::sqrt((b - mm.lambda0) / (2.0 * nu(mm) * b));
    }
    Field u(g.size());
    for (std::size_t j = 1; j + 1 < g.ny; ++j) {
        const double phi = montgomery::interpolate(mm.grid, mm.phi0, g.x2(j));
        for (std::size_t i = 1; i + 1 < g.nx; ++i) {
            const double x = g.x1(i);
            u[g.index(i, j)] = t * cutoff(x / g.R) * std::polar(phi, mm.tau0 * x);
        }
    }
    return u;
}

/// Complex noise of amplitude `amp` on interior nodes.
inline Field noise_field(const StripGrid& g, double amp, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Field u(g.size());
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
        for (std::size_t i = 1; i + 1 < g.nx; ++i) {
            const double re = rng.symmetric(), im = rng.symmetric();
            u[g.index(i, j)] = amp * cplx(re, im);
        }
    return u;
}

struct StripMinimizer {
    Field u;
    double L = 0.0;
    StripGrid grid;
    double energy = 0.0;
    double residual = 0.0;  ///< relative GL residual ||r|| / (beta ||u||)
    double sup_u = 0.0;
    std::size_t iterations = 0;
    bool collapsed = false;
};

struct StripOptions {
    double tol = 1e-6;
    std::size_t max_iter = 50000;
    std::uint64_t seed = 1;
    double disc_radius = 0.0;  ///< > 0 restricts to the disc |x| < disc_radius
};

inline Field default_seed(double L, const StripGrid& g, const montgomery::MontgomeryMinimum& mm,
                          std::uint64_t seed) {
    if (beta(L) <= mm.lambda0) return noise_field(g, 0.1, seed);
    return seed_field(L, g, mm);
}

inline StripMinimizer minimize_strip(double L, const StripGrid& g, Field seed, const StripOptions& opt = {}) {
    require(L > 0.0 && std::isfinite(L), "minimize_strip: L must be positive");
    require(opt.tol > 0.0, "minimize_strip: tol must be positive");
    if (seed.empty()) seed = default_seed(L, g, montgomery::reference_minimum(), opt.seed);
    require(seed.size() == g.size(), "minimize_strip: seed shape mismatch");
    const lattice::Lattice lat = build_lattice(g, opt.disc_radius);
    const lattice::Coefficients c = coefficients(L);
    lattice::NcgOptions no;
    no.tol = opt.tol;
    no.max_iter = opt.max_iter;
    const lattice::NcgResult r = lattice::minimize_ncg(lat, c, seed, no);
    if (!r.converged)
        throw SolverError("minimize_strip: no convergence for L=" + std::to_string(L) + " R=" + std::to_string(g.R) +
                          " after " + std::to_string(r.iterations) + " iterations (residual " +
                          std::to_string(r.residual) + ")");
    StripMinimizer m;
    m.u = std::move(seed);
    m.L = L;
    m.grid = g;
    m.energy = r.energy;
    m.residual = r.residual;
    m.sup_u = lattice::sup_norm(m.u);
    m.iterations = r.iterations;
    m.collapsed = r.collapsed;
    return m;
}

/// Gauge-covariant interpolation of a minimizer onto refine(m.grid).
inline Field prolong(const StripMinimizer& m, const StripGrid& fine) {
    const StripGrid& c = m.grid;
    require(fine.nx == 2 * c.nx - 1 && fine.ny == 2 * c.ny - 1 && fine.R == c.R && fine.M == c.M,
            "prolong: target is not the refinement of the source grid");
    return rect::prolong(c.rect(), m.u, rect::strip_gauge());
}

/// Nested iteration: minimize on coarsen(g) from `coarse_seed` (default seed if
/// empty), interpolate, and finish on g. Falls back to a single level.
inline std::pair<StripMinimizer, std::optional<StripMinimizer>> minimize_two_level(double L, const StripGrid& g,
                                                                                  Field coarse_seed,
                                                                                  const StripOptions& opt = {}) {
    const auto cg = coarsen(g);
    if (!cg) return {minimize_strip(L, g, std::move(coarse_seed), opt), std::nullopt};
    StripMinimizer mc = minimize_strip(L, *cg, std::move(coarse_seed), opt);
    StripMinimizer mf = minimize_strip(L, g, prolong(mc, g), opt);
    return {std::move(mf), std::move(mc)};
}

inline StripMinimizer minimize_strip(double L, const StripGrid& g, const StripOptions& opt = {}) {
    return minimize_two_level(L, g, Field{}, opt).first;
}

/// Ground-state energy with the default grid policy.
inline double e_gs(double L, double R, const StripOptions& opt = {}, double h = 0.1) {
    return minimize_strip(L, default_grid(L, R, h), opt).energy;
}

struct ECurvePoint {
    double L = 0.0;
    double E = 0.0;
    std::vector<double> R_list;
    std::vector<double> e_over_2R;  ///< e_gs(L;R)/(2R) per R
    double fit_c = 0.0;
    double err = 0.0;
    double E_inverse_R = 0.0;  ///< intercept of the alternative model E + c/R (diagnostic)
};

/// Least squares y = E + c x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double det = n * sxx - sx * sx;
    require(det > 0.0, "linear_fit: degenerate abscissae");
    const double c = (n * sxy - sx * sy) / det;
    return {(sy - c * sx) / n, c};
}

/// Fit e/(2R) = E + c R^{-2/3} from already computed ground-state energies.
inline ECurvePoint fit_E(double L, const std::vector<double>& R_list, const std::vector<double>& e, double tol) {
    require(R_list.size() >= 3, "estimate_E: need at least 3 R values");
    require(R_list.size() == e.size(), "estimate_E: size mismatch");
    require(R_list.back() >= 2.0, "estimate_E: largest R must be >= 2");
    for (std::size_t k = 1; k < R_list.size(); ++k) require(R_list[k] > R_list[k - 1], "estimate_E: R_list must increase");
    ECurvePoint p;
    p.L = L;
    p.R_list = R_list;
    std::vector<double> x;
    for (std::size_t k = 0; k < R_list.size(); ++k) {
        p.e_over_2R.push_back(e[k] / (2.0 * R_list[k]));
        x.push_back(std::pow(R_list[k], -2.0 / 3.0));
    }
    double scale = 0.0;
    for (double y : p.e_over_2R) scale = std::max(scale, std::abs(y));
    if (scale == 0.0) return p;  // trivial branch: E = 0 exactly
    // e_gs/(2R) should not increase with R beyond solver noise.
    for (std::size_t k = 1; k < p.e_over_2R.size(); ++k)
        if (p.e_over_2R[k] > p.e_over_2R[k - 1] + 0.05 * scale + tol)
            throw SolverError("estimate_E: e_gs/(2R) not monotone in R at L=" + std::to_string(L) +
                              " (unconverged inner solves?)");
    const auto [E, c] = linear_fit(x, p.e_over_2R);
    p.E = std::min(E, 0.0);
    p.fit_c = c;
    double res = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) res = std::max(res, std::abs(E + c * x[k] - p.e_over_2R[k]));
    p.err = res + std::abs(p.e_over_2R.back() - p.E);
    std::vector<double> xr;
    for (double R : R_list) xr.push_back(1.0 / R);
    p.E_inverse_R = std::min(linear_fit(xr, p.e_over_2R).first, 0.0);
    return p;
}

/// Place `copies` x1-translates of a minimizer side by side on the grid of a
/// strip `copies` times longer. A_app does not depend on x1, so each copy
/// keeps its energy and the result is admissible with energy copies * e.
/// Returns an empty field when the grids do not align.
inline Field tile(const StripMinimizer& m, const StripGrid& target) {
    const StripGrid& s = m.grid;
    const std::size_t cells = s.nx - 1;
    if (target.ny != s.ny || target.M != s.M || (target.nx - 1) % cells != 0) return {};
    if (std::abs(target.hx() - s.hx()) > 1e-12 * s.hx()) return {};
    Field u(target.size());
    for (std::size_t j = 0; j < target.ny; ++j)
        for (std::size_t i = 0; i < target.nx; ++i) u[target.index(i, j)] = m.u[s.index(i % cells, j)];
    return u;
}

/// e_gs(L;R) for increasing R. On the coarse level each solve after the
/// first starts from tiled copies of the previous coarse minimizer when R is
/// an integer multiple.
inline std::vector<StripMinimizer> ladder(double L, const std::vector<double>& R_list, const StripOptions& opt = {},
                                          double h = 0.1) {
    std::vector<StripMinimizer> out;
    std::optional<StripMinimizer> prev_coarse;
    for (double R : R_list) {
        const StripGrid g = default_grid(L, R, h);
        Field seed;
        if (prev_coarse && !prev_coarse->collapsed) {
            if (const auto cg = coarsen(g)) seed = tile(*prev_coarse, *cg);
        }
        auto [fine, coarse] = minimize_two_level(L, g, std::move(seed), opt);
        out.push_back(std::move(fine));
        prev_coarse = std::move(coarse);
    }
    return out;
}

inline ECurvePoint estimate_E(double L, const std::vector<double>& R_list, const StripOptions& opt = {},
                              double h = 0.1) {
    require(R_list.size() >= 3, "estimate_E: need at least 3 R values");
    std::vector<double> e;
    for (const StripMinimizer& m : ladder(L, R_list, opt, h)) e.push_back(m.energy);
    return fit_E(L, R_list, e, opt.tol);
}

/// Disc ground-state energy on D(0, R) with A_app. The rotation parameter nu
/// drops out after the gauge/rotation reduction, so it is accepted and ignored.
inline double disc_energy(double nu_rot, double L, double R, const StripOptions& opt = {}, double h = 0.1) {
    require(std::isfinite(nu_rot), "disc_energy: nu must be finite");
    require(R > 0.0, "disc_energy: R must be positive");
    StripOptions o = opt;
    o.disc_radius = R;
    const double M = std::max(default_truncation(L), R);
    const StripGrid g = default_grid(L, R, h, M);
    Field seed;
    if (beta(L) > montgomery::reference_minimum().lambda0) {
        seed = seed_field(L, g, montgomery::reference_minimum());
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                if (std::hypot(g.x1(i), g.x2(j)) >= R) seed[g.index(i, j)] = 0.0;
    }
    return minimize_strip(L, g, std::move(seed), o).energy;
}

struct DecayReport {
    double cut = 0.0;             ///< 4 L^{-2/3} when L < 2^{-3/2}, else 8
    double gradient_tail = 0.0;   ///< int_{|x2|>=cut} |x2|^3/(ln|x2|)^2 |(grad - iA) u|^2, divided by R
    double mass_tail = 0.0;       ///< int_{|x2|>=cut} |x2|/(ln|x2|)^2 |u|^2, divided by R
    double gradient_ratio = 0.0;  ///< gradient_tail / (L-pattern of the bound)
    double mass_ratio = 0.0;
};

inline DecayReport decay_report(const StripMinimizer& m) {
    const StripGrid& g = m.grid;
    const double L = m.L;
    const bool small = L < std::pow(2.0, -1.5);
    DecayReport d;
    d.cut = small ? 4.0 * beta(L) : 8.0;
    auto weight = [](double y, int p) {
        const double a = std::abs(y);
        return std::pow(a, p) / std::pow(std::log(a), 2);
    };
    const lattice::Lattice lat = build_lattice(g);
    double gt = 0.0, mt = 0.0;
    for (const auto& e : lat.edges) {
        const double y = 0.5 * (g.x2(e.a / g.nx) + g.x2(e.b / g.nx));
        if (std::abs(y) >= d.cut) gt += weight(y, 3) * e.weight * std::norm(lattice::link_difference(e, m.u));
    }
    for (std::size_t j = 0; j < g.ny; ++j) {
        const double y = g.x2(j);
        if (std::abs(y) < d.cut) continue;
        for (std::size_t i = 0; i < g.nx; ++i) mt += weight(y, 1) * lat.area[g.index(i, j)] * std::norm(m.u[g.index(i, j)]);
    }
    d.gradient_tail = gt / g.R;
    d.mass_tail = mt / g.R;
    const double lnL = std::abs(std::log(L));
    const double gp = small ? std::pow(L, -8.0 / 3.0) / (lnL * lnL) : std::pow(L, 2.0 / 3.0);
    const double mp = small ? std::pow(L, -1.0 / 3.0) * std::pow(lnL, -1.5) : std::pow(L, 2.0 / 3.0);
    d.gradient_ratio = d.gradient_tail / gp;
    d.mass_ratio = d.mass_tail / mp;
    return d;
}

struct ConjectureRecord {
    double L = 0.0;
    double E_strip = 0.0;
    double E_strip_err = 0.0;
    double E_1d = 0.0;
    double alpha0 = 0.0;
    double abs_gap = 0.0;
    double rel_gap = 0.0;
    double window_lo = 0.0;  ///< lambda(0)^{-3/2}
    double window_hi = 0.0;  ///< lambda0^{-3/2}
};

inline std::pair<double, double> conjecture_window() {
    return {std::pow(montgomery::reference_lambda_at_zero(), -1.5),
            trivial_threshold(montgomery::reference_minimum().lambda0)};
}

inline ConjectureRecord check_conjecture(double L, const std::vector<double>& R_list = {4.0, 8.0, 16.0},
                                         const StripOptions& opt = {}, double h = 0.1) {
    const auto [lo, hi] = conjecture_window();
    if (!(L > lo && L < hi))
        throw ValidationError("check_conjecture: L=" + std::to_string(L) + " outside the window (" + std::to_string(lo) +
                              ", " + std::to_string(hi) + ")");
    ConjectureRecord c;
    c.L = L;
    c.window_lo = lo;
    c.window_hi = hi;
    const ECurvePoint p = estimate_E(L, R_list, opt, h);
    c.E_strip = p.E;
    c.E_strip_err = p.err;
    const montgomery::Grid1D g1(10.0, 2001);
    montgomery::MinimizeOptions mo;
    mo.extrapolate = false;
    const montgomery::MontgomeryMinimum mm = montgomery::minimize_lambda(g1, 1e-9, mo);
    energy1d::AlphaOptions ao;
    ao.alpha_tol = 1e-6;
    const energy1d::AlphaMinimum a = energy1d::minimize_over_alpha(beta(L), mm, g1, ao);
    c.E_1d = a.e1d;
    c.alpha0 = a.alpha0;
    c.abs_gap = std::abs(c.E_strip - c.E_1d);
    c.rel_gap = c.E_1d != 0.0 ? c.abs_gap / std::abs(c.E_1d) : 0.0;
    return c;
}

} // namespace glzero::strip

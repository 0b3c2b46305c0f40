#pragma once

// One-dimensional reduced energy
//   E(f) = \int |f'|^2 + (t^2/2 + alpha)^2 f^2 - b f^2 + (b/2) f^4 dt
// on the truncated line, its minimization in f and alpha, and the
// Feynman-Hellmann check at the optimal alpha.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "glzero/error.hpp"
#include "glzero/montgomery.hpp"
#include "glzero/parallel.hpp"
#include "glzero/quartic.hpp"
#include "glzero/tridiag.hpp"

namespace glzero::energy1d {

using montgomery::Grid1D;

/// Discrete energy. Derivatives are differences on cells (central
/// differences at the half-nodes), potential terms use the trapezoid rule.
inline double energy_1d(const std::vector<double>& f, double alpha, double b, const Grid1D& grid) {
    require(f.size() == grid.n(), "energy_1d: sample count does not match the grid");
    require(b > 0.0, "energy_1d: b must be positive");
    const double h = grid.h();
    double kin = 0.0;
    double pot = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        require(std::isfinite(f[i]), "energy_1d: non-finite sample");
        if (i + 1 < f.size()) {
            const double d = f[i + 1] - f[i];
            kin += d * d;
        }
        const double f2 = f[i] * f[i];
        pot += grid.weight(i) * ((montgomery::potential(grid.node(i), alpha) - b) * f2 + 0.5 * b * f2 * f2);
    }
    return kin / h + pot;
}

/// Gradient of energy_1d with respect to the node values.
inline std::vector<double> gradient_1d(const std::vector<double>& f, double alpha, double b, const Grid1D& grid) {
    const std::size_t n = f.size();
    const double h = grid.h();
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = 2.0 * (f[i + 1] - f[i]) / h;
        g[i] -= d;
        g[i + 1] += d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double v = montgomery::potential(grid.node(i), alpha) - b;
        g[i] += 2.0 * grid.weight(i) * (v * f[i] + b * f[i] * f[i] * f[i]);
    }
    return g;
}

/// Weighted L^2 norm of the discrete Euler-Lagrange residual
/// -f'' + (t^2/2+alpha)^2 f - b f + b f^3 over interior nodes.
inline double el_residual(const std::vector<double>& f, double alpha, double b, const Grid1D& grid) {
    const auto g = gradient_1d(f, alpha, b, grid);
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        const double r = g[i] / (2.0 * grid.weight(i));
        s += grid.weight(i) * r * r;
    }
    return std::sqrt(s);
}

/// Feynman-Hellmann integral \int (t^2/2 + alpha) f^2 dt (trapezoid).
inline double fh_integral(const std::vector<double>& f, double alpha, const Grid1D& grid) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = grid.node(i);
        s += grid.weight(i) * (0.5 * t * t + alpha) * f[i] * f[i];
    }
    return s;
}

struct Minimizer1D {
    double alpha = 0.0;
    double b = 0.0;
    std::vector<double> f;
    double energy = 0.0;
    double el_residual = 0.0;
    double lambda_alpha = 0.0;  ///< discrete lambda(alpha) on the same grid
    bool trivial = false;       ///< lambda(alpha) >= b, f == 0
    int iterations = 0;
};

struct Options1D {
    int max_iter = 2000;
};

/// Minimize energy_1d over nonnegative f with Dirichlet ends. Steps are
/// Newton directions when the Hessian is positive definite, otherwise a
/// Sobolev-preconditioned gradient; each step uses the exact minimizer of the
/// quartic energy along the ray and is projected onto f >= 0.
inline Minimizer1D minimize_1d(double alpha, double b, const Grid1D& grid, double tol, const Options1D& opt = {}) {
    require(b > 0.0, "minimize_1d: b must be positive");
    require(tol > 0.0, "minimize_1d: tol must be positive");
    Minimizer1D out;
    out.alpha = alpha;
    out.b = b;
    const std::size_t n = grid.n();
    const montgomery::SpectralPoint sp = montgomery::eigenpair(alpha, grid);
    out.lambda_alpha = sp.lambda;
    if (sp.lambda >= b) {
        out.f.assign(n, 0.0);
        out.trivial = true;
        return out;
    }
    const double eps = 0.1 * std::sqrt((b - sp.lambda) / b);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = eps * sp.eigenfunction[i];
    f.front() = f.back() = 0.0;

    const double h = grid.h();
    const std::size_t m = n - 2;
    std::vector<double> vpot(n);
    for (std::size_t i = 0; i < n; ++i) vpot[i] = montgomery::potential(grid.node(i), alpha);

    double energy = energy_1d(f, alpha, b, grid);
    SymTridiag hess;
    hess.diag.resize(m);
    hess.off.assign(m - 1, -2.0 / h);
    std::vector<double> d(n, 0.0);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const std::vector<double> g = gradient_1d(f, alpha, b, grid);
        double res = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) res += (g[i] * g[i]) / (4.0 * h);
        res = std::sqrt(res);
        if (res < tol) break;

        std::vector<double> rhs(m);
        for (std::size_t k = 0; k < m; ++k) rhs[k] = -g[k + 1];
        for (std::size_t k = 0; k < m; ++k)
            hess.diag[k] = 4.0 / h + 2.0 * h * (vpot[k + 1] - b + 3.0 * b * f[k + 1] * f[k + 1]);
        std::optional<std::vector<double>> step = solve_spd(hess, rhs);
        if (!step) {
            for (std::size_t k = 0; k < m; ++k)
                hess.diag[k] = 4.0 / h + 2.0 * h * (vpot[k + 1] + 3.0 * b * f[k + 1] * f[k + 1]);
            step = solve_spd(hess, rhs);
            if (!step) throw SolverError("minimize_1d: preconditioner not positive definite");
        }
        for (std::size_t k = 0; k < m; ++k) d[k + 1] = (*step)[k];

        // Coefficients of E(f + s d) - E(f).
        double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double df = f[i + 1] - f[i];
            const double dd = d[i + 1] - d[i];
            c1 += 2.0 * df * dd / h;
            c2 += dd * dd / h;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double w = grid.weight(i);
            const double p0 = f[i] * f[i], p1 = 2.0 * f[i] * d[i], p2 = d[i] * d[i];
            c1 += w * ((vpot[i] - b) * p1 + b * p0 * p1);
            c2 += w * ((vpot[i] - b) * p2 + 0.5 * b * (p1 * p1 + 2.0 * p0 * p2));
            c3 += w * b * p1 * p2;
            c4 += w * 0.5 * b * p2 * p2;
        }
        const double s = minimize_quartic_step(c1, c2, c3, c4);
        if (s <= 0.0) break;
        std::vector<double> trial(f);
        for (std::size_t i = 1; i + 1 < n; ++i) trial[i] = std::max(0.0, f[i] + s * d[i]);
        const double e_trial = energy_1d(trial, alpha, b, grid);
        if (!(e_trial <= energy)) break;
        const double dec = energy - e_trial;
        f = std::move(trial);
        energy = e_trial;
        if (dec <= 1e-16 * std::abs(energy) && res < 10.0 * tol) break;
    }
    if (it >= opt.max_iter) throw SolverError("minimize_1d: no convergence after " + std::to_string(opt.max_iter) + " iterations");
    out.f = std::move(f);
    out.energy = energy;
    out.el_residual = el_residual(out.f, alpha, b, grid);
    out.iterations = it;
    // Collapse to zero means the nonlinear minimizer is the trivial one.
    if (energy >= 0.0) {
        out.f.assign(n, 0.0);
        out.energy = 0.0;
        out.trivial = true;
    }
    return out;
}

/// z1(b) < tau0 < z2(b) with lambda(z1) = lambda(z2) = b.
struct ZInterval {
    double z1 = 0.0;
    double z2 = 0.0;
};

inline ZInterval z_interval(double b, const montgomery::MontgomeryMinimum& mm, const Grid1D& grid, double tol = 1e-10) {
    const double lam0 = montgomery::lambda(mm.tau0, grid);
    require(b > lam0, "z_interval: need b > lambda0 (b=" + std::to_string(b) + ", lambda0=" + std::to_string(lam0) + ")");
    auto g = [&](double tau) { return montgomery::lambda(tau, grid) - b; };
    auto side = [&](double dir) {
        double inner = mm.tau0;
        double step = 0.5;
        double outer = mm.tau0 + dir * step;
        for (int k = 0;; ++k) {
            double val;
            try {
                val = g(outer);
            } catch (const ValidationError&) {
                throw SolverError("z_interval: range exhausted before lambda reached b=" + std::to_string(b));
            }
            if (val >= 0.0) break;
            inner = outer;
            step *= 2.0;
            outer = mm.tau0 + dir * step;
            if (k > 60) throw SolverError("z_interval: range exhausted");
        }
        double lo = inner, hi = outer;
        while (std::abs(hi - lo) > tol) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    return {side(-1.0), side(+1.0)};
}

struct AlphaMinimum {
    double b = 0.0;
    bool valid = false;  ///< false when b <= lambda0: every b(alpha, b) vanishes
    double alpha0 = 0.0;
    double e1d = 0.0;
    double fh_residual = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;
    bool flat_warning = false;
    Minimizer1D minimizer;
};

struct AlphaOptions {
    double alpha_tol = 0.0;  ///< golden-section tolerance; 0 means grid.h()
    double inner_tol = 1e-10;
    std::size_t scan_points = 9;
};

inline AlphaMinimum minimize_over_alpha(double b, const montgomery::MontgomeryMinimum& mm, const Grid1D& grid,
                                        const AlphaOptions& opt = {}) {
    require(b > 0.0, "minimize_over_alpha: b must be positive");
    AlphaMinimum out;
    out.b = b;
    const double lam0 = montgomery::lambda(mm.tau0, grid);
    if (b <= lam0) return out;
    const ZInterval z = z_interval(b, mm, grid);
    out.z1 = z.z1;
    out.z2 = z.z2;
    const double atol = opt.alpha_tol > 0.0 ? opt.alpha_tol : grid.h();
    auto energy_at = [&](double a) { return minimize_1d(a, b, grid, opt.inner_tol).energy; };

    const std::size_t k = std::max<std::size_t>(opt.scan_points, 3);
    const double step = (z.z2 - z.z1) / static_cast<double>(k + 1);
    const std::vector<double> vals =
        parallel_map(k, [&](std::size_t i) { return energy_at(z.z1 + step * static_cast<double>(i + 1)); });
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    const double vmax = *std::max_element(vals.begin(), vals.end());
    out.flat_warning = (vmax - vals[best]) <= 1e-12 + 1e-9 * std::abs(vals[best]);
    const double a = z.z1 + step * static_cast<double>(best);
    const double c = z.z1 + step * static_cast<double>(best + 2);
    out.alpha0 = montgomery::golden_section(energy_at, a, c, atol);
    out.minimizer = minimize_1d(out.alpha0, b, grid, opt.inner_tol);
    out.e1d = out.minimizer.energy;
    out.fh_residual = fh_integral(out.minimizer.f, out.alpha0, grid);
    out.valid = true;
    return out;
}

} // namespace glzero::energy1d

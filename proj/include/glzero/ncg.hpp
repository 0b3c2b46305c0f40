#pragma once

// Polak-Ribiere+ nonlinear conjugate gradients for lattice functionals, with
// an exact line search (the energy is a quartic polynomial along any ray).

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "glzero/lattice.hpp"
#include "glzero/quartic.hpp"

namespace glzero::lattice {

/// z = P^{-1} g. Must be symmetric positive definite and keep pinned nodes at 0.
using Preconditioner = std::function<void(const Field& g, Field& z)>;

struct NcgOptions {
    double tol = 1e-6;              ///< on ||r|| / (lin ||u||)
    std::size_t max_iter = 50000;
    double zero_floor = 1e-9;       ///< ||u|| / sqrt(area) below this snaps to u = 0
    std::size_t trace_every = 0;    ///< record the relative residual every k iterations (0 = off)
};

struct NcgResult {
    double energy = 0.0;
    double residual = 0.0;       ///< relative: ||r|| / (lin ||u||)
    double abs_residual = 0.0;   ///< ||r||
    std::size_t iterations = 0;
    bool converged = false;
    bool collapsed = false;      ///< descended to the trivial state
    std::vector<double> trace;
};

/// Jacobi scaling by the constant part of the Hessian diagonal.
inline Preconditioner jacobi_preconditioner(const Lattice& lat, const Coefficients& c) {
    std::vector<double> diag(lat.size(), 0.0);
    for (const Edge& e : lat.edges) {
        diag[e.a] += c.kinetic * e.weight;
        diag[e.b] += c.kinetic * e.weight;
    }
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = 2.0 * (diag[i] + c.linear * lat.area[i]);
    return [diag = std::move(diag)](const Field& g, Field& z) {
        z.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) z[i] = diag[i] > 0.0 ? g[i] / diag[i] : cplx{};
    };
}

inline NcgResult minimize_ncg(const Lattice& lat, const Coefficients& c, Field& u, const NcgOptions& opt,
                              const Preconditioner& precond = {}) {
    check_shape(lat, u, "minimize_ncg");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (lat.pinned[i]) u[i] = 0.0;
    const Preconditioner P = precond ? precond : jacobi_preconditioner(lat, c);
    const double floor = opt.zero_floor * std::sqrt(std::max(lat.total_area(), 1e-300));

    NcgResult res;
    Field g, z, z_old, d(u.size());
    double e = gradient(lat, c, u, g);
    P(g, z);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i];
    double gz_old = dot(g, z);
    std::size_t stalls = 0;

    for (std::size_t it = 0;; ++it) {
        const double un = l2_norm(lat, u);
        const double rn = residual_norm(lat, g);
        res.abs_residual = rn;
        res.residual = un > 0.0 ? rn / (c.linear * un) : 0.0;
        res.energy = e;
        res.iterations = it;
        if (opt.trace_every && it % opt.trace_every == 0) res.trace.push_back(res.residual);
        if (un <= floor) {
            std::fill(u.begin(), u.end(), cplx{});
            res.energy = 0.0;
            res.residual = 0.0;
            res.abs_residual = 0.0;
            res.converged = true;
            res.collapsed = true;
            return res;
        }
        if (res.residual <= opt.tol) {
            res.converged = true;
            return res;
        }
        if (it >= opt.max_iter) return res;

        LineCoefficients lc = line_coefficients(lat, c, u, d);
        if (lc.c1 >= 0.0) {
            // Not a descent direction: restart along -P g.
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i];
            lc = line_coefficients(lat, c, u, d);
        }
        const double s = minimize_quartic_step(lc.c1, lc.c2, lc.c3, lc.c4);
        if (s <= 0.0) {
            if (++stalls > 2) return res;  // round-off floor reached
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i];
            continue;
        }
        stalls = 0;
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += s * d[i];
        e = gradient(lat, c, u, g);
        z_old.swap(z);
        P(g, z);
        const double gz = dot(g, z);
        double num = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) num += (std::conj(g[i]) * (z[i] - z_old[i])).real();
        const double beta = gz_old > 0.0 ? std::max(0.0, num / gz_old) : 0.0;
        gz_old = gz;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i] + beta * d[i];
    }
}

} // namespace glzero::lattice

#pragma once

// Lowest eigenpair of the Montgomery family P(tau) = -d^2/dt^2 + (t^2/2 + tau)^2
// on a truncated line with Dirichlet ends, and the minimum over tau.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "glzero/error.hpp"
#include "glzero/parallel.hpp"
#include "glzero/tridiag.hpp"

namespace glzero::montgomery {

/// Uniform grid on [-T, T] with n nodes, both ends included.
class Grid1D {
public:
    Grid1D(double T, std::size_t n) : T_(T), n_(n) {
        require(std::isfinite(T) && T > 0.0, "Grid1D: truncation T must be positive");
        require(n >= 3, "Grid1D: need at least 3 nodes");
    }

    double T() const { return T_; }
    std::size_t n() const { return n_; }
    double h() const { return 2.0 * T_ / static_cast<double>(n_ - 1); }

    /// t_i = -T + i h, written so that node(n-1-i) == -node(i) exactly.
    double node(std::size_t i) const {
        return (2.0 * static_cast<double>(i) - static_cast<double>(n_ - 1)) * T_ / static_cast<double>(n_ - 1);
    }

    std::vector<double> nodes() const {
        std::vector<double> t(n_);
        for (std::size_t i = 0; i < n_; ++i) t[i] = node(i);
        return t;
    }

    /// Same truncation, half the spacing.
    Grid1D refined() const { return Grid1D(T_, 2 * n_ - 1); }

    /// Trapezoid weights (end nodes get h/2).
    double weight(std::size_t i) const { return (i == 0 || i + 1 == n_) ? 0.5 * h() : h(); }

private:
    double T_;
    std::size_t n_;
};

inline double potential(double t, double tau) {
    const double q = 0.5 * t * t + tau;
    return q * q;
}

/// Rough upper estimate of lambda(tau), used for truncation and window defaults.
inline double lambda_estimate(double tau) {
    const double pos = std::max(tau, 0.0);
    return pos * pos + std::sqrt(2.0 * std::abs(tau)) + 1.0;
}

/// Default spectral window: eigenvalues of interest stay well below it.
inline double default_window(double tau) { return 2.0 * lambda_estimate(tau) + 10.0; }

/// Default truncation T = max(8, 2 sqrt(2(lambda_est + |tau|)) + 4).
inline double default_truncation(double tau) {
    return std::max(8.0, 2.0 * std::sqrt(2.0 * (lambda_estimate(tau) + std::abs(tau))) + 4.0);
}

/// Discretized P(tau): central-difference Laplacian plus the quartic potential,
/// restricted to interior nodes (the end nodes carry Dirichlet zeros).
struct Operator {
    double tau = 0.0;
    Grid1D grid{1.0, 3};
    SymTridiag matrix;  ///< interior nodes 1..n-2
};

inline Operator assemble_operator(double tau, const Grid1D& grid, double window) {
    require(std::isfinite(tau), "assemble_operator: tau must be finite");
    const double edge = 0.5 * grid.T() * grid.T() + tau;
    if (edge <= 0.0 || edge * edge <= window)
        throw ValidationError("assemble_operator: truncation T=" + std::to_string(grid.T()) +
                              " unsafe for tau=" + std::to_string(tau) + " (boundary potential " +
                              std::to_string(edge * edge) + " vs window " + std::to_string(window) + ")");
    const std::size_t m = grid.n() - 2;
    const double h = grid.h();
    const double inv_h2 = 1.0 / (h * h);
    Operator op;
    op.tau = tau;
    op.grid = grid;
    op.matrix.diag.resize(m);
    op.matrix.off.assign(m > 0 ? m - 1 : 0, -inv_h2);
    for (std::size_t k = 0; k < m; ++k) op.matrix.diag[k] = 2.0 * inv_h2 + potential(grid.node(k + 1), tau);
    return op;
}

inline Operator assemble_operator(double tau, const Grid1D& grid) {
    return assemble_operator(tau, grid, default_window(tau));
}

/// One sample of the family: tau, lambda(tau) and the positive ground state
/// on all grid nodes (zero at both ends), normalized in L^2 with weight h.
struct SpectralPoint {
    double tau = 0.0;
    double lambda = 0.0;
    std::vector<double> eigenfunction;
};

inline SpectralPoint lowest_eigenpair(const Operator& op) {
    const double lambda = lowest_eigenvalue(op.matrix);
    const std::vector<double> v = inverse_iteration(op.matrix, lambda);
    const std::size_t n = op.grid.n();
    SpectralPoint sp;
    sp.tau = op.tau;
    sp.lambda = lambda;
    sp.eigenfunction.assign(n, 0.0);
    const double s = 1.0 / std::sqrt(op.grid.h());
    for (std::size_t k = 0; k < v.size(); ++k) sp.eigenfunction[k + 1] = std::max(v[k], 0.0) * s;
    // Renormalize after clipping round-off negatives.
    double nrm = 0.0;
    for (double x : sp.eigenfunction) nrm += x * x;
    nrm = std::sqrt(nrm * op.grid.h());
    for (double& x : sp.eigenfunction) x /= nrm;
    return sp;
}

inline SpectralPoint eigenpair(double tau, const Grid1D& grid) {
    return lowest_eigenpair(assemble_operator(tau, grid));
}

inline double lambda(double tau, const Grid1D& grid) {
    return lowest_eigenvalue(assemble_operator(tau, grid).matrix);
}

/// Richardson-extrapolated eigenvalue from grids h and h/2.
struct Extrapolated {
    double value = 0.0;   ///< (4 lambda_{h/2} - lambda_h) / 3
    double err = 0.0;     ///< |lambda_{h/2} - value|
    double coarse = 0.0;  ///< lambda_h
    double fine = 0.0;    ///< lambda_{h/2}
};

inline Extrapolated lambda_extrapolated(double tau, const Grid1D& grid) {
    Extrapolated e;
    e.coarse = lambda(tau, grid);
    e.fine = lambda(tau, grid.refined());
    e.value = (4.0 * e.fine - e.coarse) / 3.0;
    e.err = std::abs(e.fine - e.value);
    return e;
}

inline std::vector<SpectralPoint> lambda_curve(double tau_lo, double tau_hi, std::size_t samples,
                                               const Grid1D& grid) {
    require(tau_lo < tau_hi, "lambda_curve: need tau_lo < tau_hi");
    require(samples >= 2, "lambda_curve: need at least 2 samples");
    const double step = (tau_hi - tau_lo) / static_cast<double>(samples - 1);
    return parallel_map(samples, [&](std::size_t k) {
        const double tau = k + 1 == samples ? tau_hi : tau_lo + step * static_cast<double>(k);
        try {
            return eigenpair(tau, grid);
        } catch (const SolverError& e) {
            throw SolverError("lambda_curve: tau=" + std::to_string(tau) + ": " + e.what());
        }
    });
}

struct MontgomeryMinimum {
    double tau0 = 0.0;
    double lambda0 = 0.0;
    std::vector<double> phi0;  ///< ground state at tau0 on `grid`
    Grid1D grid{1.0, 3};
    bool extrapolated = false;
    double err = 0.0;  ///< Richardson error estimate (0 when not extrapolated)
};

struct MinimizeOptions {
    double scan_lo = -5.0;
    double scan_hi = 2.0;
    double scan_step = 0.25;
    bool extrapolate = true;
};

/// Golden-section search for the minimizer of a unimodal f on [a, b].
template <class F>
double golden_section(F&& f, double a, double b, double tol, int max_iter = 300) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

inline MontgomeryMinimum minimize_lambda(const Grid1D& grid, double tol, const MinimizeOptions& opt = {}) {
    require(tol > 0.0, "minimize_lambda: tol must be positive");
    require(opt.scan_lo < opt.scan_hi && opt.scan_step > 0.0, "minimize_lambda: bad scan range");
    auto objective = [&](double tau) {
        return opt.extrapolate ? lambda_extrapolated(tau, grid).value : lambda(tau, grid);
    };
    const auto count = static_cast<std::size_t>(std::floor((opt.scan_hi - opt.scan_lo) / opt.scan_step + 1e-9)) + 1;
    require(count >= 3, "minimize_lambda: scan needs at least 3 points");
    const std::vector<double> vals = parallel_map(count, [&](std::size_t k) {
        return objective(opt.scan_lo + opt.scan_step * static_cast<double>(k));
    });
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    if (best == 0 || best + 1 == count)
        throw SolverError("minimize_lambda: bracket not found on [" + std::to_string(opt.scan_lo) + ", " +
                          std::to_string(opt.scan_hi) + "]");
    const double a = opt.scan_lo + opt.scan_step * static_cast<double>(best - 1);
    const double b = opt.scan_lo + opt.scan_step * static_cast<double>(best + 1);
    const double tau0 = golden_section(objective, a, b, tol);

    MontgomeryMinimum m;
    m.tau0 = tau0;
    m.grid = grid;
    m.extrapolated = opt.extrapolate;
    SpectralPoint sp = eigenpair(tau0, grid);
    m.phi0 = std::move(sp.eigenfunction);
    if (opt.extrapolate) {
        const Extrapolated e = lambda_extrapolated(tau0, grid);
        m.lambda0 = e.value;
        m.err = e.err;
    } else {
        m.lambda0 = sp.lambda;
    }
    return m;
}

/// Minimum on the reference grid (T=12, n=4801, extrapolated), computed once.
inline const MontgomeryMinimum& reference_minimum() {
    static const MontgomeryMinimum m = minimize_lambda(Grid1D(12.0, 4801), 1e-8);
    return m;
}

/// Extrapolated lambda(0) on the reference grid, computed once.
inline double reference_lambda_at_zero() {
    static const double v = lambda_extrapolated(0.0, Grid1D(12.0, 4801)).value;
    return v;
}

/// Linear interpolation of node samples on `grid` at t (zero outside [-T, T]).
inline double interpolate(const Grid1D& grid, const std::vector<double>& f, double t) {
    if (t <= -grid.T() || t >= grid.T()) return 0.0;
    const double s = (t + grid.T()) / grid.h();
    const auto i = std::min(static_cast<std::size_t>(s), grid.n() - 2);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
}

} // namespace glzero::montgomery

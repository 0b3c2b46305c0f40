#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "glzero/error.hpp"

namespace glzero {

/// Symmetric tridiagonal matrix: `diag` has n entries, `off` has n-1.
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const { return diag.size(); }

    /// y = M x
    void apply(std::span<const double> x, std::span<double> y) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += off[i - 1] * x[i - 1];
            if (i + 1 < n) s += off[i] * x[i + 1];
            y[i] = s;
        }
    }

    /// Gershgorin enclosure of the spectrum.
    std::pair<double, double> gershgorin() const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            if (i > 0) r += std::abs(off[i - 1]);
            if (i + 1 < n) r += std::abs(off[i]);
            lo = std::min(lo, diag[i] - r);
            hi = std::max(hi, diag[i] + r);
        }
        return {lo, hi};
    }
};

/// Number of eigenvalues strictly below `x` (Sturm sequence / LDL^T inertia).
inline std::size_t sturm_count(const SymTridiag& m, double x) {
    const std::size_t n = m.size();
    std::size_t count = 0;
    double d = 1.0;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < n; ++i) {
        const double e2 = i > 0 ? m.off[i - 1] * m.off[i - 1] : 0.0;
        d = (m.diag[i] - x) - (i > 0 ? e2 / d : 0.0);
        if (std::abs(d) < tiny) d = -tiny;
        if (d < 0.0) ++count;
    }
    return count;
}

/// Lowest eigenvalue by bisection on the Sturm count.
inline double lowest_eigenvalue(const SymTridiag& m, int max_iter = 200) {
    require(m.size() >= 1, "empty tridiagonal matrix");
    auto [lo, hi] = m.gershgorin();
    // Tighten the upper end: any Rayleigh quotient bounds the minimum.
    hi = std::min(hi, *std::min_element(m.diag.begin(), m.diag.end()));
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        if (sturm_count(m, mid) >= 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
            return 0.5 * (lo + hi);
    }
    throw SolverError("Sturm bisection did not converge");
}

/// Solve (M - shift I) x = rhs with the Thomas algorithm. Returns nullopt on
/// a zero pivot.
inline std::optional<std::vector<double>> solve_shifted(const SymTridiag& m, double shift,
                                                        std::span<const double> rhs) {
    const std::size_t n = m.size();
    std::vector<double> c(n), x(rhs.begin(), rhs.end());
    double piv = m.diag[0] - shift;
    if (piv == 0.0) return std::nullopt;
    c[0] = n > 1 ? m.off[0] / piv : 0.0;
    x[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = (m.diag[i] - shift) - m.off[i - 1] * c[i - 1];
        if (piv == 0.0) return std::nullopt;
        c[i] = i + 1 < n ? m.off[i] / piv : 0.0;
        x[i] = (x[i] - m.off[i - 1] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

/// Solve M x = rhs for a symmetric positive definite M. Returns nullopt if a
/// non-positive pivot shows up (M indefinite).
inline std::optional<std::vector<double>> solve_spd(const SymTridiag& m, std::span<const double> rhs) {
    const std::size_t n = m.size();
    std::vector<double> c(n), x(rhs.begin(), rhs.end());
    double piv = m.diag[0];
    if (!(piv > 0.0)) return std::nullopt;
    c[0] = n > 1 ? m.off[0] / piv : 0.0;
    x[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = m.diag[i] - m.off[i - 1] * c[i - 1];
        if (!(piv > 0.0)) return std::nullopt;
        c[i] = i + 1 < n ? m.off[i] / piv : 0.0;
        x[i] = (x[i] - m.off[i - 1] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

/// Eigenvector for a known (isolated) eigenvalue by inverse iteration.
/// The result has unit Euclidean norm and nonnegative sum.
inline std::vector<double> inverse_iteration(const SymTridiag& m, double lambda, int max_iter = 50) {
    const std::size_t n = m.size();
    const double scale = std::max(1.0, std::abs(lambda));
    // A tiny offset keeps the shifted matrix nonsingular without hurting the
    // convergence factor.
    const double shift = lambda - 1e-10 * scale;
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> mv(n);
    for (int it = 0; it < max_iter; ++it) {
        auto w = solve_shifted(m, shift, v);
        if (!w) throw SolverError("inverse iteration hit a zero pivot");
        double nrm = 0.0;
        for (double x : *w) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw SolverError("inverse iteration produced a non-finite vector");
        for (std::size_t i = 0; i < n; ++i) (*w)[i] /= nrm;
        double diff = 0.0;
        double sgn = 0.0;
        for (std::size_t i = 0; i < n; ++i) sgn += (*w)[i] * v[i];
        sgn = sgn < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(sgn * (*w)[i] - v[i]));
        v = std::move(*w);
        if (sgn < 0.0)
            for (double& x : v) x = -x;
        if (diff < 1e-14) break;
        if (it == max_iter - 1) {
            // Accept when the eigen-residual is small even if the vector is
            // still rotating inside a (numerically) degenerate space.
            m.apply(v, mv);
            double r = 0.0;
            for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(mv[i] - lambda * v[i]));
            if (r > 1e-8 * scale) throw SolverError("inverse iteration did not converge");
        }
    }
    double s = 0.0;
    for (double x : v) s += x;
    if (s < 0.0)
        for (double& x : v) x = -x;
    return v;
}

} // namespace glzero

#pragma once

// Leading-order energy formulas for the two field regimes, regime
// classification, and comparison with computed domain states.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glzero/cell.hpp"
#include "glzero/domain.hpp"
#include "glzero/error.hpp"
#include "glzero/montgomery.hpp"
#include "glzero/strip.hpp"

namespace glzero::asym {

/// Piecewise-linear table that is identically zero from `zero_from` on.
/// Between the last sample and `zero_from` it interpolates to 0; below the
/// first sample it interpolates to `left` when set, otherwise it is an error.
struct Table {
    std::vector<double> x, y;
    double zero_from = 0.0;
    bool has_left = false;
    double left_x = 0.0, left_y = 0.0;
    std::string name;

    double operator()(double v) const {
        if (v >= zero_from) return 0.0;
        if (x.empty()) throw ValidationError(name + ": empty table");
        if (v < x.front()) {
            if (!has_left || v < left_x)
                throw ValidationError(name + ": argument " + std::to_string(v) + " below the table range (extend table)");
            return lerp(left_x, left_y, x.front(), y.front(), v);
        }
        if (v > x.back()) {
            if (y.back() == 0.0) return 0.0;
            if (x.back() >= zero_from) return 0.0;
            return lerp(x.back(), y.back(), zero_from, 0.0, v);
        }
        const auto it = std::upper_bound(x.begin(), x.end(), v);
        const std::size_t k = it == x.end() ? x.size() - 1 : static_cast<std::size_t>(it - x.begin());
        if (k == 0) return y.front();
        return lerp(x[k - 1], y[k - 1], x[k], y[k], v);
    }

private:
    static double lerp(double x0, double y0, double x1, double y1, double v) {
        if (x1 == x0) return y1;
        const double w = (v - x0) / (x1 - x0);
        return (1.0 - w) * y0 + w * y1;
    }
};

inline void check_table(const Table& t) {
    require(!t.x.empty() && t.x.size() == t.y.size(), t.name + ": need matching, nonempty columns");
    for (std::size_t k = 0; k < t.x.size(); ++k) {
        require(std::isfinite(t.x[k]) && std::isfinite(t.y[k]), t.name + ": non-finite entry");
        require(t.y[k] <= 0.0, t.name + ": values must be <= 0");
        if (k > 0) require(t.x[k] > t.x[k - 1], t.name + ": abscissae must increase");
    }
}

/// E(L) table; zero at and beyond lambda0^{-3/2}. Below the first L the
/// table must be extended.
inline Table ecurve_table(std::vector<double> L, std::vector<double> E, double lambda0) {
    Table t;
    t.name = "ecurve";
    t.x = std::move(L);
    t.y = std::move(E);
    t.zero_from = strip::trivial_threshold(lambda0);
    check_table(t);
    return t;
}

inline Table ecurve_table(const std::vector<strip::ECurvePoint>& pts, double lambda0) {
    std::vector<double> L, E;
    for (const auto& p : pts) {
        L.push_back(p.L);
        E.push_back(p.E);
    }
    return ecurve_table(std::move(L), std::move(E), lambda0);
}

/// g(b) table; zero for b >= 1 and anchored at g(0) = -1/2.
inline Table gtable_table(std::vector<double> b, std::vector<double> g) {
    Table t;
    t.name = "gtable";
    t.x = std::move(b);
    t.y = std::move(g);
    t.zero_from = 1.0;
    t.has_left = true;
    t.left_x = 0.0;
    t.left_y = -0.5;
    check_table(t);
    require(t.x.front() >= 0.0, "gtable: b must be >= 0");
    return t;
}

inline Table gtable_table(const cell::GTable& rows) {
    std::vector<double> b, g;
    for (const auto& r : rows) {
        b.push_back(r.b);
        g.push_back(r.g_est);
    }
    return gtable_table(std::move(b), std::move(g));
}

/// kappa * int_Gamma L^{1/3} E(L) ds with L = |grad B0| H / kappa^2,
/// trapezoidal along each polyline.
inline double formula_vanishing(const domain::DomainProblem& p, const Table& ecurve) {
    const double s = p.H / (p.kappa * p.kappa);
    auto integrand = [&](double gn) {
        const double L = gn * s;
        require(L > 0.0, "formula_vanishing: |grad B0| must be positive on Gamma");
        return std::cbrt(L) * ecurve(L);
    };
    double total = 0.0;
    for (const domain::Curve& c : p.gamma)
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            const double ds = std::hypot(c.points[k][0] - c.points[k - 1][0], c.points[k][1] - c.points[k - 1][1]);
            total += 0.5 * ds * (integrand(c.grad_norm[k - 1]) + integrand(c.grad_norm[k]));
        }
    return p.kappa * total;
}

/// kappa^2 int_Omega g((H/kappa)|B0|), midpoint rule on the subsampled
/// plaquettes of the problem grid.
inline double formula_bulk(const domain::DomainProblem& p, const Table& gtable) {
    const domain::RectGrid& g = p.grid;
    const double b = p.H / p.kappa;
    const std::size_t n = p.subsample;
    const double dx = g.hx() / static_cast<double>(n), dy = g.hy() / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < g.ny; ++j)
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            if (p.frac[p.plaquette(i, j)] == 0.0) continue;
            for (std::size_t q = 0; q < n; ++q)
                for (std::size_t r = 0; r < n; ++r) {
                    const double x = g.x(i) + (static_cast<double>(r) + 0.5) * dx;
                    const double y = g.y(j) + (static_cast<double>(q) + 0.5) * dy;
                    if (!p.geometry.contains(x, y)) continue;
                    const double v = b * std::abs(p.B0(x, y).v);
                    if (v < 1.0) total += gtable(v) * dx * dy;
                }
        }
    return p.kappa * p.kappa * total;
}

enum class Tag { I, II, Crossover };

inline const char* to_string(Tag t) {
    switch (t) {
        case Tag::I: return "I";
        case Tag::II: return "II";
        case Tag::Crossover: return "crossover";
    }
    return "?";
}

struct Regime {
    Tag tag = Tag::Crossover;
    double b_kappa = 0.0;    ///< H / kappa
    double indicator = 0.0;  ///< b_kappa / sqrt(kappa)
    double upper = 3.0;
    double lower = 1.0 / 3.0;
};

inline Regime regime_classify(double kappa, double H, double upper = 3.0, double lower = 1.0 / 3.0) {
    require(kappa > 0.0 && H > 0.0, "regime_classify: kappa and H must be positive");
    require(lower > 0.0 && upper > lower, "regime_classify: need 0 < lower < upper");
    Regime r;
    r.upper = upper;
    r.lower = lower;
    r.b_kappa = H / kappa;
    r.indicator = r.b_kappa / std::sqrt(kappa);
    r.tag = r.indicator >= upper ? Tag::II : r.indicator <= lower ? Tag::I : Tag::Crossover;
    return r;
}

struct VerificationReport {
    double kappa = 0.0, H = 0.0;
    Regime regime;
    double E_computed = 0.0;
    double C0_formula = 0.0;    ///< the regime's formula; the line formula in the crossover band
    double C0_vanishing = 0.0;
    double C0_bulk = 0.0;
    double relative_gap = 0.0;  ///< |E - C0| H / kappa^3
    double mass_gap = 0.0;      ///< |int |psi|^4 + (2/kappa^2) C0| H / kappa
    double magnetic = 0.0;      ///< magnetic energy / (kappa^3 / H); 0 in fixed mode
    std::string warning;
};

inline VerificationReport verify(const domain::DomainProblem& p, const domain::GLState& s, const Table& ecurve,
                                 const Table& gtable) {
    require(s.converged, "verify: state is not converged");
    VerificationReport v;
    v.kappa = p.kappa;
    v.H = p.H;
    v.regime = regime_classify(p.kappa, p.H);
    v.E_computed = s.energy_total;
    v.C0_vanishing = formula_vanishing(p, ecurve);
    v.C0_bulk = formula_bulk(p, gtable);
    switch (v.regime.tag) {
        case Tag::II: v.C0_formula = v.C0_vanishing; break;
        case Tag::I: v.C0_formula = v.C0_bulk; break;
        case Tag::Crossover:
            v.C0_formula = v.C0_vanishing;
            v.warning = "crossover regime (indicator " + std::to_string(v.regime.indicator) +
                        "): both formulas reported, the line formula is used for the gap";
            break;
    }
    const double k3 = p.kappa * p.kappa * p.kappa;
    v.relative_gap = std::abs(v.E_computed - v.C0_formula) * p.H / k3;
    const double m4 = domain::order_mass(p, s, domain::everywhere);
    v.mass_gap = std::abs(m4 + 2.0 / (p.kappa * p.kappa) * v.C0_formula) * p.H / p.kappa;
    v.magnetic = s.mode == domain::Mode::Full ? s.parts.magnetic * p.H / k3 : 0.0;
    return v;
}

/// Non-increasing up to at most one rise of at most `slack` times the larger
/// of the two values involved.
struct Trend {
    bool ok = true;
    std::size_t rises = 0;
    double worst_rise = 0.0;  ///< largest rise relative to the larger value
};

inline Trend non_increasing(const std::vector<double>& v, double slack = 0.1) {
    Trend t;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] <= v[k - 1]) continue;
        ++t.rises;
        const double big = std::max(std::abs(v[k]), std::abs(v[k - 1]));
        t.worst_rise = std::max(t.worst_rise, big > 0.0 ? (v[k] - v[k - 1]) / big : 0.0);
    }
    t.ok = t.rises == 0 || (t.rises == 1 && t.worst_rise <= slack);
    return t;
}

/// Strictly decreasing.
inline bool decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1])) return false;
    return true;
}

} // namespace glzero::asym

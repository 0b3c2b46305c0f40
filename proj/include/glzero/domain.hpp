#pragma once

// Full GL functional on a rectangle or disc with an applied field B0 that
// vanishes on a curve Gamma:
//
//   E(psi, A) = int |(grad - i kH A) psi|^2 - k^2 |psi|^2 + k^2/2 |psi|^4
//             + (kH)^2 int |curl A - B0|^2.
//
// The mesh is a uniform node grid on the bounding box. Plaquettes cut by the
// boundary enter with the fraction of their area inside the domain, so the
// Neumann condition is natural. A = F + a, where F has a discrete stream
// function and a enters as extra link phases delta = kH int_e a.

#include <Eigen/Sparse>
#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "glzero/error.hpp"
#include "glzero/expr.hpp"
#include "glzero/lattice.hpp"
#include "glzero/ncg.hpp"
#include "glzero/rect.hpp"
#include "glzero/rng.hpp"

namespace glzero::domain {

using lattice::cplx;
using lattice::Field;
using rect::RectGrid;

using B0Function = std::function<expr::Dual(double x1, double x2)>;

struct Geometry {
    enum class Kind { Rectangle, Disc };
    Kind kind = Kind::Disc;
    double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;  ///< rectangle, or bounding box of the disc
    double cx = 0.0, cy = 0.0, radius = 1.0;

    static Geometry rectangle(double x0, double y0, double x1, double y1) {
        require(std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1) && x1 > x0 && y1 > y0,
                "rectangle: need x0 < x1 and y0 < y1");
        Geometry g;
        g.kind = Kind::Rectangle;
        g.x0 = x0, g.y0 = y0, g.x1 = x1, g.y1 = y1;
        return g;
    }

    static Geometry disc(double radius, double cx = 0.0, double cy = 0.0) {
        require(std::isfinite(radius) && radius > 0.0 && std::isfinite(cx) && std::isfinite(cy),
                "disc: radius must be positive");
        Geometry g;
        g.kind = Kind::Disc;
        g.cx = cx, g.cy = cy, g.radius = radius;
        g.x0 = cx - radius, g.x1 = cx + radius, g.y0 = cy - radius, g.y1 = cy + radius;
        return g;
    }

    bool contains(double x, double y) const {
        if (kind == Kind::Rectangle) return x >= x0 && x <= x1 && y >= y0 && y <= y1;
        const double dx = x - cx, dy = y - cy;
        return dx * dx + dy * dy <= radius * radius * (1.0 + 1e-12);
    }

    /// Distance to the boundary curve.
    double boundary_distance(double x, double y) const {
        if (kind == Kind::Disc) return std::abs(std::hypot(x - cx, y - cy) - radius);
        if (contains(x, y)) return std::min({x - x0, x1 - x, y - y0, y1 - y});
        const double dx = std::max({x0 - x, 0.0, x - x1}), dy = std::max({y0 - y, 0.0, y - y1});
        return std::hypot(dx, dy);
    }

    double area() const { return kind == Kind::Rectangle ? (x1 - x0) * (y1 - y0) : std::numbers::pi * radius * radius; }
    std::string name() const { return kind == Kind::Rectangle ? "rect" : "disc"; }
};

/// Polyline piece of the zero set with |grad B0| at its vertices.
struct Curve {
    std::vector<std::array<double, 2>> points;
    std::vector<double> grad_norm;

    double length() const {
        double s = 0.0;
        for (std::size_t k = 1; k < points.size(); ++k)
            s += std::hypot(points[k][0] - points[k - 1][0], points[k][1] - points[k - 1][1]);
        return s;
    }
};

/// Solve the 5-point Poisson problem (lap_h phi) = rhs on a px x py array of
/// points with zero values one step outside, via a type-I sine transform.
inline std::vector<double> solve_poisson_dst(std::size_t px, std::size_t py, double hx, double hy,
                                             const std::vector<double>& rhs) {
    require(px >= 1 && py >= 1 && rhs.size() == px * py, "poisson: shape mismatch");
    static std::mutex planner;
    std::vector<double> in(rhs), out(rhs.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner);
        plan = fftw_plan_r2r_2d(static_cast<int>(py), static_cast<int>(px), in.data(), out.data(), FFTW_RODFT00,
                                FFTW_RODFT00, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    const double nx1 = static_cast<double>(px + 1), ny1 = static_cast<double>(py + 1);
    for (std::size_t j = 0; j < py; ++j) {
        const double ly = (2.0 * std::cos(std::numbers::pi * static_cast<double>(j + 1) / ny1) - 2.0) / (hy * hy);
        for (std::size_t i = 0; i < px; ++i) {
            const double lx = (2.0 * std::cos(std::numbers::pi * static_cast<double>(i + 1) / nx1) - 2.0) / (hx * hx);
            out[i + px * j] /= (lx + ly) * 4.0 * nx1 * ny1;
        }
    }
    std::copy(out.begin(), out.end(), in.begin());
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner);
        fftw_destroy_plan(plan);
    }
    return out;
}

struct DomainProblem {
    Geometry geometry;
    std::string B0_text;  ///< expression source, empty when built from a callable
    B0Function B0;
    double kappa = 0.0;
    double H = 0.0;
    RectGrid grid;
    std::size_t subsample = 8;
    std::vector<double> frac;       ///< per plaquette, area fraction inside the domain
    std::vector<double> B0_center;  ///< B0 at plaquette centres
    std::vector<double> stream;     ///< stream function of F at plaquette centres
    std::vector<double> theta;      ///< kH int_e F per grid edge
    std::vector<std::size_t> edge_of;  ///< lattice edge -> grid edge
    lattice::Lattice lat;
    std::vector<Curve> gamma;
    double nondegeneracy = 0.0;   ///< min over active nodes of |B0| + |grad B0|
    double curl_residual = 0.0;   ///< max over plaquettes |discrete curl F - B0(centre)|

    double sigma() const { return H / (kappa * kappa); }
    double kH() const { return kappa * H; }
    std::size_t plaquettes() const { return (grid.nx - 1) * (grid.ny - 1); }
    std::size_t x_edges() const { return (grid.nx - 1) * grid.ny; }
    std::size_t grid_edges() const { return x_edges() + grid.nx * (grid.ny - 1); }
    std::size_t x_edge(std::size_t i, std::size_t j) const { return i + (grid.nx - 1) * j; }
    std::size_t y_edge(std::size_t i, std::size_t j) const { return x_edges() + i + grid.nx * j; }
    std::size_t plaquette(std::size_t i, std::size_t j) const { return i + (grid.nx - 1) * j; }
    lattice::Coefficients coefficients() const { return {1.0, kappa * kappa, kappa * kappa}; }
    double gamma_length() const {
        double s = 0.0;
        for (const Curve& c : gamma) s += c.length();
        return s;
    }
};

struct ProblemOptions {
    double h = 0.0;              ///< target spacing; 0 = min(1/(6 kappa), 0.5/sqrt(kH max|B0|))
    std::size_t subsample = 8;   ///< per-direction samples for cut-plaquette fractions
};

namespace detail {

/// Fraction of plaquette (i, j) inside the domain and inside `region`.
inline double plaquette_fraction(const RectGrid& g, std::size_t i, std::size_t j, std::size_t s,
                                 const std::function<bool(double, double)>& inside) {
    std::size_t hits = 0;
    const double hx = g.hx(), hy = g.hy();
    for (std::size_t b = 0; b < s; ++b)
        for (std::size_t a = 0; a < s; ++a) {
            const double x = g.x(i) + hx * (static_cast<double>(a) + 0.5) / static_cast<double>(s);
            const double y = g.y(j) + hy * (static_cast<double>(b) + 0.5) / static_cast<double>(s);
            if (inside(x, y)) ++hits;
        }
    return static_cast<double>(hits) / static_cast<double>(s * s);
}

inline std::vector<Curve> marching_squares(const DomainProblem& p) {
    const RectGrid& g = p.grid;
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) v[g.index(i, j)] = p.B0(g.x(i), g.y(j)).v;
    auto pos = [&](std::size_t i, std::size_t j) { return v[g.index(i, j)] >= 0.0; };
    std::map<std::size_t, std::array<double, 2>> crossing;
    auto cross = [&](std::size_t id, std::size_t ia, std::size_t ja, std::size_t ib, std::size_t jb) -> bool {
        if (pos(ia, ja) == pos(ib, jb)) return false;
        if (!crossing.count(id)) {
            const double va = v[g.index(ia, ja)], vb = v[g.index(ib, jb)];
            const double t = va / (va - vb);
            crossing[id] = {g.x(ia) + t * (g.x(ib) - g.x(ia)), g.y(ja) + t * (g.y(jb) - g.y(ja))};
        }
        return true;
    };
    std::vector<std::array<std::size_t, 2>> segs;
    for (std::size_t j = 0; j + 1 < g.ny; ++j)
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            const std::size_t B = p.x_edge(i, j), T = p.x_edge(i, j + 1), L = p.y_edge(i, j), R = p.y_edge(i + 1, j);
            const bool cb = cross(B, i, j, i + 1, j), cr = cross(R, i + 1, j, i + 1, j + 1);
            const bool ct = cross(T, i, j + 1, i + 1, j + 1), cl = cross(L, i, j, i, j + 1);
            std::vector<std::size_t> hit;
            if (cb) hit.push_back(B);
            if (cr) hit.push_back(R);
            if (ct) hit.push_back(T);
            if (cl) hit.push_back(L);
            if (hit.size() == 2) {
                segs.push_back({hit[0], hit[1]});
            } else if (hit.size() == 4) {
                const double xc = 0.5 * (g.x(i) + g.x(i + 1)), yc = 0.5 * (g.y(j) + g.y(j + 1));
                if ((p.B0(xc, yc).v >= 0.0) == pos(i, j)) {
                    segs.push_back({B, R});
                    segs.push_back({T, L});
                } else {
                    segs.push_back({B, L});
                    segs.push_back({T, R});
                }
            }
        }
    // Chain segments through shared crossing ids.
    std::map<std::size_t, std::vector<std::size_t>> at;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        at[segs[s][0]].push_back(s);
        at[segs[s][1]].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    std::vector<std::vector<std::size_t>> chains;
    auto walk = [&](std::size_t start_seg, std::size_t start_id) {
        std::vector<std::size_t> ids{start_id};
        std::size_t s = start_seg, cur = start_id;
        for (;;) {
            used[s] = 1;
            cur = segs[s][0] == cur ? segs[s][1] : segs[s][0];
            ids.push_back(cur);
            std::size_t next = segs.size();
            for (std::size_t t : at[cur])
                if (!used[t]) next = t;
            if (next == segs.size()) break;
            s = next;
        }
        chains.push_back(std::move(ids));
    };
    for (const auto& [id, list] : at)
        if (list.size() == 1 && !used[list[0]]) walk(list[0], id);
    for (std::size_t s = 0; s < segs.size(); ++s)
        if (!used[s]) walk(s, segs[s][0]);

    // Clip to the domain.
    std::vector<Curve> out;
    auto emit = [&](Curve& c) {
        if (c.points.size() >= 2 && c.length() > 0.0) out.push_back(std::move(c));
        c = Curve{};
    };
    auto add = [&](Curve& c, std::array<double, 2> q) {
        if (!c.points.empty() && c.points.back() == q) return;
        c.points.push_back(q);
        c.grad_norm.push_back(p.B0(q[0], q[1]).grad_norm());
    };
    auto boundary_point = [&](std::array<double, 2> in, std::array<double, 2> outp) {
        for (int k = 0; k < 60; ++k) {
            const std::array<double, 2> m{0.5 * (in[0] + outp[0]), 0.5 * (in[1] + outp[1])};
            if (p.geometry.contains(m[0], m[1])) in = m;
            else outp = m;
        }
        return in;
    };
    for (const auto& ids : chains) {
        Curve c;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const auto q = crossing[ids[k]];
            const bool in = p.geometry.contains(q[0], q[1]);
            const bool prev_in = k > 0 && p.geometry.contains(crossing[ids[k - 1]][0], crossing[ids[k - 1]][1]);
            if (in) {
                if (k > 0 && !prev_in) add(c, boundary_point(q, crossing[ids[k - 1]]));
                add(c, q);
            } else if (k > 0 && prev_in) {
                add(c, boundary_point(crossing[ids[k - 1]], q));
                emit(c);
            }
        }
        emit(c);
    }
    return out;
}

} // namespace detail

/// Build the discretized problem. Rejects B0 with |B0| + |grad B0| vanishing
/// on a node and a zero set running along the boundary.
inline DomainProblem build_problem(const Geometry& geom, B0Function B0, const std::string& B0_text, double kappa,
                                   double H, const ProblemOptions& opt = {}) {
    require(std::isfinite(kappa) && kappa > 0.0, "domain: kappa must be positive");
    require(std::isfinite(H) && H > 0.0, "domain: H must be positive");
    require(static_cast<bool>(B0), "domain: B0 missing");
    require(opt.subsample >= 1, "domain: subsample must be >= 1");
    DomainProblem p;
    p.geometry = geom;
    p.B0_text = B0_text;
    p.B0 = std::move(B0);
    p.kappa = kappa;
    p.H = H;
    p.subsample = opt.subsample;
    const double lx = geom.x1 - geom.x0, ly = geom.y1 - geom.y0;

    double h = opt.h;
    if (h <= 0.0) {
        double bmax = 0.0;
        for (int b = 0; b <= 64; ++b)
            for (int a = 0; a <= 64; ++a) {
                const double x = geom.x0 + lx * a / 64.0, y = geom.y0 + ly * b / 64.0;
                if (geom.contains(x, y)) bmax = std::max(bmax, std::abs(p.B0(x, y).v));
            }
        h = 1.0 / (6.0 * kappa);
        if (bmax > 0.0) h = std::min(h, 0.5 / std::sqrt(p.kH() * bmax));
    }
    require(std::isfinite(h) && h > 0.0, "domain: spacing must be positive");
    auto cells = [&](double len) {
        const auto c = static_cast<std::size_t>(std::ceil(len / h - 1e-9));
        return std::max<std::size_t>(2, c + c % 2);
    };
    require(lx / h < 1e5 && ly / h < 1e5, "domain: mesh too fine");
    p.grid = RectGrid(geom.x0, geom.y0, lx, ly, cells(lx) + 1, cells(ly) + 1);
    const RectGrid& g = p.grid;
    const double hx = g.hx(), hy = g.hy();
    const std::size_t px = g.nx - 1, py = g.ny - 1;

    // Plaquette fractions and node/edge weights.
    const auto inside = [&geom](double x, double y) { return geom.contains(x, y); };
    p.frac.assign(px * py, 0.0);
    p.B0_center.assign(px * py, 0.0);
    for (std::size_t j = 0; j < py; ++j)
        for (std::size_t i = 0; i < px; ++i) {
            p.frac[p.plaquette(i, j)] = detail::plaquette_fraction(g, i, j, p.subsample, inside);
            p.B0_center[p.plaquette(i, j)] = p.B0(g.x(i) + 0.5 * hx, g.y(j) + 0.5 * hy).v;
        }
    std::vector<double> w(p.grid_edges(), 0.0);
    p.lat.area.assign(g.size(), 0.0);
    for (std::size_t j = 0; j < py; ++j)
        for (std::size_t i = 0; i < px; ++i) {
            const double f = p.frac[p.plaquette(i, j)];
            if (f == 0.0) continue;
            for (std::size_t n : {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)})
                p.lat.area[n] += 0.25 * f * hx * hy;
            w[p.x_edge(i, j)] += 0.5 * f * hy / hx;
            w[p.x_edge(i, j + 1)] += 0.5 * f * hy / hx;
            w[p.y_edge(i, j)] += 0.5 * f * hx / hy;
            w[p.y_edge(i + 1, j)] += 0.5 * f * hx / hy;
        }
    p.lat.pinned.assign(g.size(), 0);
    for (std::size_t n = 0; n < g.size(); ++n) p.lat.pinned[n] = p.lat.area[n] > 0.0 ? 0 : 1;

    // F from the stream function: lap_h Phi = B0 at plaquette centres.
    p.stream = solve_poisson_dst(px, py, hx, hy, p.B0_center);
    auto phi = [&](long i, long j) -> double {
        if (i < 0 || j < 0 || i >= static_cast<long>(px) || j >= static_cast<long>(py)) return 0.0;
        return p.stream[static_cast<std::size_t>(i) + px * static_cast<std::size_t>(j)];
    };
    p.theta.assign(p.grid_edges(), 0.0);
    const double kH = p.kH();
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const long li = static_cast<long>(i), lj = static_cast<long>(j);
            if (i < px) p.theta[p.x_edge(i, j)] = -kH * (phi(li, lj) - phi(li, lj - 1)) * hx / hy;
            if (j < py) p.theta[p.y_edge(i, j)] = kH * (phi(li, lj) - phi(li - 1, lj)) * hy / hx;
        }
    for (std::size_t j = 0; j < py; ++j)
        for (std::size_t i = 0; i < px; ++i) {
            const double circ = p.theta[p.x_edge(i, j)] + p.theta[p.y_edge(i + 1, j)] - p.theta[p.x_edge(i, j + 1)] -
                                p.theta[p.y_edge(i, j)];
            p.curl_residual = std::max(p.curl_residual, std::abs(circ / (kH * hx * hy) - p.B0_center[p.plaquette(i, j)]));
        }
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (i < px && w[p.x_edge(i, j)] > 0.0) {
                p.lat.edges.emplace_back(g.index(i, j), g.index(i + 1, j), w[p.x_edge(i, j)], p.theta[p.x_edge(i, j)]);
                p.edge_of.push_back(p.x_edge(i, j));
            }
            if (j < py && w[p.y_edge(i, j)] > 0.0) {
                p.lat.edges.emplace_back(g.index(i, j), g.index(i, j + 1), w[p.y_edge(i, j)], p.theta[p.y_edge(i, j)]);
                p.edge_of.push_back(p.y_edge(i, j));
            }
        }

    // Non-degeneracy |B0| + |grad B0| >= c > 0 on active nodes.
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (p.lat.pinned[g.index(i, j)]) continue;
            const expr::Dual d = p.B0(g.x(i), g.y(j));
            require(std::isfinite(d.v) && std::isfinite(d.grad_norm()), "domain: B0 is not finite on the mesh");
            const double c = std::abs(d.v) + d.grad_norm();
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
    if (!(cmin > 1e-10 * std::max(cmax, 1e-300)))
        throw ValidationError("domain: |B0| + |grad B0| vanishes on the mesh (degenerate zero set)");
    p.nondegeneracy = cmin;

    // B0 vanishing along a piece of the boundary (no sign change for the contour tracer).
    std::size_t boundary_zeros = 0;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (p.lat.pinned[g.index(i, j)]) continue;
            const double x = g.x(i), y = g.y(j);
            if (geom.boundary_distance(x, y) < 0.5 * std::min(hx, hy) && std::abs(p.B0(x, y).v) <= 1e-12 * cmax)
                ++boundary_zeros;
        }
    if (boundary_zeros > 4) throw ValidationError("domain: the zero set of B0 runs along the boundary");

    p.gamma = detail::marching_squares(p);
    // A zero set running along the boundary meets it in more than finitely many points.
    const double near = 0.5 * std::min(hx, hy);
    for (const Curve& c : p.gamma) {
        double along = 0.0;
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            const auto& a = c.points[k - 1];
            const auto& b = c.points[k];
            if (geom.boundary_distance(a[0], a[1]) < near && geom.boundary_distance(b[0], b[1]) < near)
                along += std::hypot(b[0] - a[0], b[1] - a[1]);
        }
        if (along > 4.0 * std::max(hx, hy))
            throw ValidationError("domain: the zero set of B0 runs along the boundary");
    }
    return p;
}

inline DomainProblem build_problem(const Geometry& geom, const std::string& B0_text, double kappa, double H,
                                   const ProblemOptions& opt = {}) {
    auto e = expr::parse(B0_text);
    return build_problem(geom, [e](double x, double y) { return e->eval(x, y); }, B0_text, kappa, H, opt);
}

enum class Mode { Fixed, Full };

inline const char* to_string(Mode m) { return m == Mode::Fixed ? "fixed" : "full"; }

struct EnergyParts {
    double kinetic = 0.0;
    double linear = 0.0;    ///< -k^2 int |psi|^2
    double quartic = 0.0;   ///< k^2/2 int |psi|^4
    double magnetic = 0.0;  ///< (kH)^2 int |curl A - B0|^2

    double total() const { return kinetic + linear + quartic + magnetic; }
};

struct Residuals {
    double psi_eq = 0.0;  ///< ||GL residual|| / (k^2 ||psi||)
    double A_eq = 0.0;    ///< ||dE/d delta|| / (||current part|| + ||curl part||)
    double virial = 0.0;  ///< |E0 + k^2/2 int |psi|^4| / (k^2 int |psi|^2)
};

struct GLState {
    Field psi;
    std::vector<double> delta;  ///< extra link phases per grid edge (zero in fixed mode)
    Mode mode = Mode::Fixed;
    double energy_total = 0.0;
    EnergyParts parts;
    Residuals residuals;
    std::size_t iterations = 0;
    std::size_t outer = 0;
    bool converged = false;
    bool collapsed = false;
};

/// Lattice with link phases theta + delta.
inline lattice::Lattice lattice_with(const DomainProblem& p, const std::vector<double>& delta) {
    lattice::Lattice lat = p.lat;
    if (delta.empty()) return lat;
    require(delta.size() == p.grid_edges(), "domain: delta size mismatch");
    for (std::size_t k = 0; k < lat.edges.size(); ++k) lat.edges[k].set_theta(p.theta[p.edge_of[k]] + delta[p.edge_of[k]]);
    return lat;
}

/// Circulation of delta around plaquette (i, j).
inline double circulation(const DomainProblem& p, const std::vector<double>& d, std::size_t i, std::size_t j) {
    return d[p.x_edge(i, j)] + d[p.y_edge(i + 1, j)] - d[p.x_edge(i, j + 1)] - d[p.y_edge(i, j)];
}

inline double magnetic_part(const DomainProblem& p, const std::vector<double>& delta) {
    if (delta.empty()) return 0.0;
    const double hxy = p.grid.hx() * p.grid.hy();
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < p.grid.ny; ++j)
        for (std::size_t i = 0; i + 1 < p.grid.nx; ++i) {
            const double f = p.frac[p.plaquette(i, j)];
            if (f > 0.0) s += f * std::pow(circulation(p, delta, i, j), 2) / hxy;
        }
    return s;
}

inline EnergyParts energy_parts(const DomainProblem& p, const Field& psi, const std::vector<double>& delta) {
    const lattice::Lattice lat = lattice_with(p, delta);
    const lattice::EnergyParts e = lattice::energy_parts(lat, p.coefficients(), psi);
    return {e.kinetic, e.linear, e.quartic, magnetic_part(p, delta)};
}

inline double energy(const DomainProblem& p, const Field& psi, const std::vector<double>& delta = {}) {
    return energy_parts(p, psi, delta).total();
}

/// dE/d delta per grid edge, split into the current and the curl parts.
inline std::pair<std::vector<double>, std::vector<double>> delta_gradient_parts(const DomainProblem& p, const Field& psi,
                                                                                const std::vector<double>& delta) {
    std::vector<double> gk(p.grid_edges(), 0.0), gm(p.grid_edges(), 0.0);
    const lattice::Lattice lat = lattice_with(p, delta);
    const std::vector<double> pg = lattice::phase_gradient(lat, p.coefficients(), psi);
    for (std::size_t k = 0; k < pg.size(); ++k) gk[p.edge_of[k]] = pg[k];
    if (!delta.empty()) {
        const double hxy = p.grid.hx() * p.grid.hy();
        for (std::size_t j = 0; j + 1 < p.grid.ny; ++j)
            for (std::size_t i = 0; i + 1 < p.grid.nx; ++i) {
                const double f = p.frac[p.plaquette(i, j)];
                if (f == 0.0) continue;
                const double c = 2.0 * f * circulation(p, delta, i, j) / hxy;
                gm[p.x_edge(i, j)] += c;
                gm[p.y_edge(i + 1, j)] += c;
                gm[p.x_edge(i, j + 1)] -= c;
                gm[p.y_edge(i, j)] -= c;
            }
    }
    return {std::move(gk), std::move(gm)};
}

inline std::vector<double> delta_gradient(const DomainProblem& p, const Field& psi, const std::vector<double>& delta) {
    auto [gk, gm] = delta_gradient_parts(p, psi, delta);
    for (std::size_t e = 0; e < gk.size(); ++e) gk[e] += gm[e];
    return gk;
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline Residuals gl_residual(const DomainProblem& p, const Field& psi, const std::vector<double>& delta) {
    lattice::check_shape(p.lat, psi, "gl_residual");
    Residuals r;
    const lattice::Lattice lat = lattice_with(p, delta);
    const lattice::Coefficients c = p.coefficients();
    Field g;
    lattice::gradient(lat, c, psi, g);
    const double un = lattice::l2_norm(lat, psi);
    r.psi_eq = un > 0.0 ? lattice::residual_norm(lat, g) / (c.linear * un) : 0.0;
    const auto [gk, gm] = delta_gradient_parts(p, psi, delta);
    std::vector<double> gt(gk);
    for (std::size_t e = 0; e < gt.size(); ++e) gt[e] += gm[e];
    const double scale = norm2(gk) + norm2(gm);
    r.A_eq = scale > 0.0 ? norm2(gt) / scale : 0.0;
    const lattice::EnergyParts e = lattice::energy_parts(lat, c, psi);
    r.virial = un > 0.0 ? std::abs(e.total() + e.quartic) / (c.linear * un * un) : 0.0;
    return r;
}

inline Residuals gl_residual(const DomainProblem& p, const GLState& s) { return gl_residual(p, s.psi, s.delta); }

struct SolveOptions {
    double tol = 1e-6;
    std::size_t max_iter = 200000;
    std::size_t max_outer = 50;
    std::uint64_t seed = 1;
    double noise = 0.05;
};

/// sqrt((1 - (H/k)|B0|)_+) plus complex noise on active nodes.
inline Field default_seed(const DomainProblem& p, std::uint64_t seed, double noise) {
    SplitMix64 rng(seed);
    const RectGrid& g = p.grid;
    Field u(g.size());
    const double b = p.H / p.kappa;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double re = rng.symmetric(), im = rng.symmetric();
            const std::size_t n = g.index(i, j);
            if (p.lat.pinned[n]) continue;
            const double a = std::sqrt(std::max(0.0, 1.0 - b * std::abs(p.B0(g.x(i), g.y(j)).v)));
            u[n] = a + noise * cplx(re, im);
        }
    return u;
}

namespace detail {

/// Kinetic plus magnetic energy as a function of delta at fixed psi.
inline double a_objective(const DomainProblem& p, const Field& psi, const std::vector<double>& d) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.lat.edges.size(); ++k) {
        const auto& e = p.lat.edges[k];
        const std::size_t g = p.edge_of[k];
        s += e.weight * std::norm(psi[e.b] * std::polar(1.0, -(p.theta[g] + d[g])) - psi[e.a]);
    }
    return s + magnetic_part(p, d);
}

/// Damped Newton in delta at fixed psi. The Hessian is the per-edge current
/// curvature (clipped at 0) plus the plaquette curl-curl form, factorized by
/// sparse LDL^T; a tiny diagonal shift fixes the gauge directions where psi
/// vanishes. Returns Newton iterations.
inline std::size_t a_step(const DomainProblem& p, const Field& psi, std::vector<double>& delta, double tol,
                          std::size_t max_iter) {
    using SpMat = Eigen::SparseMatrix<double>;
    const std::size_t n = p.grid_edges();
    const double hxy = p.grid.hx() * p.grid.hy();
    const auto idx = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(n), g(n), trial(n);
    Eigen::VectorXd rhs(idx(n));
    Eigen::SimplicialLDLT<SpMat> solver;
    bool analyzed = false;
    double f0 = a_objective(p, psi, delta);
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        const auto [gk, gm] = delta_gradient_parts(p, psi, delta);
        for (std::size_t e = 0; e < n; ++e) g[e] = gk[e] + gm[e];
        const double scale = norm2(gk) + norm2(gm);
        if (scale == 0.0 || norm2(g) <= tol * scale) break;

        trip.clear();
        std::fill(diag.begin(), diag.end(), 0.0);
        for (std::size_t k = 0; k < p.lat.edges.size(); ++k) {
            const auto& e = p.lat.edges[k];
            const std::size_t ge = p.edge_of[k];
            const cplx z = psi[e.b] * std::conj(psi[e.a]) * std::polar(1.0, -(p.theta[ge] + delta[ge]));
            diag[ge] += std::max(0.0, 2.0 * e.weight * z.real());
        }
        for (std::size_t j = 0; j + 1 < p.grid.ny; ++j)
            for (std::size_t i = 0; i + 1 < p.grid.nx; ++i) {
                const double f = p.frac[p.plaquette(i, j)];
                if (f == 0.0) continue;
                const std::size_t es[4] = {p.x_edge(i, j), p.y_edge(i + 1, j), p.x_edge(i, j + 1), p.y_edge(i, j)};
                const double sg[4] = {1.0, 1.0, -1.0, -1.0};
                const double c = 2.0 * f / hxy;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) trip.emplace_back(idx(es[a]), idx(es[b]), c * sg[a] * sg[b]);
            }
        double dmax = 0.0;
        for (double d : diag) dmax = std::max(dmax, d);
        const double shift = 1e-10 * std::max(dmax, 2.0 / hxy);
        for (std::size_t e = 0; e < n; ++e) trip.emplace_back(idx(e), idx(e), diag[e] + shift);
        SpMat H(idx(n), idx(n));
        H.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed) {
            solver.analyzePattern(H);
            analyzed = true;
        }
        solver.factorize(H);
        if (solver.info() != Eigen::Success) throw SolverError("minimize_gl: A-step factorization failed");
        for (std::size_t e = 0; e < n; ++e) rhs[idx(e)] = -g[e];
        const Eigen::VectorXd dir = solver.solve(rhs);
        double slope = 0.0;
        for (std::size_t e = 0; e < n; ++e) slope += g[e] * dir[idx(e)];
        if (!(slope < 0.0)) break;
        double s = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t e = 0; e < n; ++e) trial[e] = delta[e] + s * dir[idx(e)];
            const double f1 = a_objective(p, psi, trial);
            if (f1 <= f0 + 1e-4 * s * slope) {
                delta.swap(trial);
                f0 = f1;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) break;
    }
    return it;
}

} // namespace detail

inline void finish_state(const DomainProblem& p, GLState& s) {
    s.parts = energy_parts(p, s.psi, s.mode == Mode::Full ? s.delta : std::vector<double>{});
    if (s.mode == Mode::Fixed) s.parts.magnetic = 0.0;
    s.energy_total = s.parts.total();
    s.residuals = gl_residual(p, s.psi, s.delta);
    if (!std::isfinite(s.energy_total)) throw SolverError("minimize_gl: energy diverged");
}

/// Minimize in psi with A = F (fixed) or alternately in psi and delta (full).
/// `seed` empty selects the default seed.
inline GLState minimize_gl(const DomainProblem& p, Mode mode, const SolveOptions& opt = {}, Field seed = {}) {
    require(opt.tol > 0.0, "minimize_gl: tol must be positive");
    if (seed.empty()) seed = default_seed(p, opt.seed, opt.noise);
    lattice::check_shape(p.lat, seed, "minimize_gl");
    GLState s;
    s.mode = mode;
    s.psi = std::move(seed);
    s.delta.assign(p.grid_edges(), 0.0);
    lattice::NcgOptions no;
    no.tol = opt.tol;
    no.max_iter = opt.max_iter;
    const lattice::Coefficients c = p.coefficients();

    lattice::NcgResult r = lattice::minimize_ncg(p.lat, c, s.psi, no);
    s.iterations = r.iterations;
    if (!r.converged)
        throw SolverError("minimize_gl: psi-step did not converge after " + std::to_string(r.iterations) +
                          " iterations (residual " + std::to_string(r.residual) + ")");
    s.collapsed = r.collapsed;
    if (mode == Mode::Full && !s.collapsed) {
        bool done = false;
        for (s.outer = 1; s.outer <= opt.max_outer; ++s.outer) {
            detail::a_step(p, s.psi, s.delta, opt.tol, opt.max_iter);
            const lattice::Lattice lat = lattice_with(p, s.delta);
            r = lattice::minimize_ncg(lat, c, s.psi, no);
            s.iterations += r.iterations;
            if (!r.converged) throw SolverError("minimize_gl: psi-step did not converge in full mode");
            s.collapsed = r.collapsed;
            const Residuals res = gl_residual(p, s.psi, s.delta);
            if (s.collapsed || (res.psi_eq <= opt.tol && res.A_eq <= opt.tol)) {
                done = true;
                break;
            }
        }
        if (!done) throw SolverError("minimize_gl: alternating psi/A descent did not converge");
    }
    if (s.collapsed) std::fill(s.delta.begin(), s.delta.end(), 0.0);
    if (mode == Mode::Fixed) s.delta.clear();
    finish_state(p, s);
    s.converged = true;
    return s;
}

/// Plaquette fractions of the domain intersected with `region`.
inline std::vector<double> region_fractions(const DomainProblem& p, const std::function<bool(double, double)>& region) {
    std::vector<double> f(p.plaquettes(), 0.0);
    const auto inside = [&](double x, double y) { return p.geometry.contains(x, y) && region(x, y); };
    for (std::size_t j = 0; j + 1 < p.grid.ny; ++j)
        for (std::size_t i = 0; i + 1 < p.grid.nx; ++i)
            if (p.frac[p.plaquette(i, j)] > 0.0)
                f[p.plaquette(i, j)] = detail::plaquette_fraction(p.grid, i, j, p.subsample, inside);
    return f;
}

/// E0(psi, A; D): the energy without the magnetic term, restricted to D with
/// partial-plaquette weights. Empty D gives 0 and a warning on std::clog.
inline double local_energy(const DomainProblem& p, const GLState& s, const std::function<bool(double, double)>& region) {
    const std::vector<double> f = region_fractions(p, region);
    const RectGrid& g = p.grid;
    const double hx = g.hx(), hy = g.hy(), k2 = p.kappa * p.kappa;
    auto link = [&](std::size_t e, std::size_t a, std::size_t b) {
        const double th = p.theta[e] + (s.delta.empty() ? 0.0 : s.delta[e]);
        return std::norm(s.psi[b] * std::polar(1.0, -th) - s.psi[a]);
    };
    auto pot = [&](std::size_t n) {
        const double m = std::norm(s.psi[n]);
        return -k2 * m + 0.5 * k2 * m * m;
    };
    double total = 0.0, covered = 0.0;
    for (std::size_t j = 0; j + 1 < g.ny; ++j)
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            const double fp = f[p.plaquette(i, j)];
            if (fp == 0.0) continue;
            covered += fp;
            const std::size_t n00 = g.index(i, j), n10 = g.index(i + 1, j), n01 = g.index(i, j + 1),
                              n11 = g.index(i + 1, j + 1);
            const double kin = hy / hx * (link(p.x_edge(i, j), n00, n10) + link(p.x_edge(i, j + 1), n01, n11)) +
                               hx / hy * (link(p.y_edge(i, j), n00, n01) + link(p.y_edge(i + 1, j), n10, n11));
            total += fp * (0.5 * kin + 0.25 * hx * hy * (pot(n00) + pot(n10) + pot(n01) + pot(n11)));
        }
    if (covered == 0.0) std::clog << "warning: local_energy: region does not meet the domain\n";
    return total;
}

namespace detail {
inline double node_moment(const DomainProblem& p, const GLState& s, const std::function<bool(double, double)>& region,
                          int power) {
    const std::vector<double> f = region_fractions(p, region);
    const RectGrid& g = p.grid;
    const double q = 0.25 * g.hx() * g.hy();
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < g.ny; ++j)
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            const double fp = f[p.plaquette(i, j)];
            if (fp == 0.0) continue;
            double m = 0.0;
            for (std::size_t n : {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)})
                m += std::pow(std::norm(s.psi[n]), power);
            total += fp * q * m;
        }
    return total;
}
} // namespace detail

/// int_D |psi|^4.
inline double order_mass(const DomainProblem& p, const GLState& s, const std::function<bool(double, double)>& region) {
    return detail::node_moment(p, s, region, 2);
}

/// int_D |psi|^2.
inline double order_mass2(const DomainProblem& p, const GLState& s, const std::function<bool(double, double)>& region) {
    return detail::node_moment(p, s, region, 1);
}

inline bool everywhere(double, double) { return true; }

struct MagneticEnergy {
    double value = 0.0;
    bool fixed_mode = false;  ///< A = F: the term is identically zero
};

inline MagneticEnergy magnetic_energy(const DomainProblem& p, const GLState& s) {
    if (s.mode == Mode::Fixed) return {0.0, true};
    return {magnetic_part(p, s.delta), false};
}

/// Distance from each node to the zero set (point-to-polyline).
inline std::vector<double> distance_to_gamma(const DomainProblem& p) {
    require(!p.gamma.empty(), "distance_to_gamma: the zero set is empty");
    const RectGrid& g = p.grid;
    std::vector<double> d(g.size(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double x = g.x(i), y = g.y(j);
            double best = std::numeric_limits<double>::infinity();
            for (const Curve& c : p.gamma)
                for (std::size_t k = 1; k < c.points.size(); ++k) {
                    const double ax = c.points[k - 1][0], ay = c.points[k - 1][1];
                    const double bx = c.points[k][0] - ax, by = c.points[k][1] - ay;
                    const double len2 = bx * bx + by * by;
                    double t = len2 > 0.0 ? ((x - ax) * bx + (y - ay) * by) / len2 : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    best = std::min(best, std::hypot(x - ax - t * bx, y - ay - t * by));
                }
            d[g.index(i, j)] = best;
        }
    return d;
}

/// Fraction of int |psi|^2 on nodes within distance `dist` of Gamma.
inline double mass_fraction_within(const DomainProblem& p, const GLState& s, double dist) {
    const std::vector<double> d = distance_to_gamma(p);
    double in = 0.0, all = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double m = p.lat.area[n] * std::norm(s.psi[n]);
        all += m;
        if (d[n] <= dist) in += m;
    }
    return all > 0.0 ? in / all : 0.0;
}

struct DecayProfile {
    double unit = 0.0;       ///< kappa / H
    double bin_width = 0.0;  ///< in units of kappa / H
    std::vector<double> mass;  ///< int |psi|^2 per bin of t H / kappa
    double total = 0.0;
    double m_hat = 0.0;      ///< -slope/2 of log(mass) over the tail
    std::size_t fit_bins = 0;
    double bandwidth90 = 0.0;  ///< smallest t with 90% of int |psi|^2 within distance t
};

inline DecayProfile decay_profile(const DomainProblem& p, const GLState& s, std::size_t bins = 40) {
    require(bins >= 2, "decay_profile: need at least 2 bins");
    if (p.gamma.empty()) throw ValidationError("decay_profile: the zero set is empty");
    const std::vector<double> d = distance_to_gamma(p);
    DecayProfile out;
    out.unit = p.kappa / p.H;
    double smax = 0.0;
    std::vector<std::pair<double, double>> tm;
    for (std::size_t n = 0; n < d.size(); ++n) {
        if (p.lat.pinned[n]) continue;
        const double m = p.lat.area[n] * std::norm(s.psi[n]);
        smax = std::max(smax, d[n] / out.unit);
        tm.emplace_back(d[n], m);
        out.total += m;
    }
    out.bin_width = smax > 0.0 ? smax / static_cast<double>(bins) : 1.0;
    out.mass.assign(bins, 0.0);
    for (const auto& [t, m] : tm) {
        auto k = static_cast<std::size_t>(t / out.unit / out.bin_width);
        out.mass[std::min(k, bins - 1)] += m;
    }
    if (out.total <= 0.0) return out;
    std::sort(tm.begin(), tm.end());
    double acc = 0.0;
    for (const auto& [t, m] : tm) {
        acc += m;
        if (acc >= 0.9 * out.total) {
            out.bandwidth90 = t;
            break;
        }
    }
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(out.mass.begin(), out.mass.end()) - out.mass.begin());
    std::vector<double> xs, ys;
    for (std::size_t k = peak; k < bins; ++k) {
        if (out.mass[k] <= 1e-14 * out.total) break;
        xs.push_back((static_cast<double>(k) + 0.5) * out.bin_width);
        ys.push_back(std::log(out.mass[k]));
    }
    out.fit_bins = xs.size();
    if (xs.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double nn = static_cast<double>(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sx += xs[k];
            sy += ys[k];
            sxx += xs[k] * xs[k];
            sxy += xs[k] * ys[k];
        }
        const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
        out.m_hat = -0.5 * slope;
    }
    return out;
}

} // namespace glzero::domain

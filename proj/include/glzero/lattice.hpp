#pragma once

// Link-variable (Peierls) discretization of a Ginzburg-Landau type functional
//
//   E(u) = kin * sum_e w_e |u_b e^{-i theta_e} - u_a|^2
//        + sum_i area_i (-lin |u_i|^2 + quart/2 |u_i|^4)
//
// on an arbitrary node/edge graph. theta_e approximates the line integral of
// the vector potential along the edge a -> b. Strip, cell and domain problems
// all assemble one of these.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "glzero/error.hpp"

namespace glzero::lattice {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;

struct Edge {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double weight = 0.0;
    double theta = 0.0;
    cplx link{1.0, 0.0};  ///< cached e^{-i theta}

    Edge() = default;
    Edge(std::size_t a_, std::size_t b_, double w, double th)
        : a(static_cast<std::uint32_t>(a_)), b(static_cast<std::uint32_t>(b_)), weight(w), theta(th),
          link(std::polar(1.0, -th)) {}

    void set_theta(double th) {
        theta = th;
        link = std::polar(1.0, -th);
    }
};

struct Coefficients {
    double kinetic = 1.0;
    double linear = 1.0;
    double quartic = 1.0;
};

struct Lattice {
    std::vector<double> area;            ///< quadrature weight per node
    std::vector<std::uint8_t> pinned;    ///< 1 = held at zero (Dirichlet or inactive)
    std::vector<Edge> edges;

    std::size_t size() const { return area.size(); }

    double total_area() const {
        double s = 0.0;
        for (std::size_t i = 0; i < area.size(); ++i)
            if (!pinned[i]) s += area[i];
        return s;
    }
};

inline void check_shape(const Lattice& lat, const Field& u, const char* who) {
    if (u.size() != lat.size())
        throw ValidationError(std::string(who) + ": field has " + std::to_string(u.size()) + " nodes, lattice has " +
                              std::to_string(lat.size()));
}

struct EnergyParts {
    double kinetic = 0.0;  ///< kin * sum w |D u|^2
    double linear = 0.0;   ///< -lin * int |u|^2
    double quartic = 0.0;  ///< quart/2 * int |u|^4
    double total() const { return kinetic + linear + quartic; }
};

inline cplx link_difference(const Edge& e, const Field& u) {
    return u[e.b] * e.link - u[e.a];
}

inline EnergyParts energy_parts(const Lattice& lat, const Coefficients& c, const Field& u) {
    check_shape(lat, u, "energy");
    EnergyParts p;
    double kin = 0.0;
    for (const Edge& e : lat.edges) kin += e.weight * std::norm(link_difference(e, u));
    p.kinetic = c.kinetic * kin;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::norm(u[i]);
        m2 += lat.area[i] * a;
        m4 += lat.area[i] * a * a;
    }
    p.linear = -c.linear * m2;
    p.quartic = 0.5 * c.quartic * m4;
    return p;
}

inline double energy(const Lattice& lat, const Coefficients& c, const Field& u) {
    return energy_parts(lat, c, u).total();
}

/// g = dE/d(Re u) + i dE/d(Im u), zero on pinned nodes. Returns E(u).
inline double gradient(const Lattice& lat, const Coefficients& c, const Field& u, Field& g) {
    check_shape(lat, u, "gradient");
    g.assign(u.size(), cplx{});
    double kin = 0.0;
    for (const Edge& e : lat.edges) {
        const cplx ph = e.link;
        const cplx d = u[e.b] * ph - u[e.a];
        kin += e.weight * std::norm(d);
        const cplx t = 2.0 * c.kinetic * e.weight * d;
        g[e.a] -= t;
        g[e.b] += t * std::conj(ph);
    }
    double pot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::norm(u[i]);
        pot += lat.area[i] * (-c.linear * a + 0.5 * c.quartic * a * a);
        if (lat.pinned[i]) {
            g[i] = 0.0;
        } else {
            g[i] += 2.0 * lat.area[i] * (-c.linear + c.quartic * a) * u[i];
        }
    }
    return c.kinetic * kin + pot;
}

/// E(u + s d) - E(u) = c1 s + c2 s^2 + c3 s^3 + c4 s^4.
struct LineCoefficients {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
};

inline LineCoefficients line_coefficients(const Lattice& lat, const Coefficients& c, const Field& u,
                                          const Field& d) {
    LineCoefficients lc;
    double k1 = 0.0, k2 = 0.0;
    for (const Edge& e : lat.edges) {
        const cplx ph = e.link;
        const cplx du = u[e.b] * ph - u[e.a];
        const cplx dd = d[e.b] * ph - d[e.a];
        k1 += e.weight * 2.0 * (std::conj(du) * dd).real();
        k2 += e.weight * std::norm(dd);
    }
    lc.c1 = c.kinetic * k1;
    lc.c2 = c.kinetic * k2;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = lat.area[i];
        const double p = std::norm(u[i]);
        const double q = (std::conj(u[i]) * d[i]).real();
        const double m = std::norm(d[i]);
        lc.c1 += w * (-2.0 * c.linear * q + 2.0 * c.quartic * p * q);
        lc.c2 += w * (-c.linear * m + c.quartic * (2.0 * q * q + p * m));
        lc.c3 += w * 2.0 * c.quartic * q * m;
        lc.c4 += w * 0.5 * c.quartic * m * m;
    }
    return lc;
}

/// Area-weighted L2 norm sqrt(sum area |u|^2) over free nodes.
inline double l2_norm(const Lattice& lat, const Field& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!lat.pinned[i]) s += lat.area[i] * std::norm(u[i]);
    return std::sqrt(s);
}

/// Norm of the discrete GL-equation residual r_i = g_i / (2 area_i),
/// measured as sqrt(sum area |r|^2).
inline double residual_norm(const Lattice& lat, const Field& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!lat.pinned[i] && lat.area[i] > 0.0) s += std::norm(g[i]) / (4.0 * lat.area[i]);
    return std::sqrt(s);
}

/// E + quart/2 int |u|^4. At a critical point of E it vanishes; in general it
/// equals Re<u, g>/2.
inline double virial_gap(const Lattice& lat, const Coefficients& c, const Field& u) {
    const EnergyParts p = energy_parts(lat, c, u);
    return p.total() + p.quartic;
}

inline double sup_norm(const Field& u) {
    double s = 0.0;
    for (const cplx& z : u) s = std::max(s, std::abs(z));
    return s;
}

/// Discrete gauge transform: u_i -> u_i e^{i chi_i}, theta_e -> theta_e + chi_b - chi_a.
inline void gauge_transform(Lattice& lat, Field& u, const std::vector<double>& chi) {
    check_shape(lat, u, "gauge_transform");
    require(chi.size() == u.size(), "gauge_transform: chi size mismatch");
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::polar(1.0, chi[i]);
    for (Edge& e : lat.edges) e.set_theta(e.theta + chi[e.b] - chi[e.a]);
}

/// dE/d theta_e for every edge (used when the link phases are unknowns).
inline std::vector<double> phase_gradient(const Lattice& lat, const Coefficients& c, const Field& u) {
    std::vector<double> out(lat.edges.size());
    for (std::size_t k = 0; k < lat.edges.size(); ++k) {
        const Edge& e = lat.edges[k];
        out[k] = -2.0 * c.kinetic * e.weight * (u[e.b] * std::conj(u[e.a]) * e.link).imag();
    }
    return out;
}

inline double dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (std::conj(a[i]) * b[i]).real();
    return s;
}

} // namespace glzero::lattice

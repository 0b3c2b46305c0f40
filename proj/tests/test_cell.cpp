#include <gtest/gtest.h>

#include <cmath>

#include "glzero/cell.hpp"

using namespace glzero;
using namespace glzero::cell;

namespace {

Field random_field(const RectGrid& g, Boundary bc, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Field u(g.size());
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double re = rng.symmetric(), im = rng.symmetric();
            if (bc == Boundary::Dirichlet && g.boundary(i, j)) continue;
            u[g.index(i, j)] = cplx(re, im);
        }
    return u;
}

}  // namespace

TEST(CellEnergy, ZeroField) {
    const RectGrid g = cell_grid(0.5, 4.0);
    EXPECT_EQ(cell_energy(Field(g.size()), 0.5, g, Boundary::Dirichlet), 0.0);
    EXPECT_EQ(cell_energy(Field(g.size()), 0.5, g, Boundary::Neumann), 0.0);
}

// u = 1 under Neumann: b int |A0|^2 - r^2/2 = b r^4/24 - r^2/2.
TEST(CellEnergy, ConstantFieldNeumann) {
    const double b = 0.7, r = 4.0;
    const RectGrid g = cell_grid(b, r);
    const Field one(g.size(), cplx(1.0, 0.0));
    const lattice::Lattice lat = build_lattice(g, Boundary::Neumann);
    double kin = 0.0;
    for (const auto& e : lat.edges) kin += e.weight * 4.0 * std::pow(std::sin(0.5 * e.theta), 2);
    const double e = cell_energy(one, b, g, Boundary::Neumann);
    EXPECT_NEAR(e, b * kin - 0.5 * r * r, 1e-12 * std::abs(e));
    const double exact = b * std::pow(r, 4) / 24.0 - 0.5 * r * r;
    EXPECT_NEAR(e, exact, 2e-3 * b * std::pow(r, 4) / 24.0);
}

TEST(CellEnergy, PointwiseLowerBound) {
    const double r = 3.0;
    for (Boundary bc : {Boundary::Dirichlet, Boundary::Neumann})
        for (std::uint64_t s = 1; s <= 5; ++s) {
            const RectGrid g = cell_grid(0.1, r);
            Field u = random_field(g, bc, s);
            for (cplx& z : u) z *= 0.3 * static_cast<double>(s);
            EXPECT_GE(cell_energy(u, 0.1, g, bc), -0.5 * r * r);
        }
}

TEST(CellEnergy, GaugeInvariance) {
    const RectGrid g = cell_grid(0.5, 4.0);
    lattice::Lattice lat = build_lattice(g, Boundary::Neumann);
    Field u = random_field(g, Boundary::Neumann, 7);
    const double e0 = lattice::energy(lat, coefficients(0.5), u);
    std::vector<double> chi(g.size());
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) chi[g.index(i, j)] = std::cos(2.0 * g.x(i)) * g.y(j) + g.x(i) * g.x(i);
    lattice::gauge_transform(lat, u, chi);
    EXPECT_NEAR(lattice::energy(lat, coefficients(0.5), u), e0, 1e-10 * std::abs(e0));
}

TEST(CellEnergy, RejectsBadInput) {
    const RectGrid g = cell_grid(0.5, 2.0);
    Field u(g.size());
    u[0] = 1.0;
    EXPECT_THROW(cell_energy(u, 0.5, g, Boundary::Dirichlet), ValidationError);
    EXPECT_NO_THROW(cell_energy(u, 0.5, g, Boundary::Neumann));
    EXPECT_THROW(cell_energy(Field(5), 0.5, g, Boundary::Neumann), ValidationError);
    EXPECT_THROW(cell_energy(u, 0.0, g, Boundary::Neumann), ValidationError);
    EXPECT_THROW(minimize_cell(0.5, 0.5, Boundary::Dirichlet), ValidationError);
    EXPECT_THROW(estimate_g(0.5, {8.0, 4.0}), ValidationError);
}

TEST(MinimizeCell, TrivialAboveOne) {
    const CellMinimizer d = minimize_cell(1.2, 8.0, Boundary::Dirichlet);
    EXPECT_TRUE(d.collapsed);
    EXPECT_EQ(d.energy, 0.0);
}

TEST(MinimizeCell, BoundsAndOrdering) {
    const GRow row = cell_ladder(0.5, {4.0, 8.0});
    for (std::size_t k = 0; k < 2; ++k) {
        const double r = row.r_list[k];
        EXPECT_LT(row.e_D[k], 0.0);
        EXPECT_GE(row.e_D[k], -0.5 * r * r);
        EXPECT_LE(row.e_N[k], row.e_D[k]);
    }
    const CellMinimizer m = minimize_cell(0.5, 4.0, Boundary::Neumann);
    EXPECT_LE(m.sup_u, 1.0 + 1e-6);
}

TEST(MinimizeCell, TiledTranslatesKeepEnergy) {
    CellOptions o;
    o.tol = 1e-6;
    const CellMinimizer m = minimize_cell(0.4, 3.0, Boundary::Dirichlet, o);
    const RectGrid big = cell_grid(0.4, 6.0);
    const Field u = tile_quadrants(m, big);
    ASSERT_EQ(u.size(), big.size());
    EXPECT_NEAR(cell_energy(u, 0.4, big, Boundary::Dirichlet), 4.0 * m.energy, 1e-9 * std::abs(m.energy));
}

// Halving the mesh shrinks the energy increment by about 4.
TEST(MinimizeCell, RefinementConvergence) {
    const double b = 0.5, r = 4.0;
    CellOptions o;
    o.tol = 1e-8;
    RectGrid g(-0.5 * r, -0.5 * r, r, r, 17, 17);
    CellMinimizer m = minimize_on(b, r, Boundary::Dirichlet, g, default_seed(b, g, Boundary::Dirichlet, 1), o);
    std::vector<double> e{m.energy};
    for (int k = 0; k < 2; ++k) {
        const Field seed = rect::prolong(g, m.u, rect::symmetric_gauge());
        g = g.refined();
        m = minimize_on(b, r, Boundary::Dirichlet, g, seed, o);
        e.push_back(m.energy);
    }
    const double ratio = (e[1] - e[0]) / (e[2] - e[1]);
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.0);
}

TEST(EstimateG, FitAndTrivialBranch) {
    GRow row;
    row.b = 0.3;
    row.r_list = {4.0, 8.0, 16.0};
    for (double r : row.r_list) row.e_D.push_back(r * r * (-0.3 + 0.2 / r));
    const GRow f = fit_g(row, 1e-8);
    EXPECT_NEAR(f.g_est, -0.3, 1e-12);
    EXPECT_NEAR(f.fit_c, 0.2, 1e-12);
    EXPECT_NEAR(f.envelope, std::sqrt(0.3) / 16.0, 1e-15);

    row.e_D = {-10.0, -10.0, -10.0};  // e_D/r^2 rising
    EXPECT_THROW(fit_g(row, 1e-8), SolverError);

    const GRow z = estimate_g(1.1, {2.0, 4.0, 8.0}, {}, false);
    EXPECT_EQ(z.g_est, 0.0);
}

// Frozen from a tol = 1e-6 run of the same ladder: g_est(0.5) = -0.1096.
// For comparison, the Abrikosov approximation -(1-b)^2/(2 * 1.1596) gives -0.108.
TEST(EstimateG, HalfAtStandardLadder) {
    const GRow row = estimate_g(0.5, {8.0, 16.0, 32.0});
    EXPECT_NEAR(row.g_est, -0.1096, 3e-3);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(row.e_N[k], row.e_D[k]);
}

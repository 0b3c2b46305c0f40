#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "glzero/domain.hpp"

using namespace glzero;
using namespace glzero::domain;

namespace {

const double pi = std::numbers::pi;

/// Unit disc, B0 = x1, sigma = H/k^2.
DomainProblem model(double kappa, double sigma, ProblemOptions o = {}) {
    return build_problem(Geometry::disc(1.0), "x1", kappa, sigma * kappa * kappa, o);
}

Field random_psi(const DomainProblem& p, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Field u(p.lat.size());
    for (std::size_t n = 0; n < u.size(); ++n)
        if (!p.lat.pinned[n]) u[n] = cplx(rng.symmetric(), rng.symmetric());
    return u;
}

std::vector<double> random_delta(const DomainProblem& p, std::uint64_t seed, double amp) {
    SplitMix64 rng(seed);
    std::vector<double> d(p.grid_edges());
    for (double& x : d) x = amp * rng.symmetric();
    return d;
}

const GLState& converged_fixed() {
    static const GLState s = minimize_gl(model(4.0, 0.5), Mode::Fixed);
    return s;
}

// Large enough that the order parameter is confined to a thin band around Gamma.
const DomainProblem& model8() {
    static const DomainProblem p = model(8.0, 0.5);
    return p;
}

const GLState& converged_k8() {
    static const GLState s = minimize_gl(model8(), Mode::Fixed);
    return s;
}

}  // namespace

TEST(Problem, ModelZeroSet) {
    const DomainProblem p = model(6.0, 0.5);
    ASSERT_EQ(p.gamma.size(), 1u);
    EXPECT_NEAR(p.gamma_length(), 2.0, 1e-9);
    for (const auto& q : p.gamma[0].points) EXPECT_NEAR(q[0], 0.0, 1e-12);
    for (double gn : p.gamma[0].grad_norm) EXPECT_DOUBLE_EQ(gn, 1.0);
    EXPECT_LT(p.curl_residual, 1e-9);
    EXPECT_NEAR(p.nondegeneracy, 1.0, 1e-12);
    EXPECT_NEAR(p.lat.total_area(), pi, 2e-3);
}

TEST(Problem, CurvedZeroSet) {
    // Circle of radius 0.5 inside the unit disc.
    const DomainProblem p = build_problem(Geometry::disc(1.0), "x1^2 + x2^2 - 0.25", 6.0, 18.0);
    ASSERT_EQ(p.gamma.size(), 1u);
    EXPECT_NEAR(p.gamma_length(), pi, 5e-3);
    for (double gn : p.gamma[0].grad_norm) EXPECT_NEAR(gn, 1.0, 0.02);
}

TEST(Problem, NoZeroSetIsFlaggedEmpty) {
    const DomainProblem p = build_problem(Geometry::disc(1.0), "x1^2 + 1", 4.0, 8.0);
    EXPECT_TRUE(p.gamma.empty());
    const GLState s = minimize_gl(p, Mode::Fixed);
    EXPECT_THROW(decay_profile(p, s), ValidationError);
}

TEST(Problem, RejectsDegenerateOrTangentZeroSets) {
    EXPECT_THROW(build_problem(Geometry::disc(1.0), "x1^2", 4.0, 8.0), ValidationError);
    EXPECT_THROW(build_problem(Geometry::rectangle(0.0, -1.0, 1.0, 1.0), "x1", 4.0, 8.0), ValidationError);
    EXPECT_THROW(build_problem(Geometry::rectangle(0.0, 0.0, 1.0, 1.0), "x2 - 0.0001", 4.0, 8.0), ValidationError);
    EXPECT_THROW(build_problem(Geometry::disc(1.0), "x1 +", 4.0, 8.0), ValidationError);
    EXPECT_THROW(build_problem(Geometry::disc(1.0), "x1", -1.0, 8.0), ValidationError);
    EXPECT_THROW(Geometry::disc(0.0), ValidationError);
}

// Single sine mode: the continuum solution is -B / (pi^2 (1/a^2 + 1/b^2)).
TEST(Problem, PoissonConvergesAtSecondOrder) {
    double prev = 0.0;
    for (std::size_t n : {15u, 31u, 63u}) {
        const double h = 1.0 / static_cast<double>(n + 1), hy = 2.0 / static_cast<double>(n + 1);
        std::vector<double> rhs(n * n), exact(n * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                const double x = (i + 1) * h, y = (j + 1) * hy;
                rhs[i + n * j] = std::sin(pi * x) * std::sin(pi * y / 2.0);
                exact[i + n * j] = -rhs[i + n * j] / (pi * pi * (1.0 + 0.25));
            }
        const std::vector<double> phi = solve_poisson_dst(n, n, h, hy, rhs);
        double err = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) err = std::max(err, std::abs(phi[k] - exact[k]));
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 4.0, 0.3);
        }
        prev = err;
    }
}

TEST(Energy, GaugeInvariance) {
    const DomainProblem p = model(3.0, 0.5);
    Field psi = random_psi(p, 1);
    std::vector<double> delta = random_delta(p, 2, 0.3);
    const double e0 = energy(p, psi, delta);
    SplitMix64 rng(3);
    std::vector<double> chi(psi.size());
    for (double& c : chi) c = 5.0 * rng.symmetric();
    for (std::size_t n = 0; n < psi.size(); ++n) psi[n] *= std::polar(1.0, chi[n]);
    const RectGrid& g = p.grid;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (i + 1 < g.nx) delta[p.x_edge(i, j)] += chi[g.index(i + 1, j)] - chi[g.index(i, j)];
            if (j + 1 < g.ny) delta[p.y_edge(i, j)] += chi[g.index(i, j + 1)] - chi[g.index(i, j)];
        }
    EXPECT_NEAR(energy(p, psi, delta), e0, 1e-10 * std::abs(e0));
}

TEST(Energy, GradientMatchesFiniteDifferences) {
    const DomainProblem p = model(2.0, 0.5);
    const Field psi = random_psi(p, 4);
    const std::vector<double> delta = random_delta(p, 5, 0.2);
    const lattice::Lattice lat = lattice_with(p, delta);
    Field g;
    lattice::gradient(lat, p.coefficients(), psi, g);
    const std::vector<double> gd = delta_gradient(p, psi, delta);
    const double step = 1e-6;
    for (std::size_t n = 0; n < psi.size(); n += 5) {
        if (p.lat.pinned[n]) continue;
        Field up = psi, um = psi;
        up[n] += cplx(0.0, step);
        um[n] -= cplx(0.0, step);
        const double fd = (energy(p, up, delta) - energy(p, um, delta)) / (2 * step);
        EXPECT_NEAR(g[n].imag(), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
    for (std::size_t e = 0; e < delta.size(); e += 7) {
        std::vector<double> dp = delta, dm = delta;
        dp[e] += step;
        dm[e] -= step;
        const double fd = (energy(p, psi, dp) - energy(p, psi, dm)) / (2 * step);
        EXPECT_NEAR(gd[e], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Energy, RandomStateHasLargeVirialGap) {
    const DomainProblem p = model(3.0, 0.5);
    EXPECT_GT(gl_residual(p, random_psi(p, 6), {}).virial, 1e-2);
}

TEST(MinimizeGl, FixedModeInvariants) {
    const DomainProblem p = model(4.0, 0.5);
    const GLState& s = converged_fixed();
    EXPECT_TRUE(s.converged);
    EXPECT_FALSE(s.collapsed);
    EXPECT_LT(s.energy_total, 0.0);
    EXPECT_LE(lattice::sup_norm(s.psi), 1.0 + 1e-6);
    EXPECT_LE(s.residuals.psi_eq, 1e-6);
    EXPECT_LE(s.residuals.virial, 1e-6);
    EXPECT_EQ(s.parts.magnetic, 0.0);
    const MagneticEnergy m = magnetic_energy(p, s);
    EXPECT_TRUE(m.fixed_mode);
    EXPECT_EQ(m.value, 0.0);
    // int |psi|^4 = -(2/k^2) E0 at convergence.
    const double k2 = p.kappa * p.kappa;
    EXPECT_NEAR(order_mass(p, s, everywhere), -2.0 / k2 * s.energy_total,
                1e-6 * order_mass2(p, s, everywhere) * 2.0);
}

TEST(MinimizeGl, FullModeBelowFixed) {
    const DomainProblem p = model(4.0, 0.5);
    const GLState& f = converged_fixed();
    const GLState s = minimize_gl(p, Mode::Full);
    EXPECT_LE(s.energy_total, f.energy_total + 1e-6 * std::abs(f.energy_total));
    EXPECT_LE(s.residuals.psi_eq, 1e-6);
    EXPECT_LE(s.residuals.A_eq, 1e-6);
    EXPECT_GT(s.parts.magnetic, 0.0);
    EXPECT_LT(s.parts.magnetic, 0.05 * std::abs(s.energy_total));
    EXPECT_NEAR(std::abs(s.energy_total - f.energy_total) / std::abs(f.energy_total), 0.0, 0.05);
    EXPECT_LE(s.residuals.virial, 1e-6);
    EXPECT_LE(lattice::sup_norm(s.psi), 1.0 + 1e-6);
}

TEST(MinimizeGl, LargeFieldIsTrivial) {
    const DomainProblem p = model(4.0, 10.0);
    const GLState s = minimize_gl(p, Mode::Fixed);
    EXPECT_TRUE(s.collapsed);
    EXPECT_EQ(s.energy_total, 0.0);
    EXPECT_EQ(order_mass(p, s, everywhere), 0.0);
}

TEST(Diagnostics, LocalEnergyAdditivityAndTotal) {
    const DomainProblem p = model(4.0, 0.5);
    const GLState& s = converged_fixed();
    const double all = local_energy(p, s, everywhere);
    EXPECT_NEAR(all, s.energy_total - s.parts.magnetic, 1e-10 * std::abs(all));
    const auto left = [](double x, double) { return x < 0.2; };
    const auto right = [](double x, double) { return !(x < 0.2); };
    EXPECT_NEAR(local_energy(p, s, left) + local_energy(p, s, right), all, 1e-10 * std::abs(all));
    EXPECT_EQ(local_energy(p, s, [](double, double) { return false; }), 0.0);
}

TEST(Diagnostics, FarFieldEnergyIsNegligible) {
    const DomainProblem& p = model8();
    const GLState& s = converged_k8();
    const double all = local_energy(p, s, everywhere);
    const double far = local_energy(p, s, [](double x, double) { return std::abs(x) > 0.9; });
    EXPECT_LT(std::abs(far), 1e-4 * std::abs(all));
}

TEST(Diagnostics, DecayProfile) {
    const DomainProblem& p = model8();
    const GLState& s = converged_k8();
    const DecayProfile d = decay_profile(p, s, 20);
    double sum = 0.0;
    for (double m : d.mass) sum += m;
    EXPECT_NEAR(sum, d.total, 1e-12 * d.total);
    EXPECT_NEAR(d.total, order_mass2(p, s, everywhere), 1e-10 * d.total);
    EXPECT_GT(d.m_hat, 0.0);
    EXPECT_GE(d.fit_bins, 2u);
    EXPECT_GT(d.bandwidth90, 0.0);
    EXPECT_NEAR(mass_fraction_within(p, s, d.bandwidth90), 0.9, 0.05);
    EXPECT_EQ(mass_fraction_within(p, s, 10.0), 1.0);
}

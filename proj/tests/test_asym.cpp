#include <gtest/gtest.h>

#include <cmath>

#include "glzero/asym.hpp"

using namespace glzero;
using namespace glzero::asym;

namespace {

const double lambda0 = 0.5698;  // only fixes the zero threshold of the test tables

// E(L) samples shaped like the computed curve.
Table test_ecurve() { return ecurve_table({0.05, 0.1, 0.2, 0.5, 1.0, 2.0}, {-10.0, -5.0, -2.4, -0.9, -0.3, -0.01}, lambda0); }

// Exactly linear in b, so interpolation reproduces g(b) = -(1 - b)/2.
Table linear_g() { return gtable_table({0.25, 0.5, 0.75}, {-0.375, -0.25, -0.125}); }

domain::DomainProblem disc_model(double kappa, double H, const char* B0 = "x1") {
    return domain::build_problem(domain::Geometry::disc(1.0), B0, kappa, H);
}

}  // namespace

TEST(Table, InterpolationAndZeroTail) {
    const Table e = test_ecurve();
    EXPECT_DOUBLE_EQ(e(0.05), -10.0);
    EXPECT_DOUBLE_EQ(e(0.075), -7.5);
    EXPECT_DOUBLE_EQ(e(2.0), -0.01);
    const double thr = std::pow(lambda0, -1.5);
    EXPECT_NEAR(e(0.5 * (2.0 + thr)), -0.005, 1e-12);
    EXPECT_EQ(e(thr), 0.0);
    EXPECT_EQ(e(10.0), 0.0);
    EXPECT_THROW(e(0.01), ValidationError);

    const Table g = linear_g();
    for (double b : {0.0, 0.1, 0.3, 0.6, 0.9, 0.99}) EXPECT_NEAR(g(b), -(1.0 - b) / 2.0, 1e-15) << b;
    EXPECT_EQ(g(1.0), 0.0);
    EXPECT_EQ(g(3.0), 0.0);
}

TEST(Table, RejectsBadTables) {
    EXPECT_THROW(ecurve_table({0.1, 0.1}, {-1.0, -0.5}, lambda0), ValidationError);
    EXPECT_THROW(ecurve_table({0.1, 0.2}, {-1.0, 0.5}, lambda0), ValidationError);
    EXPECT_THROW(gtable_table({}, {}), ValidationError);
    EXPECT_THROW(gtable_table({0.5}, {-0.1, -0.2}), ValidationError);
}

TEST(FormulaVanishing, ConstantIntegrandOnStraightGamma) {
    const double kappa = 6.0, H = 0.5 * kappa * kappa;
    const auto p = disc_model(kappa, H);
    const Table e = test_ecurve();
    const double L = H / (kappa * kappa);
    EXPECT_NEAR(formula_vanishing(p, e), 2.0 * kappa * std::cbrt(L) * e(L), 1e-9);
    EXPECT_LE(formula_vanishing(p, e), 0.0);
}

TEST(FormulaVanishing, ZeroPastThreshold) {
    const double kappa = 4.0;
    const auto p = disc_model(kappa, 2.4 * kappa * kappa);
    EXPECT_EQ(formula_vanishing(p, test_ecurve()), 0.0);
}

TEST(FormulaVanishing, ScalesLikeKappaCubedOverH) {
    const Table e = test_ecurve();
    for (double kappa : {4.0, 8.0}) {
        const double H = 0.5 * kappa * kappa;
        const double v = formula_vanishing(disc_model(kappa, H), e) * H / std::pow(kappa, 3);
        EXPECT_NEAR(v, 2.0 * std::pow(0.5, 4.0 / 3.0) * e(0.5), 1e-9);
    }
}

TEST(FormulaVanishing, QuadratureConvergesOnCurvedGamma) {
    // Ellipse x1^2 + 4 x2^2 = 1/4: |grad B0| varies along Gamma.
    const Table e = test_ecurve();
    std::vector<double> v;
    for (double h : {0.04, 0.02, 0.01}) {
        domain::ProblemOptions o;
        o.h = h;
        v.push_back(formula_vanishing(domain::build_problem(domain::Geometry::disc(1.0), "x1^2 + 4*x2^2 - 0.25", 4.0,
                                                            8.0, o),
                                      e));
    }
    EXPECT_LT(std::abs(v[2] - v[1]), 0.5 * std::abs(v[1] - v[0]));
    EXPECT_LT(std::abs(v[2] - v[1]), 1e-3 * std::abs(v[2]));
}

TEST(FormulaBulk, EmptySupportIsZero) {
    const auto p = disc_model(4.0, 16.0, "x1 + 3");
    EXPECT_EQ(formula_bulk(p, linear_g()), 0.0);
}

TEST(FormulaBulk, BandQuadrature) {
    // [DERIVED] -2 int_0^{1/4} sqrt(1 - x^2)(1 - 4x) dx by adaptive quadrature.
    const double band = -0.2486896389930111;
    const double kappa = 4.0;
    const auto p = disc_model(kappa, 4.0 * kappa);
    const double v = formula_bulk(p, linear_g());
    EXPECT_NEAR(v, kappa * kappa * band, 1e-3 * std::abs(kappa * kappa * band));
    EXPECT_LE(v, 0.0);
}

TEST(Regime, Classification) {
    const Regime a = regime_classify(100.0, 0.5 * 100.0 * 100.0);
    EXPECT_DOUBLE_EQ(a.indicator, 5.0);
    EXPECT_EQ(a.tag, Tag::II);
    const Regime b = regime_classify(100.0, 1000.0);
    EXPECT_DOUBLE_EQ(b.indicator, 1.0);
    EXPECT_EQ(b.tag, Tag::Crossover);
    const Regime c = regime_classify(100.0, 200.0);
    EXPECT_DOUBLE_EQ(c.indicator, 0.2);
    EXPECT_EQ(c.tag, Tag::I);
    EXPECT_DOUBLE_EQ(c.b_kappa, 2.0);
    EXPECT_THROW(regime_classify(0.0, 1.0), ValidationError);
}

TEST(Verify, TrivialStateHasZeroGap) {
    const double kappa = 4.0;
    const auto p = disc_model(kappa, 10.0 * kappa * kappa);
    const auto s = domain::minimize_gl(p, domain::Mode::Fixed);
    const VerificationReport r = verify(p, s, test_ecurve(), linear_g());
    EXPECT_EQ(r.regime.tag, Tag::II);
    EXPECT_EQ(r.C0_formula, 0.0);
    EXPECT_EQ(r.relative_gap, 0.0);
    EXPECT_EQ(r.mass_gap, 0.0);
}

TEST(Verify, MassGapPairsWithEnergyGap) {
    const double kappa = 4.0;
    const auto p = disc_model(kappa, 0.5 * kappa * kappa);
    const auto s = domain::minimize_gl(p, domain::Mode::Fixed);
    const VerificationReport r = verify(p, s, test_ecurve(), linear_g());
    EXPECT_EQ(r.regime.tag, Tag::Crossover);
    EXPECT_FALSE(r.warning.empty());
    EXPECT_LE(r.C0_formula, 0.0);
    EXPECT_LE(r.C0_bulk, 0.0);
    EXPECT_EQ(r.C0_formula, r.C0_vanishing);
    // int |psi|^4 = -(2/k^2) E at convergence, so the mass gap is twice the energy gap.
    EXPECT_NEAR(r.mass_gap, 2.0 * r.relative_gap, 1e-5);
}

TEST(Trend, OneSmallInversionAllowed) {
    EXPECT_TRUE(non_increasing({0.3, 0.2, 0.1}).ok);
    EXPECT_TRUE(non_increasing({0.3, 0.2, 0.21}).ok);
    EXPECT_FALSE(non_increasing({0.3, 0.2, 0.25}).ok);
    EXPECT_FALSE(non_increasing({0.3, 0.31, 0.2, 0.21}).ok);
    EXPECT_TRUE(decreasing({3.0, 2.0, 1.0}));
    EXPECT_FALSE(decreasing({3.0, 3.0, 1.0}));
}

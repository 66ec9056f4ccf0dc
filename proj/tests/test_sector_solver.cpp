#include <gtest/gtest.h>

#include <cmath>

#include "nlpencil/sector_solver.hpp"
#include "oracles/ex21_determinant.hpp"

using namespace nlpencil;

namespace {

SectorProblem2D boundary_driven(double alpha, double d = kPi / 2) {
    SectorProblem2D sp;
    sp.d = d;
    sp.sides = {SideCondition{alpha, d / 2}, SideCondition{alpha, d / 2}};
    sp.dirichlet = [](double) { return Complex(1.0, 0.0); };
    return sp;
}

template <class F>
ErrorKind kind_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidArgument;
}

double side_defect(const GridSolution& sol, const SectorProblem2D& sp) {
    const auto& g = sol.grid;
    const int s = g.shift_steps(sp.sides[0].shift);
    const int t = g.shift_steps(sp.sides[1].shift);
    double worst = 0.0;
    for (int j = 0; j + 1 < g.n_r; ++j) {
        worst = std::max(worst, std::abs(sol.at(j, 0) - sp.sides[0].alpha * sol.at(j, s)));
        worst = std::max(worst, std::abs(sol.at(j, g.n_a) - sp.sides[1].alpha * sol.at(j, g.n_a - t)));
    }
    return worst;
}

}  // namespace

TEST(Grid, GradedRadiiAndShiftSteps) {
    SectorProblem2D sp = boundary_driven(0.5);
    const PolarGrid g = PolarGrid::make(sp, 16, 8, 0.5);
    EXPECT_DOUBLE_EQ(g.r.back(), 1.0);
    EXPECT_NEAR(g.r.front(), 1.0 / 256, 1e-15);
    EXPECT_EQ(g.shift_steps(kPi / 4), 4);
    EXPECT_EQ(kind_of([&] { (void)g.shift_steps(0.3); }), ErrorKind::GridIncompatible);
    EXPECT_EQ(kind_of([&] { (void)solve_sector(sp, PolarGrid::make(sp, 16, 7)); }), ErrorKind::GridIncompatible);
}

TEST(Solve, DirichletHarmonicPolynomial) {
    SectorProblem2D sp;
    sp.sides = {SideCondition{0.0, kPi / 4}, SideCondition{0.0, kPi / 4}};
    sp.dirichlet = [](double phi) { return Complex(std::sin(2 * phi), 0.0); };
    const PolarGrid g = PolarGrid::make(sp, 64, 64);
    const GridSolution sol = solve_sector(sp, g);
    const CVector exact = sample(g, [](double r, double phi) { return Complex(r * r * std::sin(2 * phi), 0.0); });
    EXPECT_LE(grid_l2_norm(g, sol.values - exact), 1e-3);
    EXPECT_LE(sol.diagnostics.residual, 1e-10 * (1.0 + sol.diagnostics.rhs_norm));
}

TEST(Solve, SideRowsHoldExactly) {
    for (const double alpha : {0.0, 0.5, 0.9}) {
        const SectorProblem2D sp = boundary_driven(alpha);
        const GridSolution sol = solve_sector(sp, PolarGrid::make(sp, 32, 32));
        EXPECT_LE(side_defect(sol, sp), 1e-9 * sol.values.cwiseAbs().maxCoeff()) << alpha;
    }
}

TEST(Solve, ConditionGrowsBeyondCriterion) {
    const SectorProblem2D good = boundary_driven(0.5), bad = boundary_driven(1.5);
    const double c_good = solve_sector(good, PolarGrid::make(good, 64, 64)).diagnostics.condition_estimate;
    const double c_bad = solve_sector(bad, PolarGrid::make(bad, 64, 64)).diagnostics.condition_estimate;
    EXPECT_GE(c_bad, 10.0 * c_good);
}

TEST(Manufactured, CompliantProfileSatisfiesSideRows) {
    const ManufacturedCase mc = manufactured_case("smooth_compliant");
    for (double r : {0.1, 0.5, 1.0}) {
        EXPECT_LE(std::abs(mc.exact(r, 0.0) - 0.5 * mc.exact(r, kPi / 4)), 1e-12);
        EXPECT_LE(std::abs(mc.exact(r, kPi / 2) - 0.5 * mc.exact(r, kPi / 4)), 1e-12);
    }
}

TEST(Manufactured, DegenerateCaseIsDirichletSine) {
    ManufacturedParams mp;
    mp.alpha1 = mp.alpha2 = 0.0;
    const ManufacturedCase mc = manufactured_case("smooth_compliant", mp);
    for (double phi : {0.2, 0.7, 1.3}) EXPECT_NEAR(std::abs(mc.exact(1.0, phi)), std::abs(std::sin(2 * phi)), 1e-14);
    EXPECT_NEAR(std::abs(mc.problem.rhs(0.5, 0.4)), 0.0, 1e-14);
}

TEST(Manufactured, SingularLeadingResiduals) {
    const ManufacturedCase mc = manufactured_case("singular_leading");
    const Complex root = oracle::ex21_root(Complex(0, -1.3), kPi / 2, 0.5, 0.5);
    EXPECT_LT(std::abs(mc.lambda - root), 1e-8);
    for (double r : {0.1, 0.5, 1.0}) {
        EXPECT_LE(std::abs(mc.exact(r, 0.0) - 0.5 * mc.exact(r, kPi / 4)), 1e-12);
        EXPECT_LE(std::abs(mc.exact(r, kPi / 2) - 0.5 * mc.exact(r, kPi / 4)), 1e-12);
    }
    // -Delta u* = f by five-point differences in Cartesian coordinates.
    const double h = 1e-3;
    const auto u = [&](double x, double y) { return mc.exact(std::hypot(x, y), std::atan2(y, x)); };
    for (double r : {0.5, 0.9, 1.4}) {
        for (double phi : {0.3, 0.8, 1.2}) {
            const double x = r * std::cos(phi), y = r * std::sin(phi);
            const Complex lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h);
            EXPECT_LE(std::abs(-lap - mc.problem.rhs(r, phi)), 1e-4);
        }
    }
}

TEST(Manufactured, UnknownName) {
    EXPECT_EQ(kind_of([] { (void)manufactured_case("nope"); }), ErrorKind::InvalidArgument);
}

TEST(Convergence, SmoothCompliantIsSecondOrder) {
    const ConvergenceRecord rec = convergence_study("smooth_compliant", {{32, 32}, {64, 64}, {128, 128}});
    ASSERT_TRUE(rec.l2_order.has_value());
    EXPECT_GE(*rec.l2_order, 1.8);
    EXPECT_LE(*rec.l2_order, 2.2);
}

TEST(Convergence, SingularLeadingWithStrongGrading) {
    const ManufacturedCase mc = manufactured_case("singular_leading");
    const ConvergenceRecord rec =
        convergence_study(mc, {{32, 32, 0.5}, {64, 64, 0.5}, {128, 128, 0.5}}, std::pair{0.01, 0.1});
    ASSERT_TRUE(rec.l2_order.has_value());
    EXPECT_GE(*rec.l2_order, 1.5);
    EXPECT_LE(*rec.l2_order, 2.2);
    const double b1 = rec.levels[1].exponent->beta, b2 = rec.levels[2].exponent->beta;
    EXPECT_LE(std::abs(b1 - b2), 0.02);
}

TEST(Convergence, ZeroDataHasNoOrder) {
    ManufacturedCase mc = manufactured_case("smooth_compliant");
    mc.exact = [](double, double) { return Complex{}; };
    mc.problem.rhs = [](double, double) { return Complex{}; };
    mc.problem.dirichlet = [](double) { return Complex{}; };
    const ConvergenceRecord rec = convergence_study(mc, {{16, 16}, {32, 32}, {64, 64}});
    EXPECT_FALSE(rec.l2_order.has_value());
    EXPECT_EQ(rec.levels[0].l2_error, 0.0);
}

TEST(Convergence, RejectsBadGridLists) {
    EXPECT_EQ(kind_of([] { (void)convergence_study("smooth_compliant", {{16, 16}, {32, 32}}); }),
              ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { (void)convergence_study("smooth_compliant", {{16, 16}, {32, 32}, {48, 48}}); }),
              ErrorKind::InvalidArgument);
}

TEST(Exponent, DirichletCornerIsTwo) {
    const SectorProblem2D sp = boundary_driven(0.0);
    const ExponentFit fit = fit_exponent(solve_sector(sp, PolarGrid::make(sp, 128, 128)), 0.01, 0.1);
    EXPECT_NEAR(fit.beta, 2.0, 0.1);
}

TEST(Exponent, Ex21MatchesDeterminantRoot) {
    const SectorProblem2D sp = boundary_driven(0.5);
    const ExponentFit fit = fit_exponent(solve_sector(sp, PolarGrid::make(sp, 128, 128)), 0.01, 0.1);
    const double predicted = -oracle::ex21_root(Complex(0, -1.3), kPi / 2, 0.5, 0.5).imag();
    EXPECT_NEAR(predicted, 4.0 / 3.0, 1e-8);
    EXPECT_LE(std::abs(fit.beta - predicted), 0.05 * predicted);
}

TEST(Exponent, InjectedLinearField) {
    SectorProblem2D sp = boundary_driven(0.0);
    GridSolution sol;
    sol.grid = PolarGrid::make(sp, 64, 64);
    sol.values = sample(sol.grid, [](double r, double phi) { return Complex(r * std::sin(phi), 0.0); });
    const ExponentFit fit = fit_exponent(sol, 0.01, 0.25);
    EXPECT_NEAR(fit.beta, 1.0, 1e-3);
    EXPECT_GE(fit.r2, 0.9999);
    EXPECT_EQ(kind_of([&] { (void)fit_exponent(sol, 0.1, 0.11); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { (void)fit_exponent(sol, 0.1, 0.5); }), ErrorKind::InvalidArgument);
}

TEST(Resolvent, InverseSquareDecay) {
    for (const double alpha : {0.5, 0.0}) {
        for (const double h : {0.0, 0.4}) {
            SectorProblem2D sp = boundary_driven(alpha);
            sp.R = 10.0;
            sp.rhs = bump_rhs(sp.d, sp.R);
            const ResolventScan scan = resolvent_scan(sp, h, {10, 18, 32, 56, 100}, {64, 64});
            EXPECT_GE(scan.slope, -2.1) << alpha << " " << h;
            EXPECT_LE(scan.slope, -1.9) << alpha << " " << h;
            for (std::size_t i = 1; i < scan.norms.size(); ++i) EXPECT_LT(scan.norms[i], scan.norms[i - 1]);
        }
    }
}

TEST(Resolvent, Preconditions) {
    SectorProblem2D sp = boundary_driven(0.5);
    sp.rhs = bump_rhs(sp.d, sp.R);
    EXPECT_EQ(kind_of([&] { (void)resolvent_scan(sp, 0.0, {10, 20, 40}, {16, 16}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { (void)resolvent_scan(sp, 1.6, {1, 2, 3, 4, 5}, {16, 16}); }), ErrorKind::InvalidArgument);
}

TEST(Resolvent, ThreadCountDoesNotChangeNorms) {
    SectorProblem2D sp = boundary_driven(0.5);
    sp.rhs = bump_rhs(sp.d, sp.R);
    const auto a = resolvent_scan(sp, 0.2, {5, 7, 9, 11, 13}, {16, 16}, 1);
    const auto b = resolvent_scan(sp, 0.2, {5, 7, 9, 11, 13}, {16, 16}, 3);
    EXPECT_EQ(a.norms, b.norms);
}

TEST(WeightedNorm, AnnulusIntegral) {
    const SectorProblem2D sp = boundary_driven(0.0);
    const PolarGrid g = PolarGrid::make(sp, 64, 64, 1.0);
    const CVector u = sample(g, [](double r, double) { return Complex(r, 0.0); });
    const double exact = kPi / 2 * (1.0 - 1.0 / 16.0) / 4.0;
    const double val = weighted_norm(g, u, 0.0, 0, NormFlavor::H, 0.5, 1.0);
    EXPECT_NEAR(val * val, exact, 0.01 * exact);
}

TEST(WeightedNorm, FirstAndSecondDerivatives) {
    const SectorProblem2D sp = boundary_driven(0.0);
    const PolarGrid g = PolarGrid::make(sp, 64, 64, 1.0);
    // u = x: |grad u| = 1, weights r^0 and r^2 for a = k = 1.
    const CVector x = sample(g, [](double r, double phi) { return Complex(r * std::cos(phi), 0.0); });
    const double v1 = weighted_norm(g, x, 1.0, 1, NormFlavor::H, 0.5, 1.0);
    const double e1 = (1.0 - 1.0 / 16.0) / 4.0 * (kPi / 4 + kPi / 2);
    EXPECT_NEAR(v1 * v1, e1, 0.01 * e1);
    // u = x^2: gradient (2x, 0), Hessian entry 2; weights 1, r^2, r^4 for a = k = 2.
    const CVector x2 = sample(g, [](double r, double phi) { return Complex(std::pow(r * std::cos(phi), 2), 0.0); });
    const double v2 = weighted_norm(g, x2, 2.0, 2, NormFlavor::H, 0.5, 1.0);
    const double c4 = 3 * kPi / 16, c2 = kPi / 4;  // integrals of cos^4, cos^2 over (0, pi/2)
    const double e2 = c4 * (1 - std::pow(0.5, 6)) / 6 + 4 * c2 * (1 - std::pow(0.5, 6)) / 6 +
                      4 * (kPi / 2) * (1 - std::pow(0.5, 6)) / 6;
    EXPECT_NEAR(v2 * v2, e2, 0.01 * e2);
}

TEST(WeightedNorm, Identities) {
    const SectorProblem2D sp = boundary_driven(0.0);
    const PolarGrid g = PolarGrid::make(sp, 48, 48);
    const PolarField f = [](double r, double phi) { return Complex(std::sin(phi) * std::exp(-r), r); };
    const CVector u = sample(g, f);
    const CVector ru = sample(g, [&](double r, double phi) { return r * f(r, phi); });
    EXPECT_EQ(weighted_norm(g, CVector::Zero(g.size()), 0.3, 2, NormFlavor::E), 0.0);
    EXPECT_NEAR(weighted_norm(g, u, 1.3, 0, NormFlavor::H), weighted_norm(g, ru, 0.3, 0, NormFlavor::H), 1e-12);
    const double h = weighted_norm(g, u, 0.4, 0, NormFlavor::H), e = weighted_norm(g, u, 0.4, 0, NormFlavor::E);
    EXPECT_NEAR(e * e, 2.0 * h * h, 1e-12 * e * e);
}

#include <gtest/gtest.h>

#include <cmath>

#include "hsc/constraint.hpp"
#include "hsc/errors.hpp"
#include "hsc/scenario.hpp"
#include "test_util.hpp"

using namespace hsc;
using hsc::test::fd_derivative;
using hsc::test::fd_gradient;
using hsc::test::rel_err;
using hsc::test::uniform;
using hsc::test::uniform_vec;

namespace {

Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }

ConstraintPrimitive halfspace(double ax, double ay, double b, ConstraintClass c = ConstraintClass::hard) {
    return ConstraintPrimitive(Halfspace{v2(ax, ay), TimeSignal::constant(b)}, c);
}

ConsolidatedConstraint ex1_hard() {
    std::vector<ConstraintPrimitive> p{
        halfspace(1, 0, 4.5), halfspace(-0.3, 1, 4.5),
        ConstraintPrimitive(TanhWrapped{0.1, DiskInterior{static_point(v2(0, 0)), TimeSignal::constant(6.0)}},
                            ConstraintClass::hard)};
    return ConsolidatedConstraint(std::move(p), 10.0);
}

MovingPoint random_moving_point() {
    return {TimeSignal::sine(uniform(-1, 1), uniform(0.1, 1.0), uniform(-3, 3), uniform(-2, 2)),
            TimeSignal::cosine(uniform(-1, 1), uniform(0.1, 1.0), uniform(-3, 3), uniform(-2, 2))};
}

TimeSignal random_radius() { return TimeSignal::sine(uniform(0, 0.4), uniform(0.1, 1), uniform(-3, 3), uniform(1, 2)); }

QuadraticForm random_quadratic() {
    switch (static_cast<int>(uniform(0, 3))) {
        case 0:
            return DiskInterior{random_moving_point(), random_radius()};
        case 1:
            return DiskExterior{random_moving_point(), random_radius()};
        default:
            return EllipseExterior{random_moving_point(), uniform(0.3, 2.0), uniform(0.3, 2.0),
                                   TimeSignal::cosine(uniform(0, 6.3), uniform(0.05, 0.5))};
    }
}

Shape random_shape(int kind) {
    switch (kind) {
        case 0:
            return Halfspace{uniform_vec(2, -2, 2), TimeSignal::sine(uniform(-1, 1), uniform(0.1, 2), 0.0, uniform(-3, 3))};
        case 1:
            return DiskInterior{random_moving_point(), random_radius()};
        case 2:
            return DiskExterior{random_moving_point(), random_radius()};
        case 3:
            return EllipseExterior{random_moving_point(), uniform(0.3, 2.0), uniform(0.3, 2.0),
                                   TimeSignal::cosine(uniform(0, 6.3), uniform(0.05, 0.5))};
        case 4:
            return TanhWrapped{uniform(0.05, 1.0), random_quadratic()};
        case 5:
            return RadialPower{random_moving_point(), random_radius(), 1 + 2 * static_cast<int>(uniform(0, 3))};
        default:
            return AuxiliaryCoercive{uniform(1, 50)};
    }
}

}  // namespace

// --- single-sample examples ----------------------------------------------------

TEST(EvalAlpha, SinglePrimitiveIdentity) {
    for (double nu : {0.5, 10.0, 1e3}) {
        ConsolidatedConstraint c({halfspace(0, 0, 2.0)}, nu);
        EXPECT_DOUBLE_EQ(eval_alpha(c, 0.0, v2(0.3, -0.1)), 2.0);
    }
}

TEST(EvalAlpha, EqualArgumentsGiveMinMinusLnmOverNu) {
    ConsolidatedConstraint c({halfspace(0, 0, 1.0), halfspace(0, 0, 1.0)}, 10.0);
    // 1 - ln(2)/10, 40-digit reference
    EXPECT_NEAR(eval_alpha(c, 0.0, v2(0, 0)), 0.9306852819440054690582767878541823431924, 1e-15);
}

TEST(EvalAlpha, WellSeparatedValuesAtHighSharpness) {
    ConsolidatedConstraint c({halfspace(0, 0, 1.0), halfspace(0, 0, 5.0)}, 100.0);
    // 1 - ln(1 + e^-400)/100 differs from 1 by ~1e-176.
    EXPECT_NEAR(eval_alpha(c, 0.0, v2(0, 0)), 1.0, 1e-12);
}

TEST(EvalAlpha, NoOverflowForLargeExponents) {
    for (double psi : {-1e3, 1e3}) {
        ConsolidatedConstraint c({halfspace(0, 0, psi), halfspace(0, 0, psi + 1.0)}, 10.0);
        const double a = eval_alpha(c, 0.0, v2(0, 0));
        EXPECT_TRUE(std::isfinite(a));
        EXPECT_NEAR(a, psi - std::log1p(std::exp(-10.0)) / 10.0, 1e-9 * std::abs(psi));
    }
}

TEST(EvalAlpha, NonFiniteInputThrows) {
    const auto c = ex1_hard();
    EXPECT_THROW(eval_alpha(c, 0.0, v2(NAN, 0)), NumericalError);
    EXPECT_THROW(eval_alpha(c, INFINITY, v2(0, 0)), NumericalError);
    EXPECT_THROW(eval_alpha_gradient(c, 0.0, v2(0, INFINITY)), NumericalError);
    EXPECT_THROW(eval_alpha_time_derivative(c, NAN, v2(0, 0)), NumericalError);
}

TEST(EvalAlpha, ConstructionChecks) {
    EXPECT_THROW(ConsolidatedConstraint({}, 10.0), ConfigError);
    EXPECT_THROW(ConsolidatedConstraint({halfspace(1, 0, 0)}, 0.0), ConfigError);
    EXPECT_THROW(ConsolidatedConstraint({halfspace(1, 0, 0), halfspace(0, 1, 0, ConstraintClass::soft)}, 1.0),
                 ConfigError);
    EXPECT_THROW(ConstraintPrimitive(RadialPower{static_point(v2(0, 0)), TimeSignal::constant(1), 2},
                                     ConstraintClass::hard),
                 ConfigError);
}

TEST(EvalAlphaGradient, SinglePrimitiveIsItsGradient) {
    ConstraintPrimitive p(DiskInterior{static_point(v2(1, 2)), TimeSignal::constant(3)}, ConstraintClass::soft);
    ConsolidatedConstraint c({p}, 10.0);
    const Eigen::VectorXd x = v2(0.5, -0.25);
    EXPECT_EQ(eval_alpha_gradient(c, 0.3, x), p.gradient(0.3, x));
}

TEST(EvalAlphaGradient, SymmetricHalfspaces) {
    ConsolidatedConstraint c({halfspace(1, 0, 4.5), halfspace(0, 1, 4.5)}, 10.0);
    const Eigen::VectorXd g = eval_alpha_gradient(c, 0.0, v2(0, 0));
    EXPECT_NEAR(g[0], 0.5, 1e-15);
    EXPECT_NEAR(g[1], 0.5, 1e-15);
}

TEST(EvalAlphaGradient, Example1HardAtOriginMatchesFiniteDifference) {
    const auto c = ex1_hard();
    const Eigen::VectorXd x = v2(0, 0);
    const Eigen::VectorXd fd = fd_gradient([&](const Eigen::VectorXd& y) { return c.alpha(0.0, y); }, x);
    EXPECT_LE(rel_err(eval_alpha_gradient(c, 0.0, x), fd), 1e-5);
}

TEST(EvalAlphaTimeDerivative, StaticFamilyIsZero) {
    EXPECT_EQ(eval_alpha_time_derivative(ex1_hard(), 3.0, v2(1, -1)), 0.0);
}

TEST(EvalAlphaTimeDerivative, MovingDiskMatchesFiniteDifference) {
    const ScenarioFile s = load_scenario(hsc::test::preset("ex1"));
    const auto& soft = s.config().soft;
    for (double t : {0.0, 2.5, 7.0, 13.0}) {
        const Eigen::VectorXd x = v2(-1.0, 0.7);
        const double fd = fd_derivative([&](double tt) { return soft.alpha(tt, x); }, t + 1e-3);
        EXPECT_LE(rel_err(eval_alpha_time_derivative(soft, t + 1e-3, x), fd), 1e-5) << "t=" << t;
    }
}

TEST(EvalAlphaTimeDerivative, ConvexWeightsOfUnitRates) {
    ConsolidatedConstraint c({ConstraintPrimitive(Halfspace{v2(1, 0), TimeSignal::linear(1.0, 0.0)}, ConstraintClass::hard),
                              ConstraintPrimitive(Halfspace{v2(0, 1), TimeSignal::linear(1.0, 2.0)}, ConstraintClass::hard)},
                             10.0);
    EXPECT_NEAR(eval_alpha_time_derivative(c, 1.0, v2(0.2, -0.4)), 1.0, 1e-15);
}

// --- alpha* estimation -----------------------------------------------------------

namespace {

double dense_grid_max(const ConsolidatedConstraint& c, const Box& b, int n) {
    double best = -INFINITY;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = b.lower[0] + (b.upper[0] - b.lower[0]) * i / (n - 1);
            const double y = b.lower[1] + (b.upper[1] - b.lower[1]) * j / (n - 1);
            best = std::max(best, c.alpha(0.0, v2(x, y)));
        }
    return best;
}

}  // namespace

TEST(EstimateAlphaStar, UnitDisk) {
    ConsolidatedConstraint c({ConstraintPrimitive(DiskInterior{static_point(v2(0, 0)), TimeSignal::constant(1.0)},
                                                  ConstraintClass::soft)},
                             10.0);
    const Box box{v2(-2, -2), v2(2, 2)};
    const AlphaStar a = estimate_alpha_star(c, 0.0, box, 41);
    EXPECT_GE(a.value, 0.9);
    EXPECT_LE(a.value, 1.0 + 1e-12);
    EXPECT_GE(a.value, dense_grid_max(c, box, 401) - 1e-9);
}

TEST(EstimateAlphaStar, EmptyIntersectionIsNegative) {
    auto disk = [](double cx) {
        return ConstraintPrimitive(DiskInterior{static_point(v2(cx, 0)), TimeSignal::constant(1.0)},
                                   ConstraintClass::hard);
    };
    ConsolidatedConstraint c({disk(-5), disk(5)}, 10.0);
    const Box box{v2(-7, -3), v2(7, 3)};
    const AlphaStar a = estimate_alpha_star(c, 0.0, box, 41);
    EXPECT_LT(a.value, 0.0);
    EXPECT_LT(dense_grid_max(c, box, 401), 0.0);
    EXPECT_GE(a.value, dense_grid_max(c, box, 401) - 1e-6);
}

TEST(EstimateAlphaStar, HalfspaceMaximumAtDeepestCorner) {
    ConsolidatedConstraint c({halfspace(1, 2, 0.5)}, 10.0);
    const Box box{v2(-1, -1), v2(1, 1)};
    const AlphaStar a = estimate_alpha_star(c, 0.0, box, 5);
    EXPECT_NEAR(a.value, 3.5, 1e-12);
    EXPECT_NEAR(a.argmax[0], 1.0, 1e-12);
    EXPECT_NEAR(a.argmax[1], 1.0, 1e-12);
}

TEST(EstimateAlphaStar, RejectsDegenerateGrid) {
    EXPECT_THROW(estimate_alpha_star(ex1_hard(), 0.0, Box{v2(-1, -1), v2(1, 1)}, 1), ConfigError);
}

// --- properties ------------------------------------------------------------------

TEST(ConstraintProperties, SandwichBoundOnScenarioFamilies) {
    std::vector<ConsolidatedConstraint> fams;
    for (const char* p : hsc::test::kPresets) {
        const ScenarioFile s = load_scenario(hsc::test::preset(p));
        fams.push_back(s.config().hard);
        fams.push_back(s.config().soft);
    }
    int n = 0;
    for (int k = 0; k < 1200; ++k) {
        const auto& c = fams[static_cast<std::size_t>(k) % fams.size()];
        const double t = uniform(0, 40);
        const Eigen::VectorXd x = uniform_vec(2, -8, 8);
        const double a = eval_alpha(c, t, x);
        const double m = c.min_primitive(t, x);
        ASSERT_LE(a, m + 1e-12);
        ASSERT_LE(m, a + std::log(static_cast<double>(c.size())) / c.nu() + 1e-12);
        ++n;
    }
    EXPECT_GE(n, 1000);
}

TEST(ConstraintProperties, SandwichBoundOnRandomFamilies) {
    for (int k = 0; k < 1000; ++k) {
        std::vector<ConstraintPrimitive> prims;
        const int m = 1 + static_cast<int>(uniform(0, 6));
        for (int j = 0; j < m; ++j) prims.emplace_back(random_shape(static_cast<int>(uniform(0, 7))), ConstraintClass::hard);
        const double nu = std::pow(10.0, uniform(-1, 2));
        ConsolidatedConstraint c(std::move(prims), nu);
        const double t = uniform(0, 30);
        const Eigen::VectorXd x = uniform_vec(2, -5, 5);
        const double a = c.alpha(t, x);
        const double mn = c.min_primitive(t, x);
        ASSERT_LE(a, mn + 1e-12);
        ASSERT_LE(mn, a + std::log(m) / nu + 1e-12);
    }
}

TEST(ConstraintProperties, PrimitiveDerivativesMatchFiniteDifferences) {
    int n = 0;
    for (int k = 0; k < 1400; ++k) {
        const int kind = k % 7;
        const ConstraintPrimitive p(random_shape(kind), ConstraintClass::hard);
        const double t = uniform(0.1, 30);
        Eigen::VectorXd x = uniform_vec(2, -4, 4);
        if (kind == 5) {
            // keep clear of the non-differentiable centre of |x - c|
            const auto& rp = std::get<RadialPower>(p.shape());
            Eigen::Vector2d c(rp.center[0].value(t), rp.center[1].value(t));
            if ((x - c).norm() < 0.1) x = c + Eigen::Vector2d(0.5, 0.3);
        }
        const PrimitiveEval e = p.evaluate(t, x);
        ASSERT_TRUE(std::isfinite(e.value) && e.gradient.allFinite() && std::isfinite(e.time_derivative));
        const Eigen::VectorXd g = fd_gradient([&](const Eigen::VectorXd& y) { return p.value(t, y); }, x);
        const double dt = fd_derivative([&](double tt) { return p.value(tt, x); }, t);
        const double scale = 1e-2 * std::max(1.0, std::abs(e.value));
        EXPECT_LE(rel_err(e.gradient, g, scale), 1e-5) << p.describe() << " k=" << k;
        EXPECT_LE(rel_err(e.time_derivative, dt, scale), 1e-5) << p.describe() << " k=" << k;
        ++n;
    }
    EXPECT_GE(n, 1000);
}

TEST(ConstraintProperties, ConsolidatedDerivativesMatchFiniteDifferences) {
    for (int k = 0; k < 1000; ++k) {
        std::vector<ConstraintPrimitive> prims;
        const int m = 1 + static_cast<int>(uniform(0, 4));
        for (int j = 0; j < m; ++j) {
            int kind = static_cast<int>(uniform(0, 7));
            if (kind == 5) kind = 4;
            prims.emplace_back(random_shape(kind), ConstraintClass::soft);
        }
        ConsolidatedConstraint c(std::move(prims), std::pow(10.0, uniform(0, 1.5)));
        const double t = uniform(0.1, 30);
        const Eigen::VectorXd x = uniform_vec(2, -4, 4);
        const AlphaEval e = c.evaluate(t, x);
        const Eigen::VectorXd g = fd_gradient([&](const Eigen::VectorXd& y) { return c.alpha(t, y); }, x);
        const double d = fd_derivative([&](double tt) { return c.alpha(tt, x); }, t);
        const double scale = 1e-2 * std::max(1.0, std::abs(e.value));
        EXPECT_LE(rel_err(e.gradient, g, scale), 1e-5) << "k=" << k;
        EXPECT_LE(rel_err(e.time_derivative, d, scale), 1e-5) << "k=" << k;
    }
}

TEST(ConstraintProperties, MonotoneSharpening) {
    for (int k = 0; k < 1000; ++k) {
        std::vector<ConstraintPrimitive> prims;
        const int m = 2 + static_cast<int>(uniform(0, 4));
        for (int j = 0; j < m; ++j) prims.emplace_back(random_shape(static_cast<int>(uniform(0, 7))), ConstraintClass::hard);
        const double t = uniform(0, 20);
        const Eigen::VectorXd x = uniform_vec(2, -4, 4);
        double prev = -INFINITY;
        const double mn = ConsolidatedConstraint(prims, 1.0).min_primitive(t, x);
        for (double nu : {1.0, 10.0, 100.0}) {
            const double a = ConsolidatedConstraint(prims, nu).alpha(t, x);
            ASSERT_GE(a, prev - 1e-12);
            ASSERT_LE(a, mn + 1e-12);
            prev = a;
        }
    }
}

TEST(ConstraintProperties, CoercivitySpotCheckOnShippedHardSets) {
    for (const char* p : hsc::test::kPresets) {
        const ScenarioFile s = load_scenario(hsc::test::preset(p));
        const Eigen::VectorXd interior = s.measured0().head(2);
        ASSERT_GT(s.config().hard.alpha(0.0, interior), 0.0) << p;
        EXPECT_TRUE(coercivity_spot_check(s.config().hard, 0.0, interior)) << p;
    }
}

TEST(ConstraintProperties, RadialPowerGradientVanishesOnBoundary) {
    const ConstraintPrimitive p(RadialPower{static_point(v2(0, 0)), TimeSignal::constant(4.5), 3}, ConstraintClass::hard);
    for (int k = 0; k < 16; ++k) {
        const double a = 2 * M_PI * k / 16;
        const Eigen::VectorXd x = v2(4.5 * std::cos(a), 4.5 * std::sin(a));
        EXPECT_NEAR(p.value(0, x), 0.0, 1e-12);
        EXPECT_LE(p.gradient(0, x).norm(), 1e-12);
    }
}

TEST(ConstraintProperties, InvexityDiagnosticOnDisk) {
    ConsolidatedConstraint c({ConstraintPrimitive(DiskInterior{static_point(v2(4, 0)), TimeSignal::constant(1.0)},
                                                  ConstraintClass::soft)},
                             10.0);
    EXPECT_TRUE(find_negative_critical_points(c, 0.0, Box{v2(-7, -4), v2(7, 4)}, 41).empty());
    // Two separated targets: the saddle between them has alpha < 0 and zero gradient.
    ConsolidatedConstraint two(
        {ConstraintPrimitive(AuxiliaryCoercive{1.0}, ConstraintClass::soft),
         ConstraintPrimitive(DiskExterior{static_point(v2(0, 0)), TimeSignal::constant(0.5)}, ConstraintClass::soft)},
        10.0);
    EXPECT_FALSE(find_negative_critical_points(two, 0.0, Box{v2(-2, -2), v2(2, 2)}, 41).empty());
}

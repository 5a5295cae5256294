#include <cmath>

#include <gtest/gtest.h>

#include "btb/brinkman.hpp"
#include "btb/config.hpp"
#include "btb/initial_data.hpp"

using namespace btb;

namespace {

Grid square(int n) { return Grid(GridSpec{2, {0.0, 0.0}, {1.0, 1.0}, {n, n}}); }

VectorField field(const Grid& g) {
    VectorField v = g.zero_vector();
    v.components[0] = sample(g, [](double x, double y) { return std::sin(5 * x) + y; });
    v.components[1] = sample(g, [](double x, double y) { return x * std::exp(-y); });
    return v;
}

} // namespace

TEST(Brinkman, AnalyticOneDimensionalSolution) {
    // -eps v'' + v = 1, v(0) = v(1) = 0  =>  v(x) = 1 - cosh((x - 1/2)/sqrt(eps)) / cosh(1/(2 sqrt(eps)))
    const double eps = 0.01;
    const Grid g(GridSpec{1, {0.0}, {1.0}, {512}});
    const EllipticOperator op(g, eps, 0.0);
    const ScalarField v = op.solve(ScalarField::Ones(g.cell_count()));
    const double s = std::sqrt(eps);
    const ScalarField exact = sample(g, [s](double x, double) { return 1.0 - std::cosh((x - 0.5) / s) / std::cosh(0.5 / s); });
    EXPECT_LE((v - exact).cwiseAbs().maxCoeff(), 2e-3);
    const double mid = 0.5 * (v[255] + v[256]);
    EXPECT_NEAR(mid, 1.0 - 1.0 / std::cosh(5.0), 1e-4);
    EXPECT_NEAR(1.0 - 1.0 / std::cosh(5.0), 0.986524, 1e-6);
}

TEST(Brinkman, ErrorShrinksUnderRefinement) {
    const double eps = 0.01;
    const double s = std::sqrt(eps);
    const auto err = [&](int n) {
        const Grid g(GridSpec{1, {0.0}, {1.0}, {n}});
        const ScalarField v = EllipticOperator(g, eps, 0.0).solve(ScalarField::Ones(n));
        const ScalarField exact =
            sample(g, [s](double x, double) { return 1.0 - std::cosh((x - 0.5) / s) / std::cosh(0.5 / s); });
        return (v - exact).cwiseAbs().maxCoeff();
    };
    EXPECT_LT(err(256), 0.6 * err(128));
}

TEST(Brinkman, SolveResidualIsSmall) {
    const Grid g = square(16);
    const EllipticOperator op(g, 0.001, 1e-6);
    const ScalarField rhs = sample(g, [](double x, double y) { return x - y * y; });
    const ScalarField x = op.solve(rhs);
    EXPECT_LE((op.matrix() * x - rhs).norm() / rhs.norm(), 1e-12);
}

TEST(Brinkman, ConjugateGradientPathAgreesWithOneStepRefinement) {
    const Grid g = square(72);
    ASSERT_GT(g.cell_count(), kDirectSolveMaxCells);
    const EllipticOperator op(g, 0.001, 0.0);
    const ScalarField rhs = sample(g, [](double x, double y) { return std::cos(3 * x) * y; });
    const ScalarField x = op.solve(rhs);
    EXPECT_LE((op.matrix() * x - rhs).norm() / rhs.norm(), kSolveResidualLimit);
}

TEST(Brinkman, RejectsNonFiniteRightHandSide) {
    const Grid g = square(4);
    const EllipticOperator op(g, 0.1, 0.0);
    ScalarField rhs = ScalarField::Ones(16);
    rhs[3] = std::nan("");
    EXPECT_THROW(op.solve(rhs), NumericalError);
    EXPECT_THROW(EllipticOperator(g, -1.0, 0.0), ValidationError);
}

TEST(Brinkman, EnergyIdentity) {
    for (double eps : {0.001, 0.1}) {
        for (double eta : {0.0, 1e-4}) {
            const Grid g = square(12);
            EXPECT_LE(energy_identity_residual(EllipticOperator(g, eps, eta), field(g)), 1e-10);
        }
    }
    const Grid g(GridSpec{1, {0.0}, {1.0}, {30}});
    VectorField v = g.zero_vector();
    v.components[0] = sample(g, [](double x, double) { return x * x; });
    EXPECT_LE(energy_identity_residual(EllipticOperator(g, 0.05, 1e-5), v), 1e-10);
}

TEST(Brinkman, SquareRootProperty) {
    for (int n : {3, 6, 12}) {
        for (double eps : {0.001, 0.1}) {
            for (double eta : {0.0, 1e-4}) {
                const auto d = sqrt_check(square(n), eps, eta);
                EXPECT_LE(d.residual, 1e-10);
                EXPECT_GT(d.eigenvalues.minCoeff(), 0.0);
                EXPECT_LE(d.eigenvalues.maxCoeff(), 1.0 + 1e-12);
                // |K g|^2 = <L g, g>
                const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(n * n, -1.0, 2.0);
                EXPECT_NEAR((d.sqrt_operator * g).squaredNorm(), g.dot(d.solution_operator * g),
                            1e-10 * g.squaredNorm());
            }
        }
    }
    EXPECT_THROW(sqrt_check(square(40), 0.1, 0.0), ValidationError);
}

TEST(Brinkman, EtaMonotonicity) {
    const Grid g = square(10);
    const VectorField f = field(g);
    for (double eps : {0.0, 0.001, 0.1}) {
        const double q0 = quadratic_form(EllipticOperator(g, eps, 1e-6), f);
        const double q1 = quadratic_form(EllipticOperator(g, eps, 1e-4), f);
        const double q2 = quadratic_form(EllipticOperator(g, eps, 1e-2), f);
        EXPECT_LE(q1, q0 + 1e-12);
        EXPECT_LE(q2, q1 + 1e-12);
    }
}

TEST(Brinkman, QuadraticFormBoundedByL2Norm) {
    const Grid g = square(10);
    const VectorField f = field(g);
    const double q = quadratic_form(EllipticOperator(g, 0.01, 0.0), f);
    EXPECT_GT(q, 0.0);
    EXPECT_LE(q, inner(g, f, f));
}

TEST(Brinkman, DarcyDegenerationIsBitExact) {
    const Grid g = square(8);
    ModelParams p = to_params(ModelConfig{});
    p.eps = 0.0;
    const auto u = section7_initial_data(g);
    const EllipticOperator op(g, 0.0, 0.0);
    EXPECT_TRUE(op.is_identity());
    const auto v = velocity_from_pressure(u, p, op);
    for (int i = 0; i < 3; ++i) {
        const VectorField grad = cell_gradient(g, pressure(u, i, p));
        for (int k = 0; k < 2; ++k) {
            const ScalarField expect = -grad.components[k];
            EXPECT_EQ(v[i].components[k], expect);
        }
    }
}

TEST(Brinkman, ConstantPressureGivesZeroVelocity) {
    const Grid g = square(6);
    const ModelParams p = to_params(ModelConfig{});
    std::vector<ScalarField> u(3, ScalarField::Constant(36, 0.8));
    const auto v = velocity_from_pressure(u, p, EllipticOperator(g, 0.001, 0.0));
    for (const auto& vi : v) EXPECT_EQ(vi.max_norm(), 0.0);
}

#include <cmath>

#include <gtest/gtest.h>

#include "btb/config.hpp"
#include "btb/entropy.hpp"
#include "btb/initial_data.hpp"

using namespace btb;

namespace {

Grid square(int n) { return Grid(GridSpec{2, {0.0, 0.0}, {1.0, 1.0}, {n, n}}); }

} // namespace

TEST(Entropy, DensityValues) {
    EXPECT_DOUBLE_EQ(tsallis_density(2.0, 2.0), 2.0);
    EXPECT_DOUBLE_EQ(tsallis_density(4.0, 0.5), (2.0 - 4.0) / -0.5);
    EXPECT_DOUBLE_EQ(tsallis_density(std::exp(1.0), 1.0), std::exp(1.0));
    EXPECT_EQ(tsallis_density(0.0, 1.0), 0.0);
    EXPECT_EQ(tsallis_density(1.0, 1.7), 0.0);
}

TEST(Entropy, BoltzmannLimitIsContinuous) {
    for (double z : {0.1, 0.5, 1.0, 2.0}) {
        EXPECT_NEAR(tsallis_density(z, 1.0 + 1e-4), z * std::log(z), 1e-3);
        EXPECT_NEAR(tsallis_density(z, 1.0 - 1e-4), z * std::log(z), 1e-3);
    }
    // second-order term u (log u)^2 (beta - 1) / 2
    const double z = 10.0;
    const double d = 1e-4;
    EXPECT_NEAR(tsallis_density(z, 1.0 + d) - z * std::log(z), 0.5 * d * z * std::log(z) * std::log(z), 1e-6);
}

TEST(Entropy, ScalingIdentity) {
    const Grid g = square(8);
    const auto u = section7_initial_data(g);
    const double lambda = 2.3;
    for (double beta : {0.5, 1.5, 2.5}) {
        std::vector<ScalarField> s;
        double direct = 0.0;
        for (const auto& ui : u) {
            s.push_back(lambda * ui);
            for (Eigen::Index c = 0; c < ui.size(); ++c) {
                direct += g.cell_volume() * (std::pow(lambda, beta) * std::pow(ui[c], beta) - lambda * ui[c]) /
                          (beta - 1.0);
            }
        }
        EXPECT_NEAR(tsallis_entropy(g, s, beta), direct, 1e-12 * std::abs(direct));
    }
}

TEST(Entropy, TruncatedEntropyUsesR) {
    const Grid g(GridSpec{1, {0.0}, {1.0}, {2}});
    ModelParams p;
    p.beta = 2.0;
    p.trunc_N = 2.0;
    ScalarField u(2);
    u << 1.0, 3.0;
    // (R(1) - 1) / 1 = 0 and (R(3) - 3) with R(3) = 4 + 4 + 1 = 9
    EXPECT_DOUBLE_EQ(entropy(g, {u}, p), 0.5 * 0.0 + 0.5 * 6.0);
}

TEST(Entropy, DiffusiveDissipationByHand) {
    const Grid g(GridSpec{1, {0.0}, {1.0}, {2}});
    ModelParams p;
    p.beta = 2.0;
    p.sigma = {0.5};
    ScalarField u(2);
    u << 1.0, 3.0;
    // (4/beta) sigma |(3 - 1)/h|^2 h = 2 * 0.5 * 16 * 0.5
    EXPECT_DOUBLE_EQ(diffusive_dissipation(g, {u}, p), 8.0);
}

TEST(Entropy, NonlocalDissipationBoundsAndSign) {
    const Grid g = square(12);
    ModelParams p = to_params(ModelConfig{});
    const auto u = section7_initial_data(g);
    for (double beta : {0.5, 1.5, 2.5}) {
        p.beta = beta;
        const EllipticOperator op(g, 0.001, 0.0);
        const double d = nonlocal_dissipation(g, u, p, op);
        const double lb = nonlocal_lower_bound(g, u, p, op);
        EXPECT_GT(lb, 0.0);
        EXPECT_GE(d, lb - 1e-9);
        EXPECT_GE(diffusive_dissipation(g, u, p), 0.0);
    }
}

TEST(Entropy, ResidualCombinesTerms) {
    DiagnosticsRecord a;
    DiagnosticsRecord b;
    a.entropy = 2.0;
    b.entropy = 1.5;
    b.diff_dissipation = 3.0;
    b.nonlocal_dissipation = 1.0;
    EXPECT_DOUBLE_EQ(entropy_residual(a, b, 0.1), -0.5 + 0.4);
}

TEST(Entropy, DiagnosticsRecord) {
    const Grid g = square(6);
    const ModelParams p = to_params(ModelConfig{});
    const auto u = section7_initial_data(g);
    const EllipticOperator op(g, 0.001, 0.0);
    const auto v = velocity_from_pressure(u, p, op);
    const auto r = compute_diagnostics(g, u, v, p, op, 3, 0.5);
    EXPECT_EQ(r.step, 3);
    ASSERT_EQ(r.mass.size(), 3u);
    EXPECT_NEAR(r.mass[0], integrate(g, u[0]), 1e-15);
    EXPECT_DOUBLE_EQ(r.min_density, std::min({u[0].minCoeff(), u[1].minCoeff(), u[2].minCoeff()}));
    EXPECT_GT(r.max_velocity_inf, 0.0);
    EXPECT_NEAR(r.alpha, smallest_symmetric_eigenvalue(p.a), 1e-15);
}

#pragma once

// Tsallis entropy H(u) = sum_i int (u_i^beta - u_i) / (beta - 1) dx, the two
// dissipation functionals, and the per-step entropy residual
//   H^k - H^{k-1} + tau * (D_diff^k + D_nl^k),
// which is <= 0 (up to fixed-point tolerance) when the discrete entropy inequality holds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "btb/brinkman.hpp"
#include "btb/grid.hpp"
#include "btb/pressure.hpp"

namespace btb {

/// |beta - 1| below which the Boltzmann limit u log u is used.
inline constexpr double kBoltzmannBand = 1e-12;

struct DiagnosticsRecord {
    int step = 0;
    double time = 0.0;
    std::vector<double> mass;
    double entropy = 0.0;
    double diff_dissipation = 0.0;
    double nonlocal_dissipation = 0.0;
    double entropy_residual = 0.0;
    double min_density = 0.0;
    double max_velocity_inf = 0.0;
    double alpha = 0.0;
    /// alpha * sum_i |K(grad P(u_i))|^2; D_nl must not fall below it.
    double nonlocal_lower_bound = 0.0;
};

/// Pointwise entropy density (z^beta - z) / (beta - 1), or z log z at beta = 1.
inline double tsallis_density(double z, double beta) {
    z = clip_density(z);
    if (std::abs(beta - 1.0) <= kBoltzmannBand) return z > 0.0 ? z * std::log(z) : 0.0;
    return (std::pow(z, beta) - z) / (beta - 1.0);
}

inline double tsallis_entropy(const Grid& grid, const std::vector<ScalarField>& u, double beta) {
    double h = 0.0;
    for (const auto& ui : u) {
        h += integrate(grid, ui.unaryExpr([beta](double z) { return tsallis_density(z, beta); }));
    }
    return h;
}

/// Entropy of the scheme in use: with a truncation level, u^beta is replaced by R_N^beta(u).
inline double entropy(const Grid& grid, const std::vector<ScalarField>& u, const ModelParams& p) {
    if (!p.truncated()) return tsallis_entropy(grid, u, p.beta);
    const double N = *p.trunc_N;
    const double beta = p.beta;
    double h = 0.0;
    for (const auto& ui : u) {
        h += integrate(grid, ui.unaryExpr([=](double z) {
            z = clip_density(z);
            return (r_trunc(z, beta, N) - z) / (beta - 1.0);
        }));
    }
    return h;
}

/// (4/beta) sum_i sigma_i int |grad u_i^{beta/2}|^2, from face differences over interior faces.
inline double diffusive_dissipation(const Grid& grid, const std::vector<ScalarField>& u, const ModelParams& p) {
    double total = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const FaceFluxField g = gradient_at_faces(grid, half_power(u[static_cast<std::size_t>(i)], p));
        double s = 0.0;
        for (const auto& ax : g.axis) s += ax.squaredNorm();
        total += p.sigma[static_cast<std::size_t>(i)] * s;
    }
    return 4.0 / p.beta * total * grid.cell_volume();
}

/// Cell gradients of P(u_j), the argument of the nonlocal operator.
inline std::vector<VectorField> power_gradients(const Grid& grid, const std::vector<ScalarField>& u,
                                                const ModelParams& p) {
    std::vector<VectorField> g;
    g.reserve(u.size());
    for (const auto& uj : u) g.push_back(cell_gradient(grid, pressure_power(uj, p)));
    return g;
}

/// sum_ij a_ij <L g_j, g_i> = -sum_i <v_i, g_i>, given the velocities of u.
inline double nonlocal_dissipation(const Grid& grid, const std::vector<ScalarField>& u, const ModelParams& p,
                                   const std::vector<VectorField>& velocity) {
    const auto g = power_gradients(grid, u, p);
    double d = 0.0;
    for (int i = 0; i < p.n; ++i) d -= inner(grid, velocity[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(i)]);
    return d;
}

inline double nonlocal_dissipation(const Grid& grid, const std::vector<ScalarField>& u, const ModelParams& p,
                                   const EllipticOperator& op) {
    return nonlocal_dissipation(grid, u, p, velocity_from_pressure(u, p, op));
}

/// alpha * sum_i <L g_i, g_i>
inline double nonlocal_lower_bound(const Grid& grid, const std::vector<ScalarField>& u, const ModelParams& p,
                                   const EllipticOperator& op) {
    const auto g = power_gradients(grid, u, p);
    double s = 0.0;
    for (const auto& gi : g) s += quadratic_form(op, gi);
    return smallest_symmetric_eigenvalue(p.a) * s;
}

inline double entropy_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& curr, double tau) {
    return curr.entropy - prev.entropy + tau * (curr.diff_dissipation + curr.nonlocal_dissipation);
}

inline DiagnosticsRecord compute_diagnostics(const Grid& grid, const std::vector<ScalarField>& u,
                                             const std::vector<VectorField>& velocity, const ModelParams& p,
                                             const EllipticOperator& op, int step, double time) {
    DiagnosticsRecord r;
    r.step = step;
    r.time = time;
    r.min_density = std::numeric_limits<double>::infinity();
    for (const auto& ui : u) {
        r.mass.push_back(integrate(grid, ui));
        r.min_density = std::min(r.min_density, ui.minCoeff());
    }
    r.entropy = entropy(grid, u, p);
    r.diff_dissipation = diffusive_dissipation(grid, u, p);
    r.nonlocal_dissipation = nonlocal_dissipation(grid, u, p, velocity);
    r.alpha = smallest_symmetric_eigenvalue(p.a);
    r.nonlocal_lower_bound = nonlocal_lower_bound(grid, u, p, op);
    for (const auto& vi : velocity) r.max_velocity_inf = std::max(r.max_velocity_inf, vi.max_norm());
    return r;
}

} // namespace btb

#pragma once

// Pressure law p_i(u) = sum_j a_ij u_j^beta and the cutoff calculus used by the
// truncated scheme for beta >= 2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btb/errors.hpp"
#include "btb/grid.hpp"

namespace btb {

/// Densities above this negative threshold are rounded up to zero before powering.
inline constexpr double kNegativeClip = 1e-12;

struct ModelParams {
    int n = 1;
    double beta = 1.0;
    std::vector<double> sigma{1.0};
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(1, 1);
    double eps = 0.0;
    double eta = 0.0;
    std::optional<double> trunc_N; // nullopt: untruncated powers

    bool truncated() const noexcept { return trunc_N.has_value(); }

    bool operator==(const ModelParams& o) const {
        return n == o.n && beta == o.beta && sigma == o.sigma && a.rows() == o.a.rows() &&
               a.cols() == o.a.cols() && a == o.a && eps == o.eps && eta == o.eta && trunc_N == o.trunc_N;
    }
};

/// Smallest eigenvalue of the symmetric part of a.
inline double smallest_symmetric_eigenvalue(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline void validate(const ModelParams& p) {
    if (p.n < 1) throw ValidationError("species count n must be >= 1");
    if (!(p.beta > 0.0) || !std::isfinite(p.beta)) throw ValidationError("beta must be positive");
    if (static_cast<int>(p.sigma.size()) != p.n) throw ValidationError("sigma needs one entry per species");
    for (double s : p.sigma) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("every sigma_i must be positive");
    }
    if (p.a.rows() != p.n || p.a.cols() != p.n) throw ValidationError("coefficient matrix a must be n x n");
    if (!p.a.allFinite()) throw ValidationError("coefficient matrix a has non-finite entries");
    const double alpha = smallest_symmetric_eigenvalue(p.a);
    if (!(alpha > 0.0)) {
        throw ValidationError("coefficient matrix a is not positive definite (alpha = " + std::to_string(alpha) +
                              ")");
    }
    if (!(p.eps >= 0.0) || !std::isfinite(p.eps)) throw ValidationError("eps must be nonnegative");
    if (!(p.eta >= 0.0) || !std::isfinite(p.eta)) throw ValidationError("eta must be nonnegative");
    if (p.trunc_N && !(*p.trunc_N > 1.0)) throw ValidationError("truncation level N must exceed 1");
}

/// Maps values in (-1e-12, 0) to 0; anything more negative is a positivity failure.
inline double clip_density(double z) {
    if (z >= 0.0) return z;
    if (z > -kNegativeClip) return 0.0;
    throw NumericalError("negative density " + std::to_string(z) + " below clipping threshold");
}

inline ScalarField clip_nonnegative(const ScalarField& u) {
    return u.unaryExpr([](double z) { return clip_density(z); });
}

/// (z)_+^N = max(0, min(N, z))
inline double clipped_plus(double z, double N) { return std::max(0.0, std::min(N, z)); }

/// C^1 cutoff of z^gamma: gamma * int_0^z [(s)_+^N]^(gamma-1) ds.
inline double s_trunc(double z, double gamma, double N) {
    if (z <= 0.0) return 0.0;
    if (z <= N) return std::pow(z, gamma);
    return std::pow(N, gamma) + gamma * std::pow(N, gamma - 1.0) * (z - N);
}

/// R_N^beta(z) = beta * int_0^z S_N^(beta-1)(s) ds; quadratic beyond N. Requires beta >= 2, N > 1.
inline double r_trunc(double z, double beta, double N) {
    if (beta < 2.0 || N <= 1.0) throw ValidationError("r_trunc requires beta >= 2 and N > 1");
    if (z <= 0.0) return 0.0;
    if (z <= N) return std::pow(z, beta);
    const double dz = z - N;
    return std::pow(N, beta) + beta * std::pow(N, beta - 1.0) * dz +
           0.5 * (beta - 1.0) * beta * std::pow(N, beta - 2.0) * dz * dz;
}

inline ScalarField power_field(const ScalarField& u, double gamma) {
    return u.unaryExpr([gamma](double z) { return std::pow(clip_density(z), gamma); });
}

// The three nonlinearities of the model, switching to their cutoffs when N is set.

/// u^beta, or S_N^beta(u): enters the pressure.
inline ScalarField pressure_power(const ScalarField& u, const ModelParams& p) {
    if (!p.truncated()) return power_field(u, p.beta);
    const double N = *p.trunc_N;
    const double beta = p.beta;
    return u.unaryExpr([=](double z) { return s_trunc(clip_density(z), beta, N); });
}

/// u^(beta/2), or S_N^(beta/2)(u): enters the diffusive dissipation.
inline ScalarField half_power(const ScalarField& u, const ModelParams& p) {
    if (!p.truncated()) return power_field(u, 0.5 * p.beta);
    const double N = *p.trunc_N;
    const double gamma = 0.5 * p.beta;
    return u.unaryExpr([=](double z) { return s_trunc(clip_density(z), gamma, N); });
}

/// Convected density: (y)_+, or (y)_+^N when truncated.
inline ScalarField convected_density(const ScalarField& y, const ModelParams& p) {
    if (!p.truncated()) return y.cwiseMax(0.0);
    const double N = *p.trunc_N;
    return y.unaryExpr([N](double z) { return clipped_plus(z, N); });
}

/// p_i(u) = sum_j a_ij P(u_j) with P the (possibly truncated) power.
inline ScalarField pressure(const std::vector<ScalarField>& u, int i, const ModelParams& p) {
    ScalarField out = ScalarField::Zero(u.front().size());
    for (int j = 0; j < p.n; ++j) {
        if (p.a(i, j) != 0.0) out += p.a(i, j) * pressure_power(u[j], p);
    }
    return out;
}

} // namespace btb

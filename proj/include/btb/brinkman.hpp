#pragma once

// Discrete Brinkman solution operators. The velocity of species i solves, per
// component, (I - eps * Lap_D + eta * Lap_D^2) v = -grad p_i(u), with Lap_D the
// zero-boundary-value Laplacian. eps = eta = 0 is Darcy's law v = -grad p_i(u).

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "btb/errors.hpp"
#include "btb/grid.hpp"
#include "btb/pressure.hpp"

namespace btb {

/// Grids with at most this many cells are factorized directly; larger ones use CG.
inline constexpr Eigen::Index kDirectSolveMaxCells = 64 * 64;
inline constexpr double kCgTolerance = 1e-12;
inline constexpr double kSolveResidualLimit = 1e-10;

/// Immutable after construction; solve() is const and re-entrant.
class EllipticOperator {
public:
    EllipticOperator(const Grid& grid, double eps, double eta) : grid_(grid), eps_(eps), eta_(eta) {
        if (!(eps >= 0.0) || !(eta >= 0.0)) throw ValidationError("eps and eta must be nonnegative");
        const Eigen::Index n = grid.cell_count();
        laplacian_ = dirichlet_laplacian(grid);
        SparseMatrix identity(n, n);
        identity.setIdentity();
        matrix_ = identity;
        if (eps > 0.0) matrix_ = SparseMatrix(matrix_ - eps * laplacian_);
        if (eta > 0.0) {
            const SparseMatrix bilaplacian = laplacian_ * laplacian_;
            matrix_ = SparseMatrix(matrix_ + eta * bilaplacian);
        }
        matrix_.makeCompressed();
        if (is_identity()) return;
        if (n <= kDirectSolveMaxCells) {
            auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
            ldlt->compute(matrix_);
            if (ldlt->info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed", 1.0);
            ldlt_ = std::move(ldlt);
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    double eps() const noexcept { return eps_; }
    double eta() const noexcept { return eta_; }
    /// Order m of the higher-order term (2 when eta > 0).
    int order_m() const noexcept { return eta_ > 0.0 ? 2 : 0; }
    bool is_identity() const noexcept { return eps_ == 0.0 && eta_ == 0.0; }
    const SparseMatrix& matrix() const noexcept { return matrix_; }
    const SparseMatrix& laplacian() const noexcept { return laplacian_; }

    ScalarField solve(const ScalarField& rhs) const {
        if (!rhs.allFinite()) throw NumericalError("elliptic solve: non-finite right-hand side");
        if (is_identity()) return rhs;
        const double rhs_norm = rhs.norm();
        if (rhs_norm == 0.0) return ScalarField::Zero(rhs.size());
        ScalarField x;
        if (ldlt_) {
            x = ldlt_->solve(rhs);
        } else {
            Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(kCgTolerance);
            cg.setMaxIterations(static_cast<Eigen::Index>(10 * rhs.size()));
            cg.compute(matrix_);
            x = cg.solve(rhs);
            if (cg.info() != Eigen::Success) {
                throw SolverError("conjugate gradient did not converge", (matrix_ * x - rhs).norm() / rhs_norm);
            }
        }
        const double residual = (matrix_ * x - rhs).norm() / rhs_norm;
        if (!(residual <= kSolveResidualLimit)) throw SolverError("elliptic solve inaccurate", residual);
        return x;
    }

    VectorField solve(const VectorField& rhs) const {
        VectorField out;
        out.components.reserve(rhs.components.size());
        for (const auto& c : rhs.components) out.components.push_back(solve(c));
        return out;
    }

private:
    Grid grid_;
    double eps_;
    double eta_;
    SparseMatrix laplacian_;
    SparseMatrix matrix_;
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
};

inline EllipticOperator assemble(const Grid& grid, double eps, double eta) {
    return EllipticOperator(grid, eps, eta);
}

/// v_i = L(-grad p_i(u)) for every species. With eps = eta = 0 the solve is skipped.
inline std::vector<VectorField> velocity_from_pressure(const std::vector<ScalarField>& u, const ModelParams& params,
                                                       const EllipticOperator& op) {
    std::vector<VectorField> v;
    v.reserve(static_cast<std::size_t>(params.n));
    for (int i = 0; i < params.n; ++i) {
        VectorField g = cell_gradient(op.grid(), pressure(u, i, params));
        for (auto& c : g.components) c = -c;
        v.push_back(op.is_identity() ? std::move(g) : op.solve(g));
    }
    return v;
}

/// <L g, g> = |K g|^2, summed over components with cell-volume weights.
inline double quadratic_form(const EllipticOperator& op, const VectorField& g) {
    return inner(op.grid(), op.solve(g), g);
}

/// Relative mismatch of the discrete energy identity
///   eps |grad v|^2 + eta |Lap_D v|^2 + |v|^2 = <g, v>,   v = L g.
inline double energy_identity_residual(const EllipticOperator& op, const VectorField& g) {
    const Grid& grid = op.grid();
    const VectorField v = op.solve(g);
    double lhs = 0.0;
    for (const auto& vk : v.components) {
        lhs += inner(grid, vk, vk);
        if (op.eps() > 0.0) lhs += op.eps() * dirichlet_gradient_energy(grid, vk);
        if (op.eta() > 0.0) {
            const ScalarField lv = op.laplacian() * vk;
            lhs += op.eta() * inner(grid, lv, lv);
        }
    }
    const double rhs = inner(grid, g, v);
    return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

/// Dense square-root diagnostic on a small grid: L = A^{-1}, K = L^{1/2}.
struct SqrtDiagnostic {
    Eigen::MatrixXd solution_operator; // L
    Eigen::MatrixXd sqrt_operator;     // K
    Eigen::VectorXd eigenvalues;       // of L, ascending
    double residual = 0.0;             // |K K - L|_F / |L|_F
};

inline constexpr Eigen::Index kSqrtCheckMaxCells = 1024;

inline SqrtDiagnostic sqrt_check(const Grid& grid, double eps, double eta) {
    if (grid.cell_count() > kSqrtCheckMaxCells) {
        throw ValidationError("sqrt_check needs a small grid (at most " + std::to_string(kSqrtCheckMaxCells) +
                              " cells)");
    }
    const EllipticOperator op(grid, eps, eta);
    const Eigen::MatrixXd a = Eigen::MatrixXd(op.matrix());
    const Eigen::Index n = a.rows();
    SqrtDiagnostic out;
    out.solution_operator = a.llt().solve(Eigen::MatrixXd::Identity(n, n));
    // symmetrize away round-off from the dense inverse
    out.solution_operator = 0.5 * (out.solution_operator + out.solution_operator.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.solution_operator);
    out.eigenvalues = es.eigenvalues();
    const Eigen::VectorXd roots = out.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    out.sqrt_operator = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
    out.residual = (out.sqrt_operator * out.sqrt_operator - out.solution_operator).norm() /
                   out.solution_operator.norm();
    return out;
}

} // namespace btb

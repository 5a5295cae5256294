#pragma once

// Implicit Euler in time with a frozen-coefficient linear problem iterated to its
// fixed point. Given an iterate y, one linear substep computes the velocity
// v~ = L(-grad p_i(y)) and solves per species
//
//   (1/tau) u_i - sigma_i Lap_N u_i = (1/tau) u_i^{k-1} - div F_i,
//   F_i = (face density of (y_i)_+) * (face average of v~_i),
//
// with zero total flux through the boundary. The fixed point u = y is the step.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "btb/brinkman.hpp"
#include "btb/entropy.hpp"
#include "btb/errors.hpp"
#include "btb/grid.hpp"
#include "btb/pressure.hpp"

namespace btb {

enum class ConvectionScheme { upwind, central };
enum class SchemeVariant { plain, eta_regularized, truncated };

inline const char* to_string(ConvectionScheme c) { return c == ConvectionScheme::upwind ? "upwind" : "central"; }
inline const char* to_string(SchemeVariant s) {
    switch (s) {
    case SchemeVariant::plain: return "plain";
    case SchemeVariant::eta_regularized: return "eta_regularized";
    case SchemeVariant::truncated: return "truncated";
    }
    return "?";
}

/// plain for beta < 1/d, eta_regularized for 1/d <= beta < 2, truncated for beta >= 2.
inline SchemeVariant select_scheme(double beta, int dimension) {
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    if (dimension != 1 && dimension != 2) throw ValidationError("dimension must be 1 or 2");
    if (beta < 1.0 / dimension) return SchemeVariant::plain;
    if (beta < 2.0) return SchemeVariant::eta_regularized;
    return SchemeVariant::truncated;
}

struct TimeStepConfig {
    double tau = 4e-5;
    double picard_tol = 1e-10;
    int picard_max = 50;
    ConvectionScheme convection = ConvectionScheme::upwind;
    SchemeVariant scheme = SchemeVariant::eta_regularized;

    bool operator==(const TimeStepConfig&) const = default;
};

inline void validate(const TimeStepConfig& c) {
    if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw ValidationError("tau must be positive");
    if (!(c.picard_tol > 0.0 && c.picard_tol < 1.0)) throw ValidationError("picard_tol must lie in (0, 1)");
    if (c.picard_max < 1) throw ValidationError("picard_max must be >= 1");
}

struct SimulationState {
    double time = 0.0;
    int step = 0;
    std::vector<ScalarField> u;
    std::vector<VectorField> v;
    int picard_iterations_used = 0;
};

/// Convective face flux of `density` transported by the face-averaged velocity; boundary faces zero.
inline FaceFluxField convective_flux(const Grid& grid, const ScalarField& density, const VectorField& velocity,
                                     ConvectionScheme scheme) {
    FaceFluxField flux = face_average(grid, velocity);
    for (int k = 0; k < grid.dimension(); ++k) {
        auto& faces = flux.axis[static_cast<std::size_t>(k)];
        grid.for_each_interior_face(k, [&](Eigen::Index f, Eigen::Index l, Eigen::Index r) {
            const double vf = faces[f];
            const double rho = scheme == ConvectionScheme::upwind ? (vf > 0.0 ? density[l] : density[r])
                                                                  : 0.5 * (density[l] + density[r]);
            faces[f] = vf * rho;
        });
    }
    return flux;
}

/// Factorized (1/tau) I - sigma Lap_N for one species.
class TransportOperator {
public:
    TransportOperator(const Grid& grid, const SparseMatrix& neumann, double sigma, double tau) : tau_(tau) {
        SparseMatrix id(grid.cell_count(), grid.cell_count());
        id.setIdentity();
        matrix_ = SparseMatrix((1.0 / tau) * id - sigma * neumann);
        matrix_.makeCompressed();
        if (grid.cell_count() <= kDirectSolveMaxCells) {
            auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
            ldlt->compute(matrix_);
            if (ldlt->info() != Eigen::Success) throw SolverError("transport factorization failed", 1.0);
            ldlt_ = std::move(ldlt);
        }
    }

    double tau() const noexcept { return tau_; }
    const SparseMatrix& matrix() const noexcept { return matrix_; }

    ScalarField solve(const ScalarField& rhs) const {
        const double rhs_norm = rhs.norm();
        if (rhs_norm == 0.0) return ScalarField::Zero(rhs.size());
        ScalarField x;
        if (ldlt_) {
            x = ldlt_->solve(rhs);
        } else {
            Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(kCgTolerance);
            cg.compute(matrix_);
            x = cg.solve(rhs);
            if (cg.info() != Eigen::Success) {
                throw SolverError("transport CG did not converge", (matrix_ * x - rhs).norm() / rhs_norm);
            }
        }
        const double residual = (matrix_ * x - rhs).norm() / rhs_norm;
        if (!(residual <= kSolveResidualLimit)) throw SolverError("transport solve inaccurate", residual);
        return x;
    }

private:
    double tau_;
    SparseMatrix matrix_;
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
};

struct RunResult {
    std::vector<DiagnosticsRecord> diagnostics;
    SimulationState final_state;
    bool failed = false;
    std::string failure;
    int tau_halvings = 0;
    /// Steps where tau >= sigma_i / |v_i|_inf^2 for some species.
    int tau_bound_warnings = 0;
};

using RunObserver = std::function<void(const SimulationState&, const DiagnosticsRecord&)>;

class Integrator {
public:
    Integrator(const Grid& grid, ModelParams params, TimeStepConfig cfg)
        : grid_(grid),
          params_(std::move(params)),
          cfg_(cfg),
          op_(std::make_shared<EllipticOperator>(grid, params_.eps, params_.eta)),
          neumann_(neumann_laplacian(grid)) {
        validate(params_);
        validate(cfg_);
        if (cfg_.scheme == SchemeVariant::truncated && !params_.truncated()) {
            throw ValidationError("truncated scheme needs a truncation level N");
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    const ModelParams& params() const noexcept { return params_; }
    const TimeStepConfig& config() const noexcept { return cfg_; }
    const EllipticOperator& elliptic() const noexcept { return *op_; }

    std::vector<VectorField> velocity(const std::vector<ScalarField>& u) const {
        return velocity_from_pressure(u, params_, *op_);
    }

    /// Linear transport solve with a given velocity (no pressure evaluation).
    std::vector<ScalarField> transport_solve(const std::vector<ScalarField>& y, const std::vector<VectorField>& v,
                                             const std::vector<ScalarField>& u_prev, double tau) {
        const auto& ops = transport_ops(tau);
        std::vector<ScalarField> out;
        out.reserve(y.size());
        for (int i = 0; i < params_.n; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const FaceFluxField flux =
                convective_flux(grid_, convected_density(y[si], params_), v[si], cfg_.convection);
            const ScalarField rhs = u_prev[si] / tau - divergence_of_fluxes(grid_, flux);
            out.push_back(ops[si]->solve(rhs));
        }
        return out;
    }

    std::vector<ScalarField> linear_substep(const std::vector<ScalarField>& y, const std::vector<ScalarField>& u_prev,
                                            double tau) {
        return transport_solve(y, velocity(y), u_prev, tau);
    }

    /// One implicit Euler step of length tau by Picard iteration. Throws PicardDivergence.
    SimulationState picard_step(const SimulationState& state, double tau) {
        std::vector<ScalarField> y = state.u;
        double change = std::numeric_limits<double>::infinity();
        for (int it = 1; it <= cfg_.picard_max; ++it) {
            std::vector<ScalarField> next = linear_substep(y, state.u, tau);
            change = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double rel = l2_norm(grid_, next[i] - y[i]) / (l2_norm(grid_, y[i]) + 1e-30);
                change = std::max(change, rel);
            }
            y = std::move(next);
            if (!std::isfinite(change)) break;
            if (change < cfg_.picard_tol) {
                SimulationState out;
                out.u = std::move(y);
                out.v = velocity(out.u);
                out.time = state.time + tau;
                out.step = state.step + 1;
                out.picard_iterations_used = it;
                return out;
            }
        }
        throw PicardDivergence(cfg_.picard_max, change);
    }

    SimulationState picard_step(const SimulationState& state) { return picard_step(state, cfg_.tau); }

    SimulationState initial_state(const std::vector<ScalarField>& u0) const {
        if (static_cast<int>(u0.size()) != params_.n) throw ValidationError("initial data needs n fields");
        SimulationState s;
        for (const auto& ui : u0) {
            if (ui.size() != grid_.cell_count()) throw ValidationError("initial field has wrong size");
            if (!ui.allFinite()) throw ValidationError("initial field is not finite");
            s.u.push_back(clip_nonnegative(ui));
        }
        s.v = velocity(s.u);
        return s;
    }

    DiagnosticsRecord diagnostics(const SimulationState& s) const {
        return compute_diagnostics(grid_, s.u, s.v, params_, *op_, s.step, s.time);
    }

    /// Steps until time >= t_end. On an unrecoverable failure the partial trajectory is returned.
    RunResult run(const std::vector<ScalarField>& u0, double t_end, const RunObserver& observer = {}) {
        if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
        RunResult result;
        SimulationState state = initial_state(u0);
        DiagnosticsRecord prev = diagnostics(state);
        result.diagnostics.push_back(prev);
        if (observer) observer(state, prev);

        const double tau = cfg_.tau;
        const int steps = static_cast<int>(std::ceil(t_end / tau - 1e-9));
        for (int k = 1; k <= steps; ++k) {
            SimulationState next;
            DiagnosticsRecord rec;
            try {
                next = picard_step(state, tau);
                rec = diagnostics(next);
                rec.entropy_residual = entropy_residual(prev, rec, tau);
            } catch (const NumericalError&) {
                // one retry of the step as two half steps
                try {
                    const SimulationState mid = picard_step(state, 0.5 * tau);
                    const DiagnosticsRecord mid_rec = diagnostics(mid);
                    next = picard_step(mid, 0.5 * tau);
                    next.picard_iterations_used += mid.picard_iterations_used;
                    rec = diagnostics(next);
                    rec.entropy_residual =
                        entropy_residual(prev, mid_rec, 0.5 * tau) + entropy_residual(mid_rec, rec, 0.5 * tau);
                    ++result.tau_halvings;
                } catch (const NumericalError& e) {
                    result.failed = true;
                    result.failure = "step " + std::to_string(k) + ": " + e.what();
                    break;
                }
            }
            next.step = k;
            next.time = k * tau;
            rec.step = k;
            rec.time = next.time;
            for (int i = 0; i < params_.n; ++i) {
                const double vmax = next.v[static_cast<std::size_t>(i)].max_norm();
                if (vmax > 0.0 && tau >= params_.sigma[static_cast<std::size_t>(i)] / (vmax * vmax)) {
                    ++result.tau_bound_warnings;
                    break;
                }
            }
            result.diagnostics.push_back(rec);
            if (observer) observer(next, rec);
            state = std::move(next);
            prev = rec;
        }
        result.final_state = std::move(state);
        return result;
    }

private:
    const std::vector<std::shared_ptr<const TransportOperator>>& transport_ops(double tau) {
        auto it = transport_.find(tau);
        if (it != transport_.end()) return it->second;
        std::vector<std::shared_ptr<const TransportOperator>> ops;
        for (double s : params_.sigma) ops.push_back(std::make_shared<TransportOperator>(grid_, neumann_, s, tau));
        return transport_.emplace(tau, std::move(ops)).first->second;
    }

    Grid grid_;
    ModelParams params_;
    TimeStepConfig cfg_;
    std::shared_ptr<const EllipticOperator> op_;
    SparseMatrix neumann_;
    std::map<double, std::vector<std::shared_ptr<const TransportOperator>>> transport_;
};

inline RunResult run(const Grid& grid, const std::vector<ScalarField>& u0, const ModelParams& params,
                     const TimeStepConfig& cfg, double t_end, const RunObserver& observer = {}) {
    Integrator integrator(grid, params, cfg);
    return integrator.run(u0, t_end, observer);
}

} // namespace btb

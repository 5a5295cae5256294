// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "btb/btb.hpp"

using namespace btb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    int id;
    bool passed;
    std::string summary;
};

std::vector<Outcome> outcomes;

void report(int id, bool passed, const std::string& summary) {
    outcomes.push_back({id, passed, summary});
    fmt::print("criterion {:>2}: {}  {}\n", id, passed ? "PASS" : "FAIL", summary);
    std::fflush(stdout);
}

struct ReferenceRun {
    double beta;
    RunArtifacts run;
    double seconds;
};

double variance_at(const ReferenceRun& r, int step) {
    return spatial_variance(r.run.grid, total_density(r.run.snapshots.at(step)));
}

const VerifyReport& verify_report() {
    static const VerifyReport r = verify();
    return r;
}

const Check& find_check(const std::string& suite, const std::string& name) {
    for (const auto& c : verify_report().checks) {
        if (c.suite == suite && c.name == name) return c;
    }
    throw std::out_of_range("no check " + suite + "." + name);
}

std::string check_line(const Check& c) { return fmt::format("{}={:.2e} (tol {:.0e})", c.name, c.measured, c.tolerance); }

/// Smooth single-species 1D run for the temporal order study.
ScalarField smooth_final(double tau) {
    const Grid g(GridSpec{1, {0.0}, {1.0}, {64}});
    ModelParams p;
    p.beta = 1.5;
    p.sigma = {0.1};
    p.a = Eigen::MatrixXd::Constant(1, 1, 1.0);
    p.eps = 0.01;
    TimeStepConfig cfg;
    cfg.tau = tau;
    cfg.picard_tol = 1e-13;
    const double pi = std::numbers::pi;
    const ScalarField u0 = sample(g, [pi](double x, double) { return 1.0 + 0.5 * std::cos(pi * x); });
    const RunResult r = run(g, {u0}, p, cfg, 0.05);
    if (r.failed) throw NumericalError(r.failure);
    if (r.tau_halvings > 0) throw NumericalError(fmt::format("tau = {:g} needed step halving", tau));
    return r.final_state.u[0];
}

} // namespace

int main() {
    const auto t_total = Clock::now();

    // reference runs shared by criteria 1-5
    std::vector<ReferenceRun> runs;
    for (double beta : {0.5, 1.5, 2.5}) {
        const auto t0 = Clock::now();
        ExperimentConfig cfg = section7_config(beta);
        RunArtifacts a = run_simulation(cfg);
        runs.push_back({beta, std::move(a), seconds_since(t0)});
        if (runs.back().run.result.failed) {
            fmt::print("reference run beta={:g} failed: {}\n", beta, runs.back().run.result.failure);
        }
    }

    {
        bool ok = true;
        std::string s;
        for (const auto& r : runs) {
            const double drift = relative_mass_drift(r.run.result);
            const bool complete = !r.run.result.failed && r.run.result.diagnostics.size() == 251;
            ok = ok && complete && drift <= 1e-10 && r.seconds <= 30.0;
            s += fmt::format("beta={:g}: drift {:.2e}, {:.1f} s; ", r.beta, drift, r.seconds);
        }
        report(1, ok, s);
    }

    {
        double min_density = std::numeric_limits<double>::infinity();
        for (const auto& r : runs) {
            for (const auto& d : r.run.result.diagnostics) min_density = std::min(min_density, d.min_density);
        }
        report(2, min_density >= -1e-12, fmt::format("min density over reference runs {:.3e}", min_density));
    }

    {
        bool ok = true;
        std::string s;
        for (const auto& r : runs) {
            const double tol = r.run.model.stepping.picard_tol;
            int entropy_increases = 0;
            int residual_violations = 0;
            int steps = 0;
            double worst = -std::numeric_limits<double>::infinity();
            const auto& diag = r.run.result.diagnostics;
            for (std::size_t k = 1; k < diag.size(); ++k) {
                const double slack = std::max(1e-8, 100.0 * tol * (1.0 + std::abs(diag[k].entropy)));
                ++steps;
                if (diag[k].entropy > diag[k - 1].entropy + slack) ++entropy_increases;
                if (diag[k].entropy_residual > slack) {
                    ++residual_violations;
                    fmt::print("  beta={:g} step {}: residual {:.3e} > slack {:.3e}\n", r.beta, diag[k].step,
                               diag[k].entropy_residual, slack);
                }
                worst = std::max(worst, diag[k].entropy_residual);
            }
            const double frac = steps ? 1.0 - static_cast<double>(residual_violations) / steps : 0.0;
            ok = ok && entropy_increases == 0 && frac >= 0.99 && steps == 250;
            s += fmt::format("beta={:g}: {} increases, residual ok on {:.1f}% (max {:.2e}); ", r.beta,
                             entropy_increases, 100.0 * frac, worst);
        }
        report(3, ok, s);
    }

    {
        bool ok = true;
        std::string s;
        for (const auto& r : runs) {
            const double ratio = variance_at(r, 250) / variance_at(r, 15);
            ok = ok && ratio <= 0.1;
            s += fmt::format("beta={:g}: var250/var15 = {:.3f}; ", r.beta, ratio);
        }
        report(4, ok, s + "(need <= 0.1)");
    }

    {
        const double v05 = variance_at(runs[0], 50);
        const double v15 = variance_at(runs[1], 50);
        const double v25 = variance_at(runs[2], 50);
        report(5, v25 < v15 && v15 < v05,
               fmt::format("var50: beta=2.5 {:.4e} < beta=1.5 {:.4e} < beta=0.5 {:.4e}", v25, v15, v05));
    }

    {
        const auto t0 = Clock::now();
        bool ok = true;
        std::string s;
        for (const char* name : {"localization_1d.cfg", "localization_2d.cfg"}) {
            try {
                const auto cfg = load_config(std::string(BTB_SOURCE_DIR) + "/configs/" + name);
                const SweepReport r = localization_sweep(cfg);
                const bool dec = r.verdicts.at("distance_strictly_decreasing");
                double min_density = std::numeric_limits<double>::infinity();
                s += fmt::format("{}: d =", name);
                for (std::size_t i = 0; i < r.values.size(); ++i) {
                    s += fmt::format(" {:.3e}", r.metric(i, "distance"));
                    min_density = std::min(min_density, r.metric(i, "min_density"));
                }
                ok = ok && dec && min_density >= -1e-12;
                s += dec ? " (decreasing); " : " (NOT decreasing); ";
            } catch (const std::exception& e) {
                ok = false;
                s += fmt::format("{}: {}; ", name, e.what());
            }
        }
        const double secs = seconds_since(t0);
        report(6, ok && secs <= 180.0, s + fmt::format("{:.1f} s", secs));
    }

    {
        const auto t0 = Clock::now();
        verify_report();
        bool ok = true;
        std::string s;
        for (const char* name : {"sqrt_operator_residual", "energy_identity", "eta_monotonicity", "darcy_degeneration"}) {
            const Check& c = find_check("operators", name);
            ok = ok && c.passed;
            s += check_line(c) + "; ";
        }
        report(7, ok && seconds_since(t0) <= 10.0, s);
    }

    {
        bool ok = true;
        std::string s;
        for (const char* name : {"chain_rule", "c1_matching", "untruncated_exact", "r_convex"}) {
            const Check& c = find_check("truncation", name);
            ok = ok && c.passed;
            s += check_line(c) + "; ";
        }
        report(8, ok, s);
    }

    {
        try {
            const TruncationCheck t = truncation_insensitivity(section7_config(2.5));
            report(9, t.entropy_change <= 1e-6 && t.variance_change <= 1e-6,
                   fmt::format("N={:g}: relative change entropy {:.2e}, variance {:.2e}", t.level, t.entropy_change,
                               t.variance_change));
        } catch (const std::exception& e) {
            report(9, false, e.what());
        }
    }

    {
        double worst = 0.0;
        double worst_u = 0.0;
        for (double beta : {1.0 - 1e-4, 1.0 + 1e-4}) {
            for (double u : {0.1, 0.5, 1.0, 2.0, 10.0}) {
                const double d = std::abs(tsallis_density(u, beta) - u * std::log(u));
                if (d > worst) {
                    worst = d;
                    worst_u = u;
                }
            }
        }
        report(10, worst <= 1e-3, fmt::format("max |H_beta - u log u| = {:.3e} at u = {:g} (need <= 1e-3)", worst, worst_u));
    }

    {
        try {
            const double tau = 0.05 / 20;
            const ScalarField a = smooth_final(tau);
            const ScalarField b = smooth_final(tau / 2);
            const ScalarField c = smooth_final(tau / 4);
            const double order = std::log2((a - b).norm() / (b - c).norm());
            report(11, order >= 0.8 && order <= 1.2, fmt::format("observed order {:.3f}", order));
        } catch (const std::exception& e) {
            report(11, false, e.what());
        }
    }

    int failed = 0;
    for (const auto& o : outcomes) failed += o.passed ? 0 : 1;
    fmt::print("{} of {} criteria passed ({:.1f} s)\n", outcomes.size() - failed, outcomes.size(),
               seconds_since(t_total));
    return failed == 0 ? 0 : 1;
}

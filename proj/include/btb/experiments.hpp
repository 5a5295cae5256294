#pragma once

// Experiment drivers: single runs, the three-beta figure reproduction, the
// localization (eps -> 0) sweep, the beta sweep and the truncation-level check.
// Sweep members run concurrently; all file output happens on the calling thread.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "btb/config.hpp"
#include "btb/initial_data.hpp"
#include "btb/output.hpp"
#include "btb/time_integrator.hpp"

namespace btb {

struct RunArtifacts {
    Grid grid;
    ResolvedModel model;
    RunResult result;
    std::map<int, std::vector<ScalarField>> snapshots;
};

inline ScalarField total_density(const std::vector<ScalarField>& u) {
    ScalarField s = u.front();
    for (std::size_t i = 1; i < u.size(); ++i) s += u[i];
    return s;
}

/// Runs one configuration; `observer` sees every state after the snapshot bookkeeping.
inline RunArtifacts run_simulation(const ExperimentConfig& cfg, const RunObserver& observer = {}) {
    validate(cfg);
    const Grid grid(cfg.grid);
    const auto u0 = initial_data(cfg, grid);
    RunArtifacts out{grid, resolve(cfg, grid, max_value(u0)), {}, {}};
    std::vector<int> wanted = cfg.snapshot_steps;
    Integrator integrator(grid, out.model.params, out.model.stepping);
    out.result = integrator.run(u0, cfg.t_end, [&](const SimulationState& s, const DiagnosticsRecord& r) {
        if (std::find(wanted.begin(), wanted.end(), s.step) != wanted.end()) out.snapshots[s.step] = s.u;
        if (observer) observer(s, r);
    });
    return out;
}

inline void require_success(const RunArtifacts& a, const std::string& label) {
    if (a.result.failed) throw NumericalError(label + ": " + a.result.failure);
}

inline double relative_mass_drift(const RunResult& r) {
    double drift = 0.0;
    const auto& first = r.diagnostics.front().mass;
    for (const auto& rec : r.diagnostics) {
        for (std::size_t i = 0; i < first.size(); ++i) {
            drift = std::max(drift, std::abs(rec.mass[i] - first[i]) / std::abs(first[i]));
        }
    }
    return drift;
}

/// Writes diagnostics_beta<b>.csv and one snapshot file per recorded step.
inline std::vector<std::filesystem::path> write_outputs(const RunArtifacts& a, const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    const double beta = a.model.params.beta;
    const auto diag = dir / fmt::format("diagnostics_beta{:g}.csv", beta);
    write_text(diag, diagnostics_csv(a.result.diagnostics, a.model.params.n));
    written.push_back(diag);
    for (const auto& [step, u] : a.snapshots) {
        const auto p = dir / snapshot_filename(beta, step);
        write_text(p, snapshot_csv(a.grid, u));
        written.push_back(p);
    }
    return written;
}

struct SweepReport {
    std::string parameter;
    std::vector<double> values;
    std::vector<std::string> metric_names;
    std::vector<std::vector<double>> metrics; // one row per parameter value
    std::map<std::string, bool> verdicts;

    double metric(std::size_t row, const std::string& name) const {
        const auto it = std::find(metric_names.begin(), metric_names.end(), name);
        if (it == metric_names.end()) throw std::out_of_range("no metric " + name);
        return metrics.at(row).at(static_cast<std::size_t>(it - metric_names.begin()));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["parameter"] = parameter;
        j["values"] = values;
        j["metric_names"] = metric_names;
        j["metrics"] = metrics;
        j["verdicts"] = verdicts;
        return j;
    }

    std::string to_csv() const {
        std::string out = parameter;
        for (const auto& m : metric_names) out += "," + m;
        out += "\n";
        for (std::size_t r = 0; r < values.size(); ++r) {
            out += format_number(values[r]);
            for (double v : metrics[r]) out += "," + format_number(v);
            out += "\n";
        }
        return out;
    }
};

inline bool strictly_decreasing(const std::vector<double>& xs) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] < xs[i - 1])) return false;
    }
    return true;
}

/// Space-time distance d(eps) = (sum_i sum_k tau |u_i^(eps),k - u_i^(0),k|^2)^{1/2} to the Darcy run
/// (eps = eta = 0) on the same grid and time step, for every eps in cfg.eps_list.
inline SweepReport localization_sweep(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.eps_list.empty()) throw ValidationError("localization sweep needs eps_list");

    ExperimentConfig ref_cfg = cfg;
    ref_cfg.model.eps = 0.0;
    ref_cfg.model.eta = 0.0;
    std::vector<std::vector<ScalarField>> reference;
    const RunArtifacts ref = run_simulation(ref_cfg, [&](const SimulationState& s, const DiagnosticsRecord&) {
        reference.push_back(s.u);
    });
    require_success(ref, "Darcy reference run");

    struct Member {
        double distance = 0.0;
        RunArtifacts run;
    };
    std::vector<std::future<Member>> jobs;
    for (double eps : cfg.eps_list) {
        jobs.push_back(std::async(std::launch::async, [&cfg, &reference, eps] {
            ExperimentConfig c = cfg;
            c.model.eps = eps;
            double sum = 0.0;
            Member m{0.0, run_simulation(c, [&](const SimulationState& s, const DiagnosticsRecord&) {
                         const auto k = static_cast<std::size_t>(s.step);
                         if (k == 0 || k >= reference.size()) return;
                         for (std::size_t i = 0; i < s.u.size(); ++i) {
                             sum += c.stepping.tau * (s.u[i] - reference[k][i]).squaredNorm();
                         }
                     })};
            m.distance = std::sqrt(sum * m.run.grid.cell_volume());
            return m;
        }));
    }

    SweepReport report;
    report.parameter = "eps";
    report.values = cfg.eps_list;
    report.metric_names = {"distance", "final_entropy", "min_density"};
    for (int s : cfg.snapshot_steps) report.metric_names.push_back(fmt::format("variance_step{}", s));
    std::vector<double> distances;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        Member m = jobs[idx].get();
        require_success(m.run, fmt::format("run eps={:g}", cfg.eps_list[idx]));
        double min_density = std::numeric_limits<double>::infinity();
        for (const auto& d : m.run.result.diagnostics) min_density = std::min(min_density, d.min_density);
        std::vector<double> row{m.distance, m.run.result.diagnostics.back().entropy, min_density};
        for (int s : cfg.snapshot_steps) {
            const auto it = m.run.snapshots.find(s);
            row.push_back(it == m.run.snapshots.end() ? std::nan("")
                                                      : spatial_variance(m.run.grid, total_density(it->second)));
        }
        distances.push_back(m.distance);
        report.metrics.push_back(std::move(row));
    }
    report.verdicts["distance_strictly_decreasing"] = strictly_decreasing(distances);
    return report;
}

/// Runs every beta of cfg.beta_list and compares the decay of the total density.
inline SweepReport beta_sweep(const ExperimentConfig& cfg, std::vector<RunArtifacts>* runs = nullptr) {
    validate(cfg);
    if (cfg.beta_list.empty()) throw ValidationError("beta sweep needs beta_list");
    std::vector<std::future<RunArtifacts>> jobs;
    for (double beta : cfg.beta_list) {
        jobs.push_back(std::async(std::launch::async, [&cfg, beta] {
            ExperimentConfig c = cfg;
            c.model.beta = beta;
            return run_simulation(c);
        }));
    }
    SweepReport report;
    report.parameter = "beta";
    report.values = cfg.beta_list;
    report.metric_names = {"final_entropy", "mass_drift"};
    for (int s : cfg.snapshot_steps) report.metric_names.push_back(fmt::format("variance_step{}", s));

    std::vector<std::vector<double>> variances(cfg.snapshot_steps.size());
    bool decay_in_time = true;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        RunArtifacts a = jobs[idx].get();
        require_success(a, fmt::format("run beta={:g}", cfg.beta_list[idx]));
        std::vector<double> row{a.result.diagnostics.back().entropy, relative_mass_drift(a.result)};
        std::vector<double> over_time;
        for (std::size_t s = 0; s < cfg.snapshot_steps.size(); ++s) {
            const auto it = a.snapshots.find(cfg.snapshot_steps[s]);
            const double var =
                it == a.snapshots.end() ? std::nan("") : spatial_variance(a.grid, total_density(it->second));
            row.push_back(var);
            variances[s].push_back(var);
            over_time.push_back(var);
        }
        decay_in_time = decay_in_time && strictly_decreasing(over_time);
        report.metrics.push_back(std::move(row));
        if (runs) runs->push_back(std::move(a));
    }
    // order by beta so "faster decay for larger beta" reads as strictly decreasing variance
    std::vector<std::size_t> order(cfg.beta_list.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.beta_list[a] < cfg.beta_list[b]; });
    for (std::size_t s = 0; s < cfg.snapshot_steps.size(); ++s) {
        std::vector<double> by_beta;
        for (auto i : order) by_beta.push_back(variances[s][i]);
        report.verdicts[fmt::format("variance_step{}_decreasing_in_beta", cfg.snapshot_steps[s])] =
            strictly_decreasing(by_beta);
    }
    report.verdicts["variance_decreasing_in_time"] = decay_in_time;
    return report;
}

struct FigureReport {
    SweepReport sweep;
    std::vector<RunArtifacts> runs;
    std::vector<std::filesystem::path> files;
};

/// Reference experiment for beta in {0.5, 1.5, 2.5}: 9 snapshots of the species plus per-run diagnostics.
inline FigureReport reproduce_figure(const std::filesystem::path& out_dir) {
    ExperimentConfig cfg = section7_config();
    cfg.experiment = ExperimentKind::reproduce_figure;
    cfg.beta_list = {0.5, 1.5, 2.5};
    cfg.output_dir = out_dir.string();
    FigureReport report;
    report.sweep = beta_sweep(cfg, &report.runs);
    for (const auto& run : report.runs) {
        for (auto& f : write_outputs(run, out_dir)) report.files.push_back(std::move(f));
    }
    return report;
}

struct TruncationCheck {
    double level = 0.0;
    double entropy_change = 0.0;  // relative
    double variance_change = 0.0; // relative
};

/// Re-runs with twice the truncation level and compares final entropy and final variance.
inline TruncationCheck truncation_insensitivity(const ExperimentConfig& cfg) {
    const Grid grid(cfg.grid);
    const double level = cfg.model.trunc.mode == TruncationMode::fixed
                             ? cfg.model.trunc.level
                             : default_truncation_level(max_value(initial_data(cfg, grid)));
    const auto final_metrics = [&](double n_level) {
        ExperimentConfig c = cfg;
        c.model.trunc = {TruncationMode::fixed, n_level};
        c.stepping.scheme = SchemeVariant::truncated;
        const RunArtifacts a = run_simulation(c);
        require_success(a, fmt::format("run with N={:g}", n_level));
        return std::pair{a.result.diagnostics.back().entropy,
                         spatial_variance(a.grid, total_density(a.result.final_state.u))};
    };
    const auto [h1, v1] = final_metrics(level);
    const auto [h2, v2] = final_metrics(2.0 * level);
    return {level, std::abs(h2 - h1) / std::max(std::abs(h1), 1e-300),
            std::abs(v2 - v1) / std::max(std::abs(v1), 1e-300)};
}

} // namespace btb

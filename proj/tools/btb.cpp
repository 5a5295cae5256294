// btb: command-line driver.
// Exit codes: 0 success, 1 validation failure (bad input or failed verify), 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "btb/btb.hpp"

namespace {

namespace fs = std::filesystem;

void print_report(const btb::SweepReport& r) {
    fmt::print("{}", r.to_csv());
    for (const auto& [name, ok] : r.verdicts) fmt::print("{}: {}\n", name, ok ? "yes" : "no");
}

void save_report(const btb::SweepReport& r, const fs::path& dir, const std::string& stem) {
    btb::write_text(dir / (stem + ".json"), r.to_json().dump(2) + "\n");
    btb::write_text(dir / (stem + ".csv"), r.to_csv());
}

int cmd_run(const std::string& path) {
    const auto cfg = btb::load_config(path);
    const auto a = btb::run_simulation(cfg);
    const auto files = btb::write_outputs(a, cfg.output_dir);
    const auto& last = a.result.diagnostics.back();
    fmt::print("scheme {}, beta {:g}, {} steps, final time {:g}\n", btb::to_string(a.model.stepping.scheme),
               a.model.params.beta, last.step, last.time);
    fmt::print("entropy {:.10g}, min density {:.3g}, mass drift {:.3g}\n", last.entropy, last.min_density,
               btb::relative_mass_drift(a.result));
    if (a.result.tau_halvings > 0) fmt::print("steps retried with tau/2: {}\n", a.result.tau_halvings);
    if (a.result.tau_bound_warnings > 0) {
        fmt::print(stderr, "warning: tau >= sigma/|v|^2 on {} steps\n", a.result.tau_bound_warnings);
    }
    fmt::print("wrote {} files to {}\n", files.size(), cfg.output_dir);
    if (a.result.failed) {
        fmt::print(stderr, "numerical failure: {}\n", a.result.failure);
        return 2;
    }
    return 0;
}

int cmd_sweep_eps(const std::string& path) {
    const auto cfg = btb::load_config(path);
    const auto report = btb::localization_sweep(cfg);
    save_report(report, cfg.output_dir, "sweep_eps");
    print_report(report);
    return 0;
}

int cmd_sweep_beta(const std::string& path) {
    auto cfg = btb::load_config(path);
    if (cfg.beta_list.empty()) cfg.beta_list = {cfg.model.beta};
    std::vector<btb::RunArtifacts> runs;
    const auto report = btb::beta_sweep(cfg, &runs);
    for (const auto& run : runs) btb::write_outputs(run, cfg.output_dir);
    save_report(report, cfg.output_dir, "sweep_beta");
    print_report(report);
    return 0;
}

int cmd_verify(const std::string& path, const std::string& json_out, bool inject) {
    std::optional<btb::ExperimentConfig> cfg;
    if (!path.empty()) cfg = btb::load_config(path);
    const auto report = btb::verify(cfg, btb::VerifyOptions{inject});
    for (const auto& c : report.checks) {
        fmt::print("{:<4} {}.{}: measured {:.3e}, tolerance {:.3e}\n", c.passed ? "ok" : "FAIL", c.suite, c.name,
                   c.measured, c.tolerance);
    }
    if (!json_out.empty()) btb::write_text(json_out, report.to_json().dump(2) + "\n");
    return report.passed() ? 0 : 1;
}

int cmd_reproduce(const std::string& out_dir) {
    const auto fig = btb::reproduce_figure(out_dir);
    print_report(fig.sweep);
    save_report(fig.sweep, out_dir, "summary");
    fmt::print("wrote {} files to {}\n", fig.files.size(), out_dir);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal Busenberg-Travis cross-diffusion simulator"};
    app.require_subcommand(1);

    std::string cfg_path;
    std::string out_dir = "figure_out";
    std::string json_out;
    bool inject = false;

    auto* run = app.add_subcommand("run", "run one simulation and write diagnostics and snapshots");
    run->add_option("config", cfg_path, "config file")->required();
    auto* eps = app.add_subcommand("sweep-eps", "localization sweep over eps_list");
    eps->add_option("config", cfg_path, "config file")->required();
    auto* beta = app.add_subcommand("sweep-beta", "compare decay over beta_list");
    beta->add_option("config", cfg_path, "config file")->required();
    auto* ver = app.add_subcommand("verify", "run the operator, truncation and entropy checks");
    ver->add_option("config", cfg_path, "config for the short entropy run");
    ver->add_option("--json", json_out, "write the report as JSON");
    ver->add_flag("--inject-asymmetric-laplacian", inject, "negative control: the symmetry checks must fail")
        ->group("");
    auto* fig = app.add_subcommand("reproduce-figure", "beta in {0.5, 1.5, 2.5}: 9 snapshots plus diagnostics");
    fig->add_option("out_dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(cfg_path);
        if (*eps) return cmd_sweep_eps(cfg_path);
        if (*beta) return cmd_sweep_beta(cfg_path);
        if (*ver) return cmd_verify(cfg_path, json_out, inject);
        if (*fig) return cmd_reproduce(out_dir);
    } catch (const btb::ValidationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const btb::NumericalError& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}

#pragma once

// Experiment configuration: plain `key = value` text with [grid], [model],
// [stepping] and [experiment] sections. `#` starts a comment. Unknown keys are
// rejected.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "btb/errors.hpp"
#include "btb/grid.hpp"
#include "btb/pressure.hpp"
#include "btb/time_integrator.hpp"

namespace btb {

enum class ExperimentKind { run, sweep_eps, sweep_beta, verify, reproduce_figure };
enum class InitialKind { section7, bumps, constant };
enum class TruncationMode { off, automatic, fixed };

struct TruncationSetting {
    TruncationMode mode = TruncationMode::automatic;
    double level = 0.0;

    bool operator==(const TruncationSetting&) const = default;
};

/// Model parameters as written in a config; `auto` choices are resolved per run.
struct ModelConfig {
    int n = 3;
    double beta = 1.5;
    std::vector<double> sigma{0.1, 0.1, 0.1};
    Eigen::MatrixXd a = (Eigen::MatrixXd(3, 3) << 5, 1, 1, 1, 1, 0.5, 1, 0.5, 0.5).finished();
    double eps = 0.001;
    std::optional<double> eta; // nullopt: auto
    TruncationSetting trunc;

    bool operator==(const ModelConfig& o) const {
        return n == o.n && beta == o.beta && sigma == o.sigma && a.rows() == o.a.rows() && a.cols() == o.a.cols() &&
               a == o.a && eps == o.eps && eta == o.eta && trunc == o.trunc;
    }
};

struct SteppingConfig {
    double tau = 4e-5;
    double picard_tol = 1e-10;
    int picard_max = 50;
    ConvectionScheme convection = ConvectionScheme::upwind;
    std::optional<SchemeVariant> scheme; // nullopt: select from beta and d

    bool operator==(const SteppingConfig&) const = default;
};

struct ExperimentConfig {
    GridSpec grid;
    ModelConfig model;
    SteppingConfig stepping;
    ExperimentKind experiment = ExperimentKind::run;
    double t_end = 1e-2;
    std::vector<int> snapshot_steps{15, 50, 250};
    std::string output_dir = "out";
    InitialKind initial = InitialKind::section7;
    double initial_value = 1.0;
    std::vector<double> eps_list;
    std::vector<double> beta_list;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Eta used by the regularized schemes when the config says `auto`: 1e-6 h^4.
inline double default_eta(const Grid& grid) {
    double h = grid.spacing(0);
    if (grid.dimension() == 2) h = std::min(h, grid.spacing(1));
    return 1e-6 * h * h * h * h;
}

/// Truncation level used when the config says `auto`: 10 (1 + max u0).
inline double default_truncation_level(double max_initial) { return 10.0 * (1.0 + max_initial); }

/// Model parameters with `auto` eta read as 0 and only a fixed truncation level applied.
inline ModelParams to_params(const ModelConfig& m) {
    ModelParams p;
    p.n = m.n;
    p.beta = m.beta;
    p.sigma = m.sigma;
    p.a = m.a;
    p.eps = m.eps;
    p.eta = m.eta.value_or(0.0);
    if (m.trunc.mode == TruncationMode::fixed) p.trunc_N = m.trunc.level;
    return p;
}

struct ResolvedModel {
    ModelParams params;
    TimeStepConfig stepping;
};

/// Turns `auto` choices into concrete values for one run.
inline ResolvedModel resolve(const ExperimentConfig& cfg, const Grid& grid, double max_initial) {
    ResolvedModel out;
    const auto& m = cfg.model;
    const SchemeVariant variant = cfg.stepping.scheme ? *cfg.stepping.scheme : select_scheme(m.beta, grid.dimension());
    out.params = to_params(m);
    if (!m.eta && variant != SchemeVariant::plain) out.params.eta = default_eta(grid);
    if (m.trunc.mode == TruncationMode::automatic && variant == SchemeVariant::truncated) {
        out.params.trunc_N = default_truncation_level(max_initial);
    }
    if (variant == SchemeVariant::truncated && !out.params.trunc_N) {
        throw ValidationError("scheme 'truncated' needs trunc_N = auto or a level");
    }
    out.stepping.tau = cfg.stepping.tau;
    out.stepping.picard_tol = cfg.stepping.picard_tol;
    out.stepping.picard_max = cfg.stepping.picard_max;
    out.stepping.convection = cfg.stepping.convection;
    out.stepping.scheme = variant;
    validate(out.params);
    validate(out.stepping);
    return out;
}

inline const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::run: return "run";
    case ExperimentKind::sweep_eps: return "sweep_eps";
    case ExperimentKind::sweep_beta: return "sweep_beta";
    case ExperimentKind::verify: return "verify";
    case ExperimentKind::reproduce_figure: return "reproduce_figure";
    }
    return "?";
}

inline const char* to_string(InitialKind k) {
    switch (k) {
    case InitialKind::section7: return "section7";
    case InitialKind::bumps: return "bumps";
    case InitialKind::constant: return "constant";
    }
    return "?";
}

/// Checks everything that can be checked without initial data.
inline void validate(const ExperimentConfig& cfg) {
    const Grid grid(cfg.grid);
    const auto& m = cfg.model;
    validate(to_params(m));
    if (!(cfg.t_end > 0.0)) throw ValidationError("t_end must be positive");
    for (int s : cfg.snapshot_steps) {
        if (s < 0) throw ValidationError("snapshot steps must be nonnegative");
    }
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] > 0.0)) throw ValidationError("eps_list entries must be positive");
        if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) {
            throw ValidationError("eps_list must be strictly decreasing");
        }
    }
    for (double b : cfg.beta_list) {
        if (!(b > 0.0)) throw ValidationError("beta_list entries must be positive");
    }
    if (cfg.initial == InitialKind::section7 && (grid.dimension() != 2 || m.n != 3)) {
        throw ValidationError("initial = section7 needs a 2D grid and n = 3");
    }
    if (cfg.initial == InitialKind::constant && !(cfg.initial_value >= 0.0)) {
        throw ValidationError("initial_value must be nonnegative");
    }
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct ParseContext {
    int line = 0;
    std::string key;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("config line " + std::to_string(line) + ", key '" + key + "': " + msg);
    }
};

inline double parse_double(const std::string& tok, const ParseContext& ctx) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) ctx.fail("not a number: '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        ctx.fail("not a number: '" + tok + "'");
    }
}

inline int parse_int(const std::string& tok, const ParseContext& ctx) {
    try {
        std::size_t used = 0;
        const long v = std::stol(tok, &used);
        if (used != tok.size()) ctx.fail("not an integer: '" + tok + "'");
        return static_cast<int>(v);
    } catch (const std::logic_error&) {
        ctx.fail("not an integer: '" + tok + "'");
    }
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

inline std::vector<double> parse_doubles(const std::string& v, const ParseContext& ctx) {
    std::vector<double> out;
    for (const auto& t : split_ws(v)) out.push_back(parse_double(t, ctx));
    return out;
}

inline std::vector<int> parse_ints(const std::string& v, const ParseContext& ctx) {
    std::vector<int> out;
    for (const auto& t : split_ws(v)) out.push_back(parse_int(t, ctx));
    return out;
}

inline Eigen::MatrixXd parse_matrix(const std::string& v, const ParseContext& ctx) {
    std::vector<std::vector<double>> rows;
    std::stringstream in(v);
    for (std::string row; std::getline(in, row, ';');) rows.push_back(parse_doubles(row, ctx));
    if (rows.empty() || rows.front().empty()) ctx.fail("empty matrix");
    const auto cols = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) ctx.fail("matrix rows have different lengths");
        for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

inline std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f, const char* sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += f(xs[i]);
    }
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    using detail::ParseContext;
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string section;
    ParseContext ctx;
    for (std::string raw; std::getline(in, raw);) {
        ++ctx.line;
        ctx.key.clear();
        std::string line = raw.substr(0, raw.find('#'));
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "grid" && section != "model" && section != "stepping" && section != "experiment") {
                ctx.key = section;
                ctx.fail("unknown section");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) ctx.fail("expected 'key = value'");
        ctx.key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty()) ctx.fail("key outside of a section");
        const std::string& k = ctx.key;

        if (section == "grid") {
            if (k == "dimension") cfg.grid.dimension = detail::parse_int(value, ctx);
            else if (k == "origin") cfg.grid.origin = detail::parse_doubles(value, ctx);
            else if (k == "extent") cfg.grid.extent = detail::parse_doubles(value, ctx);
            else if (k == "cells") cfg.grid.cells_per_axis = detail::parse_ints(value, ctx);
            else ctx.fail("unknown key in [grid]");
        } else if (section == "model") {
            auto& m = cfg.model;
            if (k == "n") m.n = detail::parse_int(value, ctx);
            else if (k == "beta") m.beta = detail::parse_double(value, ctx);
            else if (k == "sigma") m.sigma = detail::parse_doubles(value, ctx);
            else if (k == "a") m.a = detail::parse_matrix(value, ctx);
            else if (k == "eps") m.eps = detail::parse_double(value, ctx);
            else if (k == "eta") {
                if (value == "auto") m.eta.reset();
                else m.eta = detail::parse_double(value, ctx);
            } else if (k == "trunc_N") {
                if (value == "off") m.trunc = {TruncationMode::off, 0.0};
                else if (value == "auto") m.trunc = {TruncationMode::automatic, 0.0};
                else m.trunc = {TruncationMode::fixed, detail::parse_double(value, ctx)};
            } else ctx.fail("unknown key in [model]");
        } else if (section == "stepping") {
            auto& s = cfg.stepping;
            if (k == "tau") s.tau = detail::parse_double(value, ctx);
            else if (k == "picard_tol") s.picard_tol = detail::parse_double(value, ctx);
            else if (k == "picard_max") s.picard_max = detail::parse_int(value, ctx);
            else if (k == "convection") {
                if (value == "upwind") s.convection = ConvectionScheme::upwind;
                else if (value == "central") s.convection = ConvectionScheme::central;
                else ctx.fail("expected upwind or central");
            } else if (k == "scheme") {
                if (value == "auto") s.scheme.reset();
                else if (value == "plain") s.scheme = SchemeVariant::plain;
                else if (value == "eta_regularized") s.scheme = SchemeVariant::eta_regularized;
                else if (value == "truncated") s.scheme = SchemeVariant::truncated;
                else ctx.fail("expected auto, plain, eta_regularized or truncated");
            } else ctx.fail("unknown key in [stepping]");
        } else {
            if (k == "experiment") {
                if (value == "run") cfg.experiment = ExperimentKind::run;
                else if (value == "sweep_eps") cfg.experiment = ExperimentKind::sweep_eps;
                else if (value == "sweep_beta") cfg.experiment = ExperimentKind::sweep_beta;
                else if (value == "verify") cfg.experiment = ExperimentKind::verify;
                else if (value == "reproduce_figure") cfg.experiment = ExperimentKind::reproduce_figure;
                else ctx.fail("unknown experiment kind");
            } else if (k == "t_end") cfg.t_end = detail::parse_double(value, ctx);
            else if (k == "snapshot_steps") cfg.snapshot_steps = detail::parse_ints(value, ctx);
            else if (k == "output_dir") cfg.output_dir = value;
            else if (k == "initial") {
                if (value == "section7") cfg.initial = InitialKind::section7;
                else if (value == "bumps") cfg.initial = InitialKind::bumps;
                else if (value == "constant") cfg.initial = InitialKind::constant;
                else ctx.fail("expected section7, bumps or constant");
            } else if (k == "initial_value") cfg.initial_value = detail::parse_double(value, ctx);
            else if (k == "eps_list") cfg.eps_list = detail::parse_doubles(value, ctx);
            else if (k == "beta_list") cfg.beta_list = detail::parse_doubles(value, ctx);
            else ctx.fail("unknown key in [experiment]");
        }
    }
    validate(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline std::string write_config(const ExperimentConfig& cfg) {
    using detail::fmt_double;
    using detail::join;
    const auto dbl = [](double v) { return fmt_double(v); };
    const auto num = [](int v) { return std::to_string(v); };
    std::string out;
    out += "[grid]\n";
    out += "dimension = " + std::to_string(cfg.grid.dimension) + "\n";
    out += "origin = " + join(cfg.grid.origin, dbl) + "\n";
    out += "extent = " + join(cfg.grid.extent, dbl) + "\n";
    out += "cells = " + join(cfg.grid.cells_per_axis, num) + "\n";

    const auto& m = cfg.model;
    out += "\n[model]\n";
    out += "n = " + std::to_string(m.n) + "\n";
    out += "beta = " + fmt_double(m.beta) + "\n";
    out += "sigma = " + join(m.sigma, dbl) + "\n";
    std::string rows;
    for (Eigen::Index i = 0; i < m.a.rows(); ++i) {
        if (i) rows += "; ";
        for (Eigen::Index j = 0; j < m.a.cols(); ++j) {
            if (j) rows += " ";
            rows += fmt_double(m.a(i, j));
        }
    }
    out += "a = " + rows + "\n";
    out += "eps = " + fmt_double(m.eps) + "\n";
    out += "eta = " + (m.eta ? fmt_double(*m.eta) : std::string("auto")) + "\n";
    switch (m.trunc.mode) {
    case TruncationMode::off: out += "trunc_N = off\n"; break;
    case TruncationMode::automatic: out += "trunc_N = auto\n"; break;
    case TruncationMode::fixed: out += "trunc_N = " + fmt_double(m.trunc.level) + "\n"; break;
    }

    const auto& s = cfg.stepping;
    out += "\n[stepping]\n";
    out += "tau = " + fmt_double(s.tau) + "\n";
    out += "picard_tol = " + fmt_double(s.picard_tol) + "\n";
    out += "picard_max = " + std::to_string(s.picard_max) + "\n";
    out += std::string("convection = ") + to_string(s.convection) + "\n";
    out += std::string("scheme = ") + (s.scheme ? to_string(*s.scheme) : "auto") + "\n";

    out += "\n[experiment]\n";
    out += std::string("experiment = ") + to_string(cfg.experiment) + "\n";
    out += "t_end = " + fmt_double(cfg.t_end) + "\n";
    out += "snapshot_steps = " + join(cfg.snapshot_steps, num) + "\n";
    out += "output_dir = " + cfg.output_dir + "\n";
    out += std::string("initial = ") + to_string(cfg.initial) + "\n";
    out += "initial_value = " + fmt_double(cfg.initial_value) + "\n";
    if (!cfg.eps_list.empty()) out += "eps_list = " + join(cfg.eps_list, dbl) + "\n";
    if (!cfg.beta_list.empty()) out += "beta_list = " + join(cfg.beta_list, dbl) + "\n";
    return out;
}

/// The simulation setup of the reference experiment: unit square, 20x20 cells,
/// three species, sigma = 0.1, eps = 0.001, tau = 4e-5, 250 steps.
inline ExperimentConfig section7_config(double beta = 1.5) {
    ExperimentConfig cfg;
    cfg.grid = GridSpec{2, {0.0, 0.0}, {1.0, 1.0}, {20, 20}};
    cfg.model.beta = beta;
    cfg.experiment = ExperimentKind::run;
    cfg.t_end = 1e-2;
    cfg.snapshot_steps = {15, 50, 250};
    cfg.initial = InitialKind::section7;
    return cfg;
}

} // namespace btb

#pragma once

// CSV writers. Numbers carry 17 significant digits so files are lossless and
// byte-identical for identical runs.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "btb/entropy.hpp"
#include "btb/errors.hpp"
#include "btb/grid.hpp"

namespace btb {

inline std::string format_number(double v) { return fmt::format("{:.17g}", v); }

inline std::string diagnostics_header(int n) {
    std::string h = "step,time";
    for (int i = 1; i <= n; ++i) h += fmt::format(",mass_{}", i);
    h += ",entropy,diff_dissipation,nonlocal_dissipation,entropy_residual,min_density,max_velocity_inf";
    return h;
}

inline std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records, int n) {
    std::string out = diagnostics_header(n) + "\n";
    for (const auto& r : records) {
        out += std::to_string(r.step) + "," + format_number(r.time);
        for (double m : r.mass) out += "," + format_number(m);
        for (double v : {r.entropy, r.diff_dissipation, r.nonlocal_dissipation, r.entropy_residual, r.min_density,
                         r.max_velocity_inf}) {
            out += "," + format_number(v);
        }
        out += "\n";
    }
    return out;
}

/// One row per cell, x outer and y inner. 1D grids write y = 0.
inline std::string snapshot_csv(const Grid& grid, const std::vector<ScalarField>& u) {
    std::string out = "x,y";
    for (std::size_t i = 1; i <= u.size(); ++i) out += fmt::format(",u_{}", i);
    out += ",u_sum\n";
    for (int ix = 0; ix < grid.cells(0); ++ix) {
        for (int iy = 0; iy < grid.cells(1); ++iy) {
            const Eigen::Index c = grid.index(ix, iy);
            out += format_number(grid.center(c, 0)) + "," +
                   format_number(grid.dimension() == 2 ? grid.center(c, 1) : 0.0);
            double sum = 0.0;
            for (const auto& ui : u) {
                out += "," + format_number(ui[c]);
                sum += ui[c];
            }
            out += "," + format_number(sum) + "\n";
        }
    }
    return out;
}

inline std::string snapshot_filename(double beta, int step) { return fmt::format("snap_beta{:g}_step{}.csv", beta, step); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

} // namespace btb

#pragma once

#include <cmath>
#include <vector>

#include "btb/config.hpp"
#include "btb/errors.hpp"
#include "btb/grid.hpp"

namespace btb {

/// u_i(x) = exp(-100 |x - c_i|^2) + 0.5 with c_i = (0.25 i, ..., 0.25 i), i = 1..n, in any dimension.
inline std::vector<ScalarField> gaussian_bumps(const Grid& grid, int n) {
    std::vector<ScalarField> u;
    for (int i = 1; i <= n; ++i) {
        const double c = 0.25 * i;
        const bool two_d = grid.dimension() == 2;
        u.push_back(sample(grid, [=](double x, double y) {
            double r2 = (x - c) * (x - c);
            if (two_d) r2 += (y - c) * (y - c);
            return std::exp(-100.0 * r2) + 0.5;
        }));
    }
    return u;
}

/// Three Gaussian bumps on the unit square centered at (0.25 i, 0.25 i) over a 0.5 background.
inline std::vector<ScalarField> section7_initial_data(const Grid& grid, int n = 3) {
    if (grid.dimension() != 2) throw ValidationError("section7 initial data is defined on a 2D grid");
    if (n != 3) throw ValidationError("section7 initial data has three species");
    return gaussian_bumps(grid, n);
}

inline std::vector<ScalarField> initial_data(const ExperimentConfig& cfg, const Grid& grid) {
    switch (cfg.initial) {
    case InitialKind::section7: return section7_initial_data(grid, cfg.model.n);
    case InitialKind::bumps: return gaussian_bumps(grid, cfg.model.n);
    case InitialKind::constant:
        return std::vector<ScalarField>(static_cast<std::size_t>(cfg.model.n),
                                        ScalarField::Constant(grid.cell_count(), cfg.initial_value));
    }
    throw ValidationError("unknown initial data kind");
}

inline double max_value(const std::vector<ScalarField>& u) {
    double m = 0.0;
    for (const auto& ui : u) m = std::max(m, ui.maxCoeff());
    return m;
}

} // namespace btb

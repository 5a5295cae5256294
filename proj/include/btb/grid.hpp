#pragma once

// Uniform cell-centered finite-volume grid on a rectangle (d = 1 or 2) and the
// discrete calculus used throughout: no-flux (Neumann) operators for densities
// and zero-boundary-value (Dirichlet) operators for velocities.
//
// Cells are numbered with x fastest: cell = ix + nx * iy. Faces normal to axis 0
// are numbered fx + (nx + 1) * iy, faces normal to axis 1 ix + nx * fy.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "btb/errors.hpp"

namespace btb {

using ScalarField = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct GridSpec {
    int dimension = 2;
    std::vector<double> origin{0.0, 0.0};
    std::vector<double> extent{1.0, 1.0};
    std::vector<int> cells_per_axis{20, 20};

    bool operator==(const GridSpec&) const = default;
};

/// One cell-centered array per spatial axis.
struct VectorField {
    std::vector<Eigen::VectorXd> components;

    double max_norm() const {
        if (components.empty()) return 0.0;
        Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(components.front().size());
        for (const auto& c : components) sq += c.array().square();
        return sq.size() == 0 ? 0.0 : std::sqrt(sq.maxCoeff());
    }
};

/// Per-axis arrays of face values; axis k holds every face normal to e_k,
/// boundary faces included.
struct FaceFluxField {
    std::vector<Eigen::VectorXd> axis;
};

class Grid {
public:
    explicit Grid(GridSpec spec) : spec_(std::move(spec)) {
        const int d = spec_.dimension;
        if (d != 1 && d != 2) {
            throw ValidationError("grid dimension must be 1 or 2, got " + std::to_string(d));
        }
        if (static_cast<int>(spec_.origin.size()) != d || static_cast<int>(spec_.extent.size()) != d ||
            static_cast<int>(spec_.cells_per_axis.size()) != d) {
            throw ValidationError("grid origin, extent and cells_per_axis need one entry per axis");
        }
        for (int k = 0; k < d; ++k) {
            if (!(spec_.extent[k] > 0.0) || !std::isfinite(spec_.extent[k])) {
                throw ValidationError("grid extent must be positive on axis " + std::to_string(k));
            }
            if (spec_.cells_per_axis[k] <= 0) {
                throw ValidationError("grid cell count must be positive on axis " + std::to_string(k));
            }
        }
        n_ = {spec_.cells_per_axis[0], d == 2 ? spec_.cells_per_axis[1] : 1};
        h_ = {spec_.extent[0] / n_[0], d == 2 ? spec_.extent[1] / n_[1] : 1.0};
        volume_ = h_[0] * (d == 2 ? h_[1] : 1.0);
    }

    const GridSpec& spec() const noexcept { return spec_; }
    int dimension() const noexcept { return spec_.dimension; }
    int cells(int axis) const noexcept { return n_[axis]; }
    double spacing(int axis) const noexcept { return h_[axis]; }
    Eigen::Index cell_count() const noexcept { return static_cast<Eigen::Index>(n_[0]) * n_[1]; }
    double cell_volume() const noexcept { return volume_; }
    double domain_measure() const noexcept { return volume_ * static_cast<double>(cell_count()); }

    Eigen::Index index(int ix, int iy = 0) const noexcept {
        return static_cast<Eigen::Index>(ix) + static_cast<Eigen::Index>(n_[0]) * iy;
    }
    std::array<int, 2> coords(Eigen::Index cell) const noexcept {
        return {static_cast<int>(cell % n_[0]), static_cast<int>(cell / n_[0])};
    }
    double center(Eigen::Index cell, int axis) const noexcept {
        const auto ij = coords(cell);
        return spec_.origin[axis] + (ij[axis] + 0.5) * h_[axis];
    }

    /// Distance between neighbouring cell indices along an axis.
    Eigen::Index stride(int axis) const noexcept { return axis == 0 ? 1 : n_[0]; }

    Eigen::Index face_count(int axis) const noexcept {
        return axis == 0 ? static_cast<Eigen::Index>(n_[0] + 1) * n_[1]
                         : static_cast<Eigen::Index>(n_[0]) * (n_[1] + 1);
    }
    /// Face normal to `axis` lying on the low side of cell (ix, iy) shifted by `offset` (0 or 1).
    Eigen::Index face_index(int axis, int ix, int iy, int offset) const noexcept {
        return axis == 0 ? static_cast<Eigen::Index>(ix + offset) + static_cast<Eigen::Index>(n_[0] + 1) * iy
                         : static_cast<Eigen::Index>(ix) + static_cast<Eigen::Index>(n_[0]) * (iy + offset);
    }

    /// Calls fn(face, left_cell, right_cell) for every interior face normal to `axis`.
    template <class Fn>
    void for_each_interior_face(int axis, Fn&& fn) const {
        for (int iy = 0; iy < n_[1]; ++iy) {
            for (int ix = 0; ix < n_[0]; ++ix) {
                const int along = axis == 0 ? ix : iy;
                if (along + 1 >= n_[axis]) continue;
                const Eigen::Index left = index(ix, iy);
                fn(face_index(axis, ix, iy, 1), left, left + stride(axis));
            }
        }
    }

    /// Calls fn(face, cell) for every boundary face normal to `axis`.
    template <class Fn>
    void for_each_boundary_face(int axis, Fn&& fn) const {
        for (int iy = 0; iy < n_[1]; ++iy) {
            for (int ix = 0; ix < n_[0]; ++ix) {
                const int along = axis == 0 ? ix : iy;
                if (along == 0) fn(face_index(axis, ix, iy, 0), index(ix, iy));
                if (along == n_[axis] - 1) fn(face_index(axis, ix, iy, 1), index(ix, iy));
            }
        }
    }

    ScalarField zeros() const { return ScalarField::Zero(cell_count()); }
    VectorField zero_vector() const {
        return VectorField{std::vector<Eigen::VectorXd>(dimension(), Eigen::VectorXd::Zero(cell_count()))};
    }
    FaceFluxField zero_faces() const {
        FaceFluxField f;
        for (int k = 0; k < dimension(); ++k) f.axis.push_back(Eigen::VectorXd::Zero(face_count(k)));
        return f;
    }

private:
    GridSpec spec_;
    std::array<int, 2> n_{};
    std::array<double, 2> h_{};
    double volume_ = 0.0;
};

inline Grid make_grid(const GridSpec& spec) { return Grid(spec); }

/// Evaluates f at every cell center.
template <class Fn>
ScalarField sample(const Grid& grid, Fn&& f) {
    ScalarField out(grid.cell_count());
    for (Eigen::Index c = 0; c < grid.cell_count(); ++c) {
        const double x = grid.center(c, 0);
        const double y = grid.dimension() == 2 ? grid.center(c, 1) : 0.0;
        out[c] = f(x, y);
    }
    return out;
}

/// Discrete integral over the domain.
inline double integrate(const Grid& grid, const ScalarField& f) { return grid.cell_volume() * f.sum(); }

/// L2 inner product of two cell fields.
inline double inner(const Grid& grid, const ScalarField& a, const ScalarField& b) {
    return grid.cell_volume() * a.dot(b);
}

inline double inner(const Grid& grid, const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.components.size(); ++k) s += inner(grid, a.components[k], b.components[k]);
    return s;
}

inline double l2_norm(const Grid& grid, const ScalarField& f) { return std::sqrt(inner(grid, f, f)); }

/// Face gradient of a no-flux quantity: (f_right - f_left) / h on interior faces, zero on the boundary.
inline FaceFluxField gradient_at_faces(const Grid& grid, const ScalarField& f) {
    FaceFluxField out = grid.zero_faces();
    for (int k = 0; k < grid.dimension(); ++k) {
        const double inv_h = 1.0 / grid.spacing(k);
        auto& faces = out.axis[k];
        grid.for_each_interior_face(k, [&](Eigen::Index face, Eigen::Index l, Eigen::Index r) {
            faces[face] = (f[r] - f[l]) * inv_h;
        });
    }
    return out;
}

/// Conservative divergence: per cell, sum over axes of (F_high - F_low) / h.
inline ScalarField divergence_of_fluxes(const Grid& grid, const FaceFluxField& flux) {
    ScalarField out = grid.zeros();
    for (int k = 0; k < grid.dimension(); ++k) {
        const double inv_h = 1.0 / grid.spacing(k);
        const auto& faces = flux.axis[k];
        for (int iy = 0; iy < grid.cells(1); ++iy) {
            for (int ix = 0; ix < grid.cells(0); ++ix) {
                out[grid.index(ix, iy)] +=
                    (faces[grid.face_index(k, ix, iy, 1)] - faces[grid.face_index(k, ix, iy, 0)]) * inv_h;
            }
        }
    }
    return out;
}

/// Cell-centered gradient by central differences, with a mirrored ghost value
/// (f_ghost = f_cell) at the boundary. This is the exact adjoint of face
/// averaging: sum_faces avg(v) * grad_face(f) = sum_cells v . cell_gradient(f).
inline VectorField cell_gradient(const Grid& grid, const ScalarField& f) {
    VectorField out = grid.zero_vector();
    for (int k = 0; k < grid.dimension(); ++k) {
        const double inv_2h = 0.5 / grid.spacing(k);
        const Eigen::Index s = grid.stride(k);
        auto& g = out.components[k];
        for (Eigen::Index c = 0; c < grid.cell_count(); ++c) {
            const int along = grid.coords(c)[k];
            const double lo = along > 0 ? f[c - s] : f[c];
            const double hi = along + 1 < grid.cells(k) ? f[c + s] : f[c];
            g[c] = (hi - lo) * inv_2h;
        }
    }
    return out;
}

/// Arithmetic face average of the normal velocity component; boundary faces stay zero.
inline FaceFluxField face_average(const Grid& grid, const VectorField& v) {
    FaceFluxField out = grid.zero_faces();
    for (int k = 0; k < grid.dimension(); ++k) {
        const auto& vk = v.components[k];
        auto& faces = out.axis[k];
        grid.for_each_interior_face(k, [&](Eigen::Index face, Eigen::Index l, Eigen::Index r) {
            faces[face] = 0.5 * (vk[l] + vk[r]);
        });
    }
    return out;
}

namespace detail {

inline SparseMatrix assemble_laplacian(const Grid& grid, bool dirichlet) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(grid.cell_count()) * (2 * grid.dimension() + 1));
    std::vector<double> diag(static_cast<std::size_t>(grid.cell_count()), 0.0);
    for (int k = 0; k < grid.dimension(); ++k) {
        const double w = 1.0 / (grid.spacing(k) * grid.spacing(k));
        grid.for_each_interior_face(k, [&](Eigen::Index, Eigen::Index l, Eigen::Index r) {
            triplets.emplace_back(l, r, w);
            triplets.emplace_back(r, l, w);
            diag[l] -= w;
            diag[r] -= w;
        });
        if (dirichlet) {
            // ghost value -u_c puts the zero on the boundary face
            grid.for_each_boundary_face(k, [&](Eigen::Index, Eigen::Index c) { diag[c] -= 2.0 * w; });
        }
    }
    for (Eigen::Index c = 0; c < grid.cell_count(); ++c) triplets.emplace_back(c, c, diag[c]);
    SparseMatrix m(grid.cell_count(), grid.cell_count());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

} // namespace detail

/// 3-/5-point Laplacian with zero-flux closure. Symmetric negative semidefinite, kernel = constants.
inline SparseMatrix neumann_laplacian(const Grid& grid) { return detail::assemble_laplacian(grid, false); }

/// 3-/5-point Laplacian with zero boundary values (ghost = -u). Symmetric negative definite.
inline SparseMatrix dirichlet_laplacian(const Grid& grid) { return detail::assemble_laplacian(grid, true); }

/// Discrete Dirichlet energy sum |grad v|^2 dx of one component, consistent with
/// -<dirichlet_laplacian(v), v>: boundary faces use the half-cell gradient 2 v_c / h
/// weighted by half a cell volume.
inline double dirichlet_gradient_energy(const Grid& grid, const ScalarField& v) {
    double e = 0.0;
    for (int k = 0; k < grid.dimension(); ++k) {
        const double h = grid.spacing(k);
        grid.for_each_interior_face(k, [&](Eigen::Index, Eigen::Index l, Eigen::Index r) {
            const double g = (v[r] - v[l]) / h;
            e += g * g;
        });
        grid.for_each_boundary_face(k, [&](Eigen::Index, Eigen::Index c) {
            const double g = v[c] / (0.5 * h);
            e += 0.5 * g * g;
        });
    }
    return e * grid.cell_volume();
}

/// Spatial variance of a field about its mean, normalized by |Omega|.
inline double spatial_variance(const Grid& grid, const ScalarField& f) {
    const double mean = integrate(grid, f) / grid.domain_measure();
    return integrate(grid, (f.array() - mean).square().matrix()) / grid.domain_measure();
}

} // namespace btb

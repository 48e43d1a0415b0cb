#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <string>

#include "dispersal/errors.hpp"

namespace dispersal {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform cell-centered tensor grid on an interval or rectangle.
///
/// Nodes are cell centers, so the zero-flux (mirror ghost) closure of the
/// Laplacian is symmetric as a plain matrix and the natural quadrature has
/// one uniform weight per cell.
class SpatialGrid {
public:
    static SpatialGrid interval(double length, int cells);
    static SpatialGrid rectangle(double length_x, double length_y, int cells_x,
                                 int cells_y);

    int dimension() const { return dimension_; }
    int cells(int axis) const { return cells_[axis]; }
    double extent(int axis) const { return extent_[axis]; }
    double spacing(int axis) const { return extent_[axis] / cells_[axis]; }
    int node_count() const { return node_count_; }
    double cell_volume() const { return cell_volume_; }
    double volume() const { return cell_volume_ * node_count_; }

    /// Cell-center coordinate of a node along one axis. Nodes are ordered
    /// x-fastest: node = iy * cells(0) + ix.
    double coordinate(int node, int axis) const;

    bool operator==(const SpatialGrid& other) const;
    bool operator!=(const SpatialGrid& other) const { return !(*this == other); }

private:
    SpatialGrid(int dimension, std::array<double, 2> extent,
                std::array<int, 2> cells);

    int dimension_;
    std::array<double, 2> extent_;
    std::array<int, 2> cells_;
    int node_count_;
    double cell_volume_;
};

/// Uniform cell-centered grid on the trait interval [alpha_lo, alpha_hi].
class TraitGrid {
public:
    TraitGrid(double alpha_lo, double alpha_hi, int cells);

    double alpha_lo() const { return alpha_lo_; }
    double alpha_hi() const { return alpha_hi_; }
    int cells() const { return cells_; }
    double spacing() const { return (alpha_hi_ - alpha_lo_) / cells_; }
    double width() const { return alpha_hi_ - alpha_lo_; }
    /// Trait value at cell center i, strictly increasing in i.
    double node(int i) const { return alpha_lo_ + (i + 0.5) * spacing(); }

    bool operator==(const TraitGrid& other) const;
    bool operator!=(const TraitGrid& other) const { return !(*this == other); }

private:
    double alpha_lo_;
    double alpha_hi_;
    int cells_;
};

/// Sparse operator on grid node vectors.
struct LinearOperator {
    SparseMatrix matrix;
    bool symmetric = false;
    std::string tag;

    Vector apply(const Vector& v) const { return matrix * v; }
    int rows() const { return static_cast<int>(matrix.rows()); }
};

/// Function of x sampled at spatial cell centers.
class SpatialField {
public:
    SpatialField(SpatialGrid grid, Vector values);
    /// Constant field.
    SpatialField(SpatialGrid grid, double value);

    const SpatialGrid& grid() const { return grid_; }
    const Vector& values() const { return values_; }
    Vector& values() { return values_; }
    double operator[](int i) const { return values_[i]; }
    int size() const { return static_cast<int>(values_.size()); }

    double min() const { return values_.minCoeff(); }
    double max() const { return values_.maxCoeff(); }
    bool all_finite() const { return values_.allFinite(); }

private:
    SpatialGrid grid_;
    Vector values_;
};

/// Density u(x, alpha) on the product grid, stored x-fastest:
/// flat index = ia * nx + ix.
class StateField {
public:
    StateField(SpatialGrid spatial, TraitGrid trait, Vector values);
    StateField(SpatialGrid spatial, TraitGrid trait, double value);

    const SpatialGrid& spatial_grid() const { return spatial_; }
    const TraitGrid& trait_grid() const { return trait_; }
    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

    double operator()(int ix, int ia) const {
        return values_[static_cast<Eigen::Index>(ia) * spatial_.node_count() + ix];
    }
    double& operator()(int ix, int ia) {
        return values_[static_cast<Eigen::Index>(ia) * spatial_.node_count() + ix];
    }

    int size() const { return static_cast<int>(values_.size()); }
    double min() const { return values_.minCoeff(); }
    double max() const { return values_.maxCoeff(); }
    bool all_finite() const { return values_.allFinite(); }

private:
    SpatialGrid spatial_;
    TraitGrid trait_;
    Vector values_;
};

/// Second-order Laplacian with zero Neumann flux through every boundary face.
/// Symmetric, rows sum to zero, quadratic form of the negation is >= 0.
LinearOperator build_spatial_laplacian(const SpatialGrid& grid);

/// One-dimensional analogue on the trait interval with reflecting ends.
LinearOperator build_trait_laplacian(const TraitGrid& grid);

/// Trait integral of u: uhat(x) = sum_a u(x, a) * da. Exact for integrands
/// linear in the trait variable.
SpatialField integrate_trait(const StateField& u);

/// Trait integral weighted by the trait value: v(x) = sum_a alpha_a u(x, a) da.
SpatialField integrate_trait_weighted(const StateField& u);

/// Cell quadrature over D, second order.
double integrate_spatial(const SpatialField& f);

/// Integral of u over the whole product domain.
double integrate_state(const StateField& u);

/// Discrete Dirichlet energy: integral of |grad phi|^2 under the grid
/// quadrature, evaluated as -cell_volume * phi' * (laplacian * phi).
double dirichlet_energy(const LinearOperator& laplacian, const Vector& phi,
                        double cell_volume);

}  // namespace dispersal

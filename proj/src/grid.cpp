#include "dispersal/grid.hpp"

#include <cmath>
#include <vector>

namespace dispersal {

namespace {

void append_neumann_laplacian_1d(std::vector<Eigen::Triplet<double>>& triplets,
                                 int n, double inv_h2, int stride, int offset) {
    // Cell-centered stencil; the boundary rows carry the zero-flux closure
    // (mirror ghost equals the boundary cell), which keeps the matrix
    // symmetric with zero row sums.
    for (int i = 0; i < n; ++i) {
        const int row = offset + i * stride;
        double diag = 0.0;
        if (i > 0) {
            triplets.emplace_back(row, row - stride, inv_h2);
            diag -= inv_h2;
        }
        if (i < n - 1) {
            triplets.emplace_back(row, row + stride, inv_h2);
            diag -= inv_h2;
        }
        triplets.emplace_back(row, row, diag);
    }
}

}  // namespace

SpatialGrid::SpatialGrid(int dimension, std::array<double, 2> extent,
                         std::array<int, 2> cells)
    : dimension_(dimension), extent_(extent), cells_(cells) {
    for (int axis = 0; axis < dimension_; ++axis) {
        if (cells_[axis] < 8) {
            throw ConfigError("grid.cells: need at least 8 cells per axis, got " +
                              std::to_string(cells_[axis]));
        }
        if (!(extent_[axis] > 0.0)) {
            throw ConfigError("grid.extent: must be positive");
        }
    }
    node_count_ = cells_[0] * (dimension_ == 2 ? cells_[1] : 1);
    cell_volume_ = spacing(0) * (dimension_ == 2 ? spacing(1) : 1.0);
}

SpatialGrid SpatialGrid::interval(double length, int cells) {
    return SpatialGrid(1, {length, 0.0}, {cells, 1});
}

SpatialGrid SpatialGrid::rectangle(double length_x, double length_y,
                                   int cells_x, int cells_y) {
    return SpatialGrid(2, {length_x, length_y}, {cells_x, cells_y});
}

double SpatialGrid::coordinate(int node, int axis) const {
    const int ix = node % cells_[0];
    const int iy = node / cells_[0];
    const int idx = (axis == 0) ? ix : iy;
    return (idx + 0.5) * spacing(axis);
}

bool SpatialGrid::operator==(const SpatialGrid& other) const {
    if (dimension_ != other.dimension_) return false;
    for (int axis = 0; axis < dimension_; ++axis) {
        if (cells_[axis] != other.cells_[axis]) return false;
        if (extent_[axis] != other.extent_[axis]) return false;
    }
    return true;
}

TraitGrid::TraitGrid(double alpha_lo, double alpha_hi, int cells)
    : alpha_lo_(alpha_lo), alpha_hi_(alpha_hi), cells_(cells) {
    if (!(alpha_lo_ > 0.0) || !(alpha_hi_ > alpha_lo_)) {
        throw ConfigError("trait: need 0 < alpha_lo < alpha_hi");
    }
    if (cells_ < 2) {
        throw ConfigError("trait.cells: need at least 2 cells");
    }
}

bool TraitGrid::operator==(const TraitGrid& other) const {
    return alpha_lo_ == other.alpha_lo_ && alpha_hi_ == other.alpha_hi_ &&
           cells_ == other.cells_;
}

SpatialField::SpatialField(SpatialGrid grid, Vector values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.node_count()) {
        throw GridMismatch("SpatialField: value count " +
                           std::to_string(values_.size()) +
                           " does not match grid node count " +
                           std::to_string(grid_.node_count()));
    }
}

SpatialField::SpatialField(SpatialGrid grid, double value)
    : grid_(grid), values_(Vector::Constant(grid.node_count(), value)) {}

StateField::StateField(SpatialGrid spatial, TraitGrid trait, Vector values)
    : spatial_(spatial), trait_(trait), values_(std::move(values)) {
    const Eigen::Index expected =
        static_cast<Eigen::Index>(spatial_.node_count()) * trait_.cells();
    if (values_.size() != expected) {
        throw GridMismatch("StateField: value count does not match product grid");
    }
}

StateField::StateField(SpatialGrid spatial, TraitGrid trait, double value)
    : spatial_(spatial),
      trait_(trait),
      values_(Vector::Constant(
          static_cast<Eigen::Index>(spatial.node_count()) * trait.cells(),
          value)) {}

LinearOperator build_spatial_laplacian(const SpatialGrid& grid) {
    const int n = grid.node_count();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 5);
    if (grid.dimension() == 1) {
        const double inv_h2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
        append_neumann_laplacian_1d(triplets, grid.cells(0), inv_h2, 1, 0);
    } else {
        const int nx = grid.cells(0);
        const int ny = grid.cells(1);
        const double inv_hx2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
        const double inv_hy2 = 1.0 / (grid.spacing(1) * grid.spacing(1));
        for (int iy = 0; iy < ny; ++iy) {
            append_neumann_laplacian_1d(triplets, nx, inv_hx2, 1, iy * nx);
        }
        for (int ix = 0; ix < nx; ++ix) {
            append_neumann_laplacian_1d(triplets, ny, inv_hy2, nx, ix);
        }
    }
    SparseMatrix matrix(n, n);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    matrix.makeCompressed();
    return LinearOperator{std::move(matrix), true, "spatial_laplacian"};
}

LinearOperator build_trait_laplacian(const TraitGrid& grid) {
    const int n = grid.cells();
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 3);
    append_neumann_laplacian_1d(triplets, n, inv_h2, 1, 0);
    SparseMatrix matrix(n, n);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    matrix.makeCompressed();
    return LinearOperator{std::move(matrix), true, "trait_laplacian"};
}

SpatialField integrate_trait(const StateField& u) {
    const int nx = u.spatial_grid().node_count();
    const int na = u.trait_grid().cells();
    const double da = u.trait_grid().spacing();
    Vector uhat = Vector::Zero(nx);
    for (int ia = 0; ia < na; ++ia) {
        uhat += da * u.values().segment(static_cast<Eigen::Index>(ia) * nx, nx);
    }
    return SpatialField(u.spatial_grid(), std::move(uhat));
}

SpatialField integrate_trait_weighted(const StateField& u) {
    const int nx = u.spatial_grid().node_count();
    const int na = u.trait_grid().cells();
    const double da = u.trait_grid().spacing();
    Vector v = Vector::Zero(nx);
    for (int ia = 0; ia < na; ++ia) {
        v += da * u.trait_grid().node(ia) *
             u.values().segment(static_cast<Eigen::Index>(ia) * nx, nx);
    }
    return SpatialField(u.spatial_grid(), std::move(v));
}

double integrate_spatial(const SpatialField& f) {
    return f.grid().cell_volume() * f.values().sum();
}

double integrate_state(const StateField& u) {
    return u.spatial_grid().cell_volume() * u.trait_grid().spacing() *
           u.values().sum();
}

double dirichlet_energy(const LinearOperator& laplacian, const Vector& phi,
                        double cell_volume) {
    return -cell_volume * phi.dot(laplacian.matrix * phi);
}

}  // namespace dispersal

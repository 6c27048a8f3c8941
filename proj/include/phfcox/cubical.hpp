#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "phfcox/diagram.hpp"
#include "phfcox/volume.hpp"

namespace phfcox {

/// Sublevel-filtered cubical complex of a signed-distance volume.
///
/// V-construction: voxels are vertices carrying their SEDT value; every
/// higher cube takes the maximum over its vertices. Cells are addressed on
/// the doubled grid (2n-1 per axis): even coordinates are vertex positions,
/// odd coordinates span the interval between two vertices, and the cell
/// dimension is the number of odd coordinates. Cells touching a +inf vertex
/// are dropped up front; the remaining cells are kept in filtration order
/// (value, then dimension, then x, y, z), which puts every face before its
/// cofaces.
class FilteredCubicalComplex {
 public:
  explicit FilteredCubicalComplex(const SignedDistanceVolume& sdv);

  size_t size() const { return values_.size(); }
  int dim_of(size_t order) const { return dims_[order]; }
  double value_of(size_t order) const { return values_[order]; }

  /// Filtration-order indices of the boundary faces of the cell at `order`.
  /// Writes at most 6 entries; returns the count.
  int boundary(size_t order, int32_t out[6]) const;

  size_t count_cells(int dim) const;

  /// Doubled-grid coordinates of a cell, for tests and debugging.
  std::array<int, 3> cell_coords(size_t order) const;

 private:
  int kx_ = 0, ky_ = 0, kz_ = 0;        // doubled-grid extents
  std::vector<int64_t> cell_of_;        // order -> doubled-grid linear index
  std::vector<double> values_;          // order -> filtration value
  std::vector<int8_t> dims_;            // order -> cell dimension
  std::vector<int32_t> order_of_;       // doubled-grid linear index -> order (-1 if absent)
};

FilteredCubicalComplex build_filtration(const SignedDistanceVolume& sdv);

/// Persistence diagrams of the sublevel filtration in dimensions 0..2, Z/2
/// coefficients, boundary-matrix reduction with the twist/clearing
/// optimization. Essential classes get death = +inf; zero-persistence pairs
/// (birth == death) are dropped.
std::array<PersistenceDiagram, 3> compute_persistence(const FilteredCubicalComplex& cx);

}  // namespace phfcox

#include "phfcox/cubical.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace phfcox {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FilteredCubicalComplex::FilteredCubicalComplex(const SignedDistanceVolume& sdv) {
  const Grid3<double>& g = sdv.values;

  // Crop to the bounding box of finite voxels; +inf cells never enter the
  // filtration, so everything outside is irrelevant.
  int x0 = g.nx, x1 = -1, y0 = g.ny, y1 = -1, z0 = g.nz, z1 = -1;
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x)
        if (g.at(x, y, z) != kInf) {
          x0 = std::min(x0, x); x1 = std::max(x1, x);
          y0 = std::min(y0, y); y1 = std::max(y1, y);
          z0 = std::min(z0, z); z1 = std::max(z1, z);
        }
  if (x1 < 0) throw std::runtime_error("build_filtration: no finite voxel");

  int bx = x1 - x0 + 1, by = y1 - y0 + 1, bz = z1 - z0 + 1;
  kx_ = 2 * bx - 1;
  ky_ = 2 * by - 1;
  kz_ = 2 * bz - 1;
  size_t total = static_cast<size_t>(kx_) * ky_ * kz_;

  // Cell values on the doubled grid. Seed vertices from voxels, then expand
  // one axis at a time: a cell with an odd coordinate is the max of its two
  // neighbours along that axis. max(x, +inf) keeps +inf cells excluded.
  std::vector<double> v(total, kInf);
  auto idx = [this](int a, int b, int c) {
    return (static_cast<size_t>(c) * ky_ + b) * kx_ + a;
  };
  for (int z = 0; z < bz; ++z)
    for (int y = 0; y < by; ++y)
      for (int x = 0; x < bx; ++x)
        v[idx(2 * x, 2 * y, 2 * z)] = g.at(x + x0, y + y0, z + z0);
  for (int c = 0; c < kz_; c += 2)
    for (int b = 0; b < ky_; b += 2)
      for (int a = 1; a < kx_; a += 2)
        v[idx(a, b, c)] = std::max(v[idx(a - 1, b, c)], v[idx(a + 1, b, c)]);
  for (int c = 0; c < kz_; c += 2)
    for (int b = 1; b < ky_; b += 2)
      for (int a = 0; a < kx_; ++a)
        v[idx(a, b, c)] = std::max(v[idx(a, b - 1, c)], v[idx(a, b + 1, c)]);
  for (int c = 1; c < kz_; c += 2)
    for (int b = 0; b < ky_; ++b)
      for (int a = 0; a < kx_; ++a)
        v[idx(a, b, c)] = std::max(v[idx(a, b, c - 1)], v[idx(a, b, c + 1)]);

  std::vector<int64_t> finite;
  finite.reserve(total);
  for (size_t i = 0; i < total; ++i)
    if (v[i] != kInf) finite.push_back(static_cast<int64_t>(i));

  auto dim_of_cell = [this](int64_t cell) {
    int a = static_cast<int>(cell % kx_);
    int b = static_cast<int>((cell / kx_) % ky_);
    int c = static_cast<int>(cell / (static_cast<int64_t>(kx_) * ky_));
    return (a & 1) + (b & 1) + (c & 1);
  };

  // Filtration order. Ordering by dimension within equal values is what makes
  // the order valid (a cofacet can share its value with a facet).
  std::sort(finite.begin(), finite.end(), [&](int64_t lhs, int64_t rhs) {
    if (v[lhs] != v[rhs]) return v[lhs] < v[rhs];
    int dl = dim_of_cell(lhs), dr = dim_of_cell(rhs);
    if (dl != dr) return dl < dr;
    int la = static_cast<int>(lhs % kx_), ra = static_cast<int>(rhs % kx_);
    if (la != ra) return la < ra;
    int lb = static_cast<int>((lhs / kx_) % ky_), rb = static_cast<int>((rhs / kx_) % ky_);
    if (lb != rb) return lb < rb;
    return lhs < rhs;
  });

  cell_of_ = std::move(finite);
  values_.resize(cell_of_.size());
  dims_.resize(cell_of_.size());
  order_of_.assign(total, -1);
  for (size_t i = 0; i < cell_of_.size(); ++i) {
    values_[i] = v[cell_of_[i]];
    dims_[i] = static_cast<int8_t>(dim_of_cell(cell_of_[i]));
    order_of_[cell_of_[i]] = static_cast<int32_t>(i);
  }
}

int FilteredCubicalComplex::boundary(size_t order, int32_t out[6]) const {
  int64_t cell = cell_of_[order];
  int a = static_cast<int>(cell % kx_);
  int b = static_cast<int>((cell / kx_) % ky_);
  int c = static_cast<int>(cell / (static_cast<int64_t>(kx_) * ky_));
  int n = 0;
  int64_t stride_a = 1;
  int64_t stride_b = kx_;
  int64_t stride_c = static_cast<int64_t>(kx_) * ky_;
  if (a & 1) {
    out[n++] = order_of_[cell - stride_a];
    out[n++] = order_of_[cell + stride_a];
  }
  if (b & 1) {
    out[n++] = order_of_[cell - stride_b];
    out[n++] = order_of_[cell + stride_b];
  }
  if (c & 1) {
    out[n++] = order_of_[cell - stride_c];
    out[n++] = order_of_[cell + stride_c];
  }
  return n;
}

size_t FilteredCubicalComplex::count_cells(int dim) const {
  size_t n = 0;
  for (int8_t d : dims_) n += (d == dim);
  return n;
}

std::array<int, 3> FilteredCubicalComplex::cell_coords(size_t order) const {
  int64_t cell = cell_of_[order];
  return {static_cast<int>(cell % kx_), static_cast<int>((cell / kx_) % ky_),
          static_cast<int>(cell / (static_cast<int64_t>(kx_) * ky_))};
}

FilteredCubicalComplex build_filtration(const SignedDistanceVolume& sdv) {
  return FilteredCubicalComplex(sdv);
}

std::array<PersistenceDiagram, 3> compute_persistence(const FilteredCubicalComplex& cx) {
  const size_t n = cx.size();
  std::array<PersistenceDiagram, 3> diagrams;
  for (int d = 0; d < 3; ++d) diagrams[d].dim = d;

  // pivot_col[i]: index of the reduced column whose lowest entry is i.
  std::vector<int32_t> pivot_col(n, -1);
  std::vector<uint8_t> killed(n, 0);
  // Reduced columns, kept only for negative (killer) cells.
  std::vector<std::vector<int32_t>> reduced(n);

  std::vector<int32_t> col, merged;

  // Twist: process dimensions top-down so that killed cells of the next
  // dimension down can be cleared without reduction.
  for (int dim = 3; dim >= 1; --dim) {
    for (size_t j = 0; j < n; ++j) {
      if (cx.dim_of(j) != dim) continue;
      if (killed[j]) continue;  // cleared: this cell births a (dim)-class

      int32_t faces[6];
      int nf = cx.boundary(j, faces);
      col.assign(faces, faces + nf);
      std::sort(col.begin(), col.end());

      while (!col.empty()) {
        int32_t low = col.back();
        int32_t other = pivot_col[low];
        if (other < 0) break;
        // Z/2 column addition: symmetric difference of sorted lists.
        const std::vector<int32_t>& rc = reduced[other];
        merged.clear();
        std::set_symmetric_difference(col.begin(), col.end(), rc.begin(), rc.end(),
                                      std::back_inserter(merged));
        col.swap(merged);
      }

      if (!col.empty()) {
        int32_t low = col.back();
        pivot_col[low] = static_cast<int32_t>(j);
        killed[low] = 1;
        reduced[j] = col;
        double birth = cx.value_of(low);
        double death = cx.value_of(j);
        if (birth < death)
          diagrams[dim - 1].pairs.push_back({dim - 1, birth, death});
      }
      // Empty column: cell j births a dim-class; it becomes essential unless
      // some later column kills it.
    }
  }

  for (size_t i = 0; i < n; ++i) {
    int dim = cx.dim_of(i);
    if (dim > 2 || killed[i]) continue;
    bool is_birth = dim == 0 || reduced[i].empty();
    if (is_birth) diagrams[dim].pairs.push_back({dim, cx.value_of(i), kInf});
  }
  return diagrams;
}

}  // namespace phfcox

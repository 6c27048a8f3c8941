#pragma once

#include <vector>

#include "phfcox/diagram.hpp"

namespace phfcox {

/// Rectangular evaluation grid on the (birth, death) plane. Values live at
/// cell centers; cell_area is the quadrature weight of every cell.
struct SurfaceGrid {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  int nx = 2, ny = 2;

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  double cell_area() const { return dx() * dy(); }
  double center_x(int i) const { return x_min + (i + 0.5) * dx(); }
  double center_y(int j) const { return y_min + (j + 0.5) * dy(); }
  size_t cells() const { return static_cast<size_t>(nx) * ny; }

  bool operator==(const SurfaceGrid&) const = default;
};

/// Kernel-smoothed, weighted surface of a regularized diagram on a grid.
/// values are stored x-fastest: values[j*nx + i] at (center_x(i), center_y(j)).
struct PersistenceSurface {
  SurfaceGrid grid;
  std::vector<double> values;
  int dim = 0;
  double sigma = 1.0;
};

/// Maximum distance weight: max{|b|, |d|, d-b}.
double mdw_weight(double birth, double death);

/// Bounds covering all pooled (regularized) diagram points, padded by
/// pad*sigma on every side (kernel support), at the requested base
/// resolution. The resolution is refined upward until the cell edge is at
/// most sigma/2. Throws if every diagram in the pool is empty.
SurfaceGrid pooled_grid_bounds(const std::vector<const PersistenceDiagram*>& diagrams,
                               double sigma, int nx = 50, int ny = 50, double pad = 3.0);

/// X(x,y) = sum over pairs of exp(-[(x-b)^2+(y-d)^2]/sigma^2) * mdw(b,d),
/// evaluated at cell centers. An empty diagram gives the zero surface.
PersistenceSurface rasterize_surface(const PersistenceDiagram& d, const SurfaceGrid& grid,
                                     double sigma);

}  // namespace phfcox

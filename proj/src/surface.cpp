#include "phfcox/surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phfcox {

double mdw_weight(double birth, double death) {
  return std::max({std::fabs(birth), std::fabs(death), death - birth});
}

SurfaceGrid pooled_grid_bounds(const std::vector<const PersistenceDiagram*>& diagrams,
                               double sigma, int nx, int ny, double pad) {
  if (sigma <= 0.0) throw std::invalid_argument("pooled_grid_bounds: sigma must be positive");
  bool any = false;
  double b_min = 0, b_max = 0, d_min = 0, d_max = 0;
  for (const PersistenceDiagram* d : diagrams) {
    for (const PersistencePair& p : d->pairs) {
      if (!any) {
        b_min = b_max = p.birth;
        d_min = d_max = p.death;
        any = true;
      } else {
        b_min = std::min(b_min, p.birth);
        b_max = std::max(b_max, p.birth);
        d_min = std::min(d_min, p.death);
        d_max = std::max(d_max, p.death);
      }
    }
  }
  if (!any) throw std::runtime_error("pooled_grid_bounds: all diagrams empty");

  SurfaceGrid g;
  g.x_min = b_min - pad * sigma;
  g.x_max = b_max + pad * sigma;
  g.y_min = d_min - pad * sigma;
  g.y_max = d_max + pad * sigma;
  // Refine so the kernel is sampled at least twice per sigma.
  double max_edge = sigma / 2.0;
  g.nx = std::max(nx, static_cast<int>(std::ceil((g.x_max - g.x_min) / max_edge)));
  g.ny = std::max(ny, static_cast<int>(std::ceil((g.y_max - g.y_min) / max_edge)));
  return g;
}

PersistenceSurface rasterize_surface(const PersistenceDiagram& d, const SurfaceGrid& grid,
                                     double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("rasterize_surface: sigma must be positive");
  PersistenceSurface s;
  s.grid = grid;
  s.dim = d.dim;
  s.sigma = sigma;
  s.values.assign(grid.cells(), 0.0);

  double inv_s2 = 1.0 / (sigma * sigma);
  for (const PersistencePair& p : d.pairs) {
    double w = mdw_weight(p.birth, p.death);
    if (w == 0.0) continue;
    for (int j = 0; j < grid.ny; ++j) {
      double dy = grid.center_y(j) - p.death;
      double ey = dy * dy;
      for (int i = 0; i < grid.nx; ++i) {
        double dx = grid.center_x(i) - p.birth;
        s.values[static_cast<size_t>(j) * grid.nx + i] += w * std::exp(-(dx * dx + ey) * inv_s2);
      }
    }
  }
  return s;
}

}  // namespace phfcox

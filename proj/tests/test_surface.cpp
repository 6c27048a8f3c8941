#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "phfcox/rng.hpp"
#include "phfcox/surface.hpp"

using namespace phfcox;

TEST_CASE("mdw weight") {
  CHECK(mdw_weight(2, 5) == 5.0);
  CHECK(mdw_weight(-3, -1) == 3.0);
  CHECK(mdw_weight(0, 0) == 0.0);
  CHECK(mdw_weight(-2, 4) == 6.0);
}

TEST_CASE("pooled grid bounds arithmetic") {
  PersistenceDiagram d{0, {{0, -2.0, -1.0}}};
  SurfaceGrid g = pooled_grid_bounds({&d}, 1.0, 10, 10);
  CHECK(g.x_min == doctest::Approx(-5.0));
  CHECK(g.x_max == doctest::Approx(1.0));
  CHECK(g.y_min == doctest::Approx(-4.0));
  CHECK(g.y_max == doctest::Approx(2.0));
  // Cell edge <= sigma/2 refinement: width 6 at sigma 1 needs >= 12 cells.
  CHECK(g.nx >= 12);
  CHECK(g.ny >= 12);

  PersistenceDiagram a{0, {{0, -5.0, -1.0}}}, b{0, {{0, 0.0, 2.0}}};
  SurfaceGrid g2 = pooled_grid_bounds({&a, &b}, 2.0, 10, 10);
  CHECK(g2.x_min == doctest::Approx(-5.0 - 6.0));
  CHECK(g2.x_max == doctest::Approx(0.0 + 6.0));

  PersistenceDiagram empty{0, {}};
  CHECK_THROWS(pooled_grid_bounds({&empty}, 1.0));
}

TEST_CASE("rasterize empty and zero-weight diagrams") {
  SurfaceGrid g{-1, 1, -1, 1, 8, 8};
  PersistenceSurface zero = rasterize_surface(PersistenceDiagram{0, {}}, g, 1.0);
  for (double v : zero.values) CHECK(v == 0.0);
  // The origin pair has MDW weight zero and vanishes.
  PersistenceSurface origin = rasterize_surface(PersistenceDiagram{0, {{0, 0.0, 0.0}}}, g, 1.0);
  for (double v : origin.values) CHECK(v == 0.0);
}

TEST_CASE("kernel center value equals the MDW weight") {
  // Grid with a cell center exactly at (-2, 4).
  SurfaceGrid g{-2.75, -1.75, 3.25, 4.25, 2, 2};
  CHECK(g.center_x(1) == doctest::Approx(-2.0));
  CHECK(g.center_y(1) == doctest::Approx(4.0));
  PersistenceSurface s = rasterize_surface(PersistenceDiagram{0, {{0, -2.0, 4.0}}}, g, 1.0);
  CHECK(s.values[1 * 2 + 1] == doctest::Approx(6.0));
}

TEST_CASE("surfaces add over disjoint unions") {
  Rng rng = Rng::substream(42, "surface-add", 0);
  SurfaceGrid g{-5, 5, -5, 5, 21, 17};
  PersistenceDiagram d1{1, {}}, d2{1, {}};
  for (int i = 0; i < 6; ++i) {
    double b = rng.uniform(-4, 3);
    d1.pairs.push_back({1, b, b + rng.uniform(0.1, 2.0)});
    b = rng.uniform(-4, 3);
    d2.pairs.push_back({1, b, b + rng.uniform(0.1, 2.0)});
  }
  PersistenceDiagram both{1, d1.pairs};
  both.pairs.insert(both.pairs.end(), d2.pairs.begin(), d2.pairs.end());
  PersistenceSurface s1 = rasterize_surface(d1, g, 0.8);
  PersistenceSurface s2 = rasterize_surface(d2, g, 0.8);
  PersistenceSurface sb = rasterize_surface(both, g, 0.8);
  for (size_t c = 0; c < sb.values.size(); ++c)
    CHECK(sb.values[c] == doctest::Approx(s1.values[c] + s2.values[c]).epsilon(1e-12));
}

TEST_CASE("one-point surface peaks at the nearest cell") {
  SurfaceGrid g{-5, 5, -5, 5, 20, 20};
  PersistencePair p{0, -1.3, 2.1};
  PersistenceSurface s = rasterize_surface(PersistenceDiagram{0, {p}}, g, 1.0);
  size_t best = 0;
  for (size_t c = 1; c < s.values.size(); ++c)
    if (s.values[c] > s.values[best]) best = c;
  int bi = static_cast<int>(best % g.nx), bj = static_cast<int>(best / g.nx);
  // Nearest cell center to the point.
  int ei = 0, ej = 0;
  double de = 1e300;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double dx = g.center_x(i) - p.birth, dy = g.center_y(j) - p.death;
      if (dx * dx + dy * dy < de) {
        de = dx * dx + dy * dy;
        ei = i;
        ej = j;
      }
    }
  CHECK(bi == ei);
  CHECK(bj == ej);
}

TEST_CASE("surface values are continuous in sigma") {
  Rng rng = Rng::substream(43, "surface-sigma", 0);
  SurfaceGrid g{-4, 4, -4, 4, 10, 10};
  for (int rep = 0; rep < 5; ++rep) {
    PersistenceDiagram d{0, {}};
    for (int i = 0; i < 4; ++i) {
      double b = rng.uniform(-3, 2);
      d.pairs.push_back({0, b, b + rng.uniform(0.0, 2.0)});
    }
    double sigma = rng.uniform(0.5, 2.0);
    PersistenceSurface base = rasterize_surface(d, g, sigma);
    double prev_max_diff = 1e300;
    for (double h : {0.1, 0.01, 0.001}) {
      PersistenceSurface bumped = rasterize_surface(d, g, sigma + h);
      double max_diff = 0;
      for (size_t c = 0; c < base.values.size(); ++c)
        max_diff = std::max(max_diff, std::fabs(bumped.values[c] - base.values[c]));
      CHECK(max_diff < prev_max_diff + 1e-15);
      prev_max_diff = max_diff;
    }
    CHECK(prev_max_diff < 1e-2);
  }
}

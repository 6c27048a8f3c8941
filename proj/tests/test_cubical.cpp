#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "phfcox/cubical.hpp"
#include "phfcox/rng.hpp"

using namespace phfcox;

namespace {

SignedDistanceVolume from_values(int nx, int ny, int nz, std::vector<double> values) {
  SignedDistanceVolume s;
  s.values = Grid3<double>(nx, ny, nz);
  s.values.data = std::move(values);
  return s;
}

SignedDistanceVolume random_volume(int n, Rng& rng, double inf_fraction = 0.15) {
  SignedDistanceVolume s;
  s.values = Grid3<double>(n, n, n);
  for (double& v : s.values.data) {
    if (rng.uniform() < inf_fraction)
      v = SignedDistanceVolume::kInf;
    else
      v = static_cast<double>(static_cast<int>(rng.uniform_int(11)) - 5);
  }
  // Keep at least one finite cell.
  s.values.data[0] = 0.0;
  return s;
}

size_t total_pairs(const std::array<PersistenceDiagram, 3>& d) {
  return d[0].pairs.size() + d[1].pairs.size() + d[2].pairs.size();
}

}  // namespace

TEST_CASE("filtration of 1x1x2 row applies the max rule") {
  FilteredCubicalComplex cx = build_filtration(from_values(1, 1, 2, {-1.0, 1.0}));
  REQUIRE(cx.size() == 3);
  CHECK(cx.count_cells(0) == 2);
  CHECK(cx.count_cells(1) == 1);
  // Filtration order: vertex(-1), vertex(+1), edge(+1).
  CHECK(cx.value_of(0) == -1.0);
  CHECK(cx.dim_of(0) == 0);
  CHECK(cx.value_of(2) == 1.0);
  CHECK(cx.dim_of(2) == 1);
}

TEST_CASE("filtration of a 2x2x2 block has the full cube cell census") {
  FilteredCubicalComplex cx = build_filtration(
      from_values(2, 2, 2, {1, 1, 1, 1, 1, 1, 1, 1}));
  CHECK(cx.count_cells(0) == 8);
  CHECK(cx.count_cells(1) == 12);
  CHECK(cx.count_cells(2) == 6);
  CHECK(cx.count_cells(3) == 1);
}

TEST_CASE("cells touching an infinite vertex are excluded") {
  // 2x1x1 with one inf vertex: only the finite vertex survives.
  FilteredCubicalComplex cx =
      build_filtration(from_values(2, 1, 1, {3.0, SignedDistanceVolume::kInf}));
  CHECK(cx.size() == 1);
  CHECK(cx.dim_of(0) == 0);
  CHECK(cx.value_of(0) == 3.0);
}

TEST_CASE("single voxel gives one essential component") {
  auto d = compute_persistence(build_filtration(from_values(1, 1, 1, {-3.0})));
  REQUIRE(d[0].pairs.size() == 1);
  CHECK(d[0].pairs[0].birth == -3.0);
  CHECK(d[0].pairs[0].essential());
  CHECK(d[1].pairs.empty());
  CHECK(d[2].pairs.empty());
}

TEST_CASE("monotone valley row births one component only") {
  auto d = compute_persistence(build_filtration(from_values(1, 1, 5, {2, 1, -1, 1, 2})));
  REQUIRE(d[0].pairs.size() == 1);
  CHECK(d[0].pairs[0].birth == -1.0);
  CHECK(d[0].pairs[0].essential());
  CHECK(d[1].pairs.empty());
}

TEST_CASE("3x3x3 shell closes a cavity") {
  std::vector<double> v(27, -1.0);
  SignedDistanceVolume s = from_values(3, 3, 3, std::move(v));
  s.values.at(1, 1, 1) = 2.0;
  auto d = compute_persistence(build_filtration(s));
  REQUIRE(d[2].pairs.size() == 1);
  CHECK(d[2].pairs[0].birth == -1.0);
  CHECK(d[2].pairs[0].death == 2.0);
  // One essential component born at -1.
  REQUIRE(d[0].pairs.size() == 1);
  CHECK(d[0].pairs[0].birth == -1.0);
}

TEST_CASE("persistence matches naive reduction on random volumes") {
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng = Rng::substream(5150, "ph-oracle", rep);
    SignedDistanceVolume s = random_volume(8, rng);
    FilteredCubicalComplex cx = build_filtration(s);
    auto fast = compute_persistence(cx);
    auto naive = oracle::naive_persistence(cx);
    for (int dim = 0; dim < 3; ++dim) {
      INFO("rep ", rep, " dim ", dim);
      CHECK(oracle::same_multiset(fast[dim], naive[dim]));
    }
  }
}

TEST_CASE("dim-0 essential classes count connected components") {
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng = Rng::substream(5151, "ph-components", rep);
    SignedDistanceVolume s = random_volume(7, rng, 0.55);
    auto d = compute_persistence(build_filtration(s));
    int essential = 0;
    for (const auto& p : d[0].pairs) essential += p.essential();
    CHECK(essential == oracle::finite_component_count(s.values));
  }
}

TEST_CASE("Euler characteristic consistency at sampled thresholds") {
  for (int rep = 0; rep < 5; ++rep) {
    Rng rng = Rng::substream(5152, "ph-euler", rep);
    SignedDistanceVolume s = random_volume(6, rng);
    FilteredCubicalComplex cx = build_filtration(s);
    auto d = compute_persistence(cx);
    for (double eps : {-5.0, -2.0, 0.0, 2.5, 5.0}) {
      long chi_cells = 0;
      for (size_t i = 0; i < cx.size(); ++i)
        if (cx.value_of(i) <= eps) chi_cells += (cx.dim_of(i) % 2 == 0) ? 1 : -1;
      long chi_pairs = 0;
      for (int dim = 0; dim < 3; ++dim)
        for (const auto& p : d[dim].pairs)
          if (p.birth <= eps && !(p.death <= eps)) chi_pairs += (dim % 2 == 0) ? 1 : -1;
      INFO("rep ", rep, " eps ", eps);
      CHECK(chi_cells == chi_pairs);
    }
  }
}

TEST_CASE("bottleneck stability under small perturbations") {
  for (int rep = 0; rep < 5; ++rep) {
    Rng rng = Rng::substream(5153, "ph-stability", rep);
    // Small volumes so diagrams stay tiny.
    SignedDistanceVolume s = random_volume(3, rng, 0.0);
    SignedDistanceVolume t = s;
    double delta = 0.25;
    for (double& v : t.values.data) v += rng.uniform(-delta, delta);
    auto ds = compute_persistence(build_filtration(s));
    auto dt = compute_persistence(build_filtration(t));
    for (int dim = 0; dim < 3; ++dim) {
      if (ds[dim].pairs.size() > 10 || dt[dim].pairs.size() > 10) continue;
      // Essential deaths stay essential under perturbation; compare the
      // regularized diagrams, whose points all live in the plane.
      double dist =
          oracle::bottleneck_distance(regularize_infinite(ds[dim]), regularize_infinite(dt[dim]));
      CHECK(dist <= delta + 1e-9);
    }
  }
}

TEST_CASE("regularize_infinite") {
  PersistenceDiagram d{0, {{0, -3.0, SignedDistanceVolume::kInf}, {0, -2.0, 4.0}}};
  PersistenceDiagram r = regularize_infinite(d);
  CHECK(r.pairs[0].birth == -3.0);
  CHECK(r.pairs[0].death == -3.0);
  CHECK(r.pairs[1] == PersistencePair{0, -2.0, 4.0});
  CHECK(regularize_infinite(PersistenceDiagram{1, {}}).pairs.empty());
}

TEST_CASE("quadrant_summary sign rules") {
  PersistenceDiagram d{0, {{0, -3, -1}, {0, -2, 5}}};
  QuadrantCounts c = quadrant_summary(d);
  CHECK(c.ii() == 1);
  CHECK(c.iii() == 1);
  CHECK(c.i() == 0);
  CHECK(c.iv() == 0);

  QuadrantCounts one = quadrant_summary(PersistenceDiagram{1, {{1, 1, 4}}});
  CHECK(one.i() == 1);

  QuadrantCounts none = quadrant_summary(PersistenceDiagram{2, {}});
  CHECK(none.i() + none.ii() + none.iii() + none.iv() == 0);

  // Axis and origin conventions.
  QuadrantCounts axes = quadrant_summary(
      PersistenceDiagram{0, {{0, 0.0, 0.0}, {0, 0.0, 2.0}, {0, -1.0, 0.0}}});
  CHECK(axes.iii() == 2);  // origin and (-1, 0)
  CHECK(axes.i() == 1);    // (0, +2)
}

TEST_CASE("2D volumes produce no dim-2 features") {
  Rng rng = Rng::substream(5154, "ph-2d", 0);
  SignedDistanceVolume s;
  s.values = Grid3<double>(12, 12, 1);
  for (double& v : s.values.data) v = rng.uniform(-4.0, 4.0);
  auto d = compute_persistence(build_filtration(s));
  CHECK(d[2].pairs.empty());
  CHECK(total_pairs(d) > 0);
}

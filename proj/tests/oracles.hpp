// Independent reference implementations used as test oracles. Everything in
// here computes "by definition" (exhaustive scans, dense matrices, textbook
// reduction) and deliberately shares no code with the library paths it
// checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "phfcox/cubical.hpp"
#include "phfcox/diagram.hpp"
#include "phfcox/volume.hpp"

namespace oracle {

// Squared distance from every voxel to the nearest voxel of a different
// label, by scanning all voxel pairs. Integer-exact. -1 when no different
// label exists.
inline std::vector<int64_t> brute_force_sq_dist_to_other_label(
    const phfcox::Grid3<phfcox::Label>& labels) {
  std::vector<int64_t> out(labels.size(), -1);
  for (int z = 0; z < labels.nz; ++z)
    for (int y = 0; y < labels.ny; ++y)
      for (int x = 0; x < labels.nx; ++x) {
        int64_t best = -1;
        phfcox::Label mine = labels.at(x, y, z);
        for (int z2 = 0; z2 < labels.nz; ++z2)
          for (int y2 = 0; y2 < labels.ny; ++y2)
            for (int x2 = 0; x2 < labels.nx; ++x2) {
              if (labels.at(x2, y2, z2) == mine) continue;
              int64_t dx = x - x2, dy = y - y2, dz = z - z2;
              int64_t d2 = dx * dx + dy * dy + dz * dz;
              if (best < 0 || d2 < best) best = d2;
            }
        out[labels.index(x, y, z)] = best;
      }
  return out;
}

// Textbook persistence: full boundary matrix in filtration order, plain
// left-to-right reduction with bitset columns, no clearing or twist.
inline std::array<phfcox::PersistenceDiagram, 3> naive_persistence(
    const phfcox::FilteredCubicalComplex& cx) {
  const size_t n = cx.size();
  const size_t words = (n + 63) / 64;
  std::vector<std::vector<uint64_t>> cols(n, std::vector<uint64_t>(words, 0));
  for (size_t j = 0; j < n; ++j) {
    int32_t faces[6];
    int nf = cx.boundary(j, faces);
    for (int f = 0; f < nf; ++f) cols[j][faces[f] / 64] ^= 1ull << (faces[f] % 64);
  }
  auto lowest = [&](const std::vector<uint64_t>& c) -> int64_t {
    for (int64_t w = static_cast<int64_t>(words) - 1; w >= 0; --w)
      if (c[w]) return w * 64 + (63 - __builtin_clzll(c[w]));
    return -1;
  };
  std::vector<int64_t> pivot_owner(n, -1);
  std::vector<int64_t> low_of(n, -1);
  for (size_t j = 0; j < n; ++j) {
    int64_t low = lowest(cols[j]);
    while (low >= 0 && pivot_owner[low] >= 0) {
      const std::vector<uint64_t>& other = cols[pivot_owner[low]];
      for (size_t w = 0; w < words; ++w) cols[j][w] ^= other[w];
      low = lowest(cols[j]);
    }
    low_of[j] = low;
    if (low >= 0) pivot_owner[low] = static_cast<int64_t>(j);
  }

  std::array<phfcox::PersistenceDiagram, 3> diagrams;
  for (int d = 0; d < 3; ++d) diagrams[d].dim = d;
  std::vector<uint8_t> killed(n, 0);
  for (size_t j = 0; j < n; ++j)
    if (low_of[j] >= 0) killed[low_of[j]] = 1;
  for (size_t j = 0; j < n; ++j) {
    if (low_of[j] >= 0) {
      size_t i = static_cast<size_t>(low_of[j]);
      double birth = cx.value_of(i), death = cx.value_of(j);
      int dim = cx.dim_of(i);
      if (birth < death && dim <= 2) diagrams[dim].pairs.push_back({dim, birth, death});
    } else if (!killed[j] && cx.dim_of(j) <= 2) {
      diagrams[cx.dim_of(j)].pairs.push_back(
          {cx.dim_of(j), cx.value_of(j), std::numeric_limits<double>::infinity()});
    }
  }
  return diagrams;
}

inline bool same_multiset(const phfcox::PersistenceDiagram& a, const phfcox::PersistenceDiagram& b) {
  if (a.pairs.size() != b.pairs.size()) return false;
  auto key = [](const phfcox::PersistencePair& p) { return std::make_pair(p.birth, p.death); };
  std::vector<std::pair<double, double>> ka, kb;
  for (const auto& p : a.pairs) ka.push_back(key(p));
  for (const auto& p : b.pairs) kb.push_back(key(p));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  return ka == kb;
}

// Number of 6-connected components of finite-valued voxels, by union-find.
inline int finite_component_count(const phfcox::Grid3<double>& values) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> parent(values.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int z = 0; z < values.nz; ++z)
    for (int y = 0; y < values.ny; ++y)
      for (int x = 0; x < values.nx; ++x) {
        if (values.at(x, y, z) == inf) continue;
        int i = static_cast<int>(values.index(x, y, z));
        if (x + 1 < values.nx && values.at(x + 1, y, z) != inf)
          unite(i, static_cast<int>(values.index(x + 1, y, z)));
        if (y + 1 < values.ny && values.at(x, y + 1, z) != inf)
          unite(i, static_cast<int>(values.index(x, y + 1, z)));
        if (z + 1 < values.nz && values.at(x, y, z + 1) != inf)
          unite(i, static_cast<int>(values.index(x, y, z + 1)));
      }
  int count = 0;
  for (size_t i = 0; i < values.size(); ++i)
    if (values.data[i] != inf && find(static_cast<int>(i)) == static_cast<int>(i)) ++count;
  return count;
}

// Bottleneck distance between small diagrams by exhaustive matching:
// binary search over candidate values, feasibility by augmenting paths.
// Points may match each other (L-inf cost) or their diagonal projections.
inline double bottleneck_distance(const phfcox::PersistenceDiagram& a,
                                  const phfcox::PersistenceDiagram& b) {
  auto linf = [](const phfcox::PersistencePair& p, const phfcox::PersistencePair& q) {
    return std::max(std::fabs(p.birth - q.birth), std::fabs(p.death - q.death));
  };
  auto diag = [](const phfcox::PersistencePair& p) { return (p.death - p.birth) / 2.0; };

  const size_t na = a.pairs.size(), nb = b.pairs.size();
  std::vector<double> candidates{0.0};
  for (const auto& p : a.pairs) candidates.push_back(diag(p));
  for (const auto& q : b.pairs) candidates.push_back(diag(q));
  for (const auto& p : a.pairs)
    for (const auto& q : b.pairs) candidates.push_back(linf(p, q));
  std::sort(candidates.begin(), candidates.end());

  // Feasible(eps): the standard bipartite completion. Left side = a-points
  // plus one diagonal slot per b-point; right side = b-points plus one
  // diagonal slot per a-point. A perfect matching covering the left side
  // exists iff the bottleneck distance is <= eps.
  auto feasible = [&](double eps) {
    const size_t nu = na + nb, nv = nb + na;
    auto edge = [&](size_t u, size_t v) {
      if (u < na) {
        if (v < nb) return linf(a.pairs[u], b.pairs[v]) <= eps;
        return v - nb == u && diag(a.pairs[u]) <= eps;  // own diagonal slot
      }
      size_t j = u - na;  // diagonal slot of b_j
      if (v < nb) return v == j && diag(b.pairs[j]) <= eps;
      return true;  // diagonal-to-diagonal is free
    };
    std::vector<int> match_v(nv, -1);
    std::function<bool(size_t, std::vector<uint8_t>&)> augment = [&](size_t u,
                                                                     std::vector<uint8_t>& seen) {
      for (size_t v = 0; v < nv; ++v) {
        if (seen[v] || !edge(u, v)) continue;
        seen[v] = 1;
        if (match_v[v] < 0 || augment(static_cast<size_t>(match_v[v]), seen)) {
          match_v[v] = static_cast<int>(u);
          return true;
        }
      }
      return false;
    };
    for (size_t u = 0; u < nu; ++u) {
      std::vector<uint8_t> seen(nv, 0);
      if (!augment(u, seen)) return false;
    }
    return true;
  };

  for (double c : candidates)
    if (feasible(c)) return c;
  return candidates.back();
}

}  // namespace oracle

#pragma once

#include <vector>

#include "phfcox/surface.hpp"

namespace phfcox {

/// Karhunen-Loeve decomposition of a sample of persistence surfaces sharing
/// a grid. Eigenfunctions are orthonormal under the midpoint-rule inner
/// product sum(f*g)*cell_area; eigenvalues are the variances of the
/// associated scores.
struct FpcaModel {
  int dim = 0;
  SurfaceGrid grid;
  std::vector<double> mean;                        // grid cells
  std::vector<double> eigenvalues;                 // non-increasing, > 0
  std::vector<std::vector<double>> eigenfunctions; // one grid field per eigenvalue
  int rank = 0;                                    // r selected by PV > C
  double threshold_c = 0.9;
  bool degenerate = false;                         // zero covariance (identical surfaces)
};

/// Smallest r with PV(r) = sum_{k<=r} lambda_k / sum_k lambda_k strictly
/// greater than C. Returns 0 when the total is zero.
int rank_from_eigenvalues(const std::vector<double>& eigenvalues, double C);

/// Fit mean and eigenpairs from n >= 2 surfaces on a common grid via the
/// n x n weighted Gram matrix. Identical surfaces produce a degenerate model
/// with rank 0.
FpcaModel fit_fpca(const std::vector<const PersistenceSurface*>& surfaces, double C);

/// FPC scores of one surface: eps_k = sum_cells (X - mean) * phi_k * cell_area
/// for k = 1..rank. Throws on grid mismatch.
std::vector<double> project_scores(const PersistenceSurface& surface, const FpcaModel& model);

/// mean + sum_k scores_k * phi_k on the model grid. Throws unless
/// scores.size() == model.rank.
std::vector<double> reconstruct(const std::vector<double>& scores, const FpcaModel& model);

/// Precomputed raw quadrature Gram matrix over a fixed set of surfaces.
/// Lets leave-one-out loops refit FPCA on subsets and project held-out
/// subjects in O(n^2) without re-reading the grid. Linear predictors built
/// from these scores match the fit_fpca route exactly up to eigenvector sign.
class FpcaGramCache {
 public:
  explicit FpcaGramCache(const std::vector<const PersistenceSurface*>& surfaces);

  struct SubsetFit {
    std::vector<int> subset;                  // indices the fit was made on
    std::vector<double> eigenvalues;
    int rank = 0;
    bool degenerate = false;
    std::vector<std::vector<double>> scores;  // per subset member, length rank
    // Internals needed to project additional surfaces.
    std::vector<std::vector<double>> eigvecs;  // per k, length subset.size()
    std::vector<double> row_mean;              // mean over subset of G[i][.], all i
    double grand_mean = 0.0;
  };

  /// FPCA restricted to `subset` (indices into the construction order).
  SubsetFit fit_subset(const std::vector<int>& subset, double C) const;

  /// Scores of surface `index` (any member of the cache, typically the
  /// held-out one) against a subset fit.
  std::vector<double> project(const SubsetFit& fit, int index) const;

  int count() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> gram_;  // raw: X_i W X_j, row-major n x n
  double raw_scale_ = 0.0;    // mean diagonal, for the zero-covariance cutoff
};

}  // namespace phfcox

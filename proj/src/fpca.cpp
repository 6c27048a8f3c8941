#include "phfcox/fpca.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace phfcox {

namespace {

// Eigenvalues below this fraction of the raw data scale are floating-point
// noise, not variance.
constexpr double kEigRelTol = 1e-12;

struct EigOut {
  std::vector<double> values;           // descending, clamped at 0, noise dropped
  std::vector<Eigen::VectorXd> vectors;
};

EigOut gram_eig(const Eigen::MatrixXd& gram, double scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("fpca: eigendecomposition failed");
  const auto& evals = solver.eigenvalues();  // ascending
  double tol = kEigRelTol * std::max(scale, 1e-300);
  EigOut out;
  for (int k = static_cast<int>(evals.size()) - 1; k >= 0; --k) {
    double l = evals[k];
    if (l <= tol) break;  // remaining ones are smaller
    out.values.push_back(l);
    out.vectors.push_back(solver.eigenvectors().col(k));
  }
  return out;
}

}  // namespace

int rank_from_eigenvalues(const std::vector<double>& eigenvalues, double C) {
  double total = 0.0;
  for (double l : eigenvalues) total += l;
  if (total <= 0.0) return 0;
  double partial = 0.0;
  for (size_t r = 0; r < eigenvalues.size(); ++r) {
    partial += eigenvalues[r];
    if (partial / total > C) return static_cast<int>(r) + 1;
  }
  return static_cast<int>(eigenvalues.size());
}

FpcaModel fit_fpca(const std::vector<const PersistenceSurface*>& surfaces, double C) {
  const int n = static_cast<int>(surfaces.size());
  if (n < 2) throw std::invalid_argument("fit_fpca: need at least 2 surfaces");
  const SurfaceGrid& grid = surfaces[0]->grid;
  for (const PersistenceSurface* s : surfaces)
    if (!(s->grid == grid)) throw std::invalid_argument("fit_fpca: surfaces on different grids");

  const size_t m = grid.cells();
  const double area = grid.cell_area();

  FpcaModel model;
  model.dim = surfaces[0]->dim;
  model.grid = grid;
  model.threshold_c = C;
  model.mean.assign(m, 0.0);
  for (const PersistenceSurface* s : surfaces)
    for (size_t c = 0; c < m; ++c) model.mean[c] += s->values[c];
  for (double& v : model.mean) v /= n;

  // Centered data rows; Gram of the covariance operator is
  // (area / (n-1)) * Xc Xc^T, an n x n problem.
  Eigen::MatrixXd xc(n, m);
  for (int i = 0; i < n; ++i)
    for (size_t c = 0; c < m; ++c) xc(i, c) = surfaces[i]->values[c] - model.mean[c];
  Eigen::MatrixXd gram = (xc * xc.transpose()) * (area / (n - 1));

  double raw_scale = 0.0;
  for (const PersistenceSurface* s : surfaces)
    for (size_t c = 0; c < m; ++c) raw_scale += s->values[c] * s->values[c] * area;
  raw_scale /= n;

  EigOut eig = gram_eig(gram, raw_scale);
  if (eig.values.empty()) {
    model.degenerate = true;
    model.rank = 0;
    return model;
  }

  model.eigenvalues = eig.values;
  model.eigenfunctions.resize(eig.values.size());
  for (size_t k = 0; k < eig.values.size(); ++k) {
    // phi_k = Xc^T v_k / sqrt((n-1) * lambda_k); unit norm under the
    // quadrature inner product.
    Eigen::VectorXd phi = xc.transpose() * eig.vectors[k] / std::sqrt((n - 1) * eig.values[k]);
    // Deterministic sign: the entry of largest magnitude is positive.
    int arg = 0;
    double best = 0.0;
    for (int c = 0; c < phi.size(); ++c)
      if (std::fabs(phi[c]) > best) {
        best = std::fabs(phi[c]);
        arg = c;
      }
    if (phi[arg] < 0) phi = -phi;
    model.eigenfunctions[k].assign(phi.data(), phi.data() + phi.size());
  }
  model.rank = rank_from_eigenvalues(model.eigenvalues, C);
  return model;
}

std::vector<double> project_scores(const PersistenceSurface& surface, const FpcaModel& model) {
  if (!(surface.grid == model.grid)) throw std::invalid_argument("project_scores: grid mismatch");
  const size_t m = model.grid.cells();
  const double area = model.grid.cell_area();
  std::vector<double> scores(model.rank, 0.0);
  for (int k = 0; k < model.rank; ++k) {
    double s = 0.0;
    const std::vector<double>& phi = model.eigenfunctions[k];
    for (size_t c = 0; c < m; ++c) s += (surface.values[c] - model.mean[c]) * phi[c];
    scores[k] = s * area;
  }
  return scores;
}

std::vector<double> reconstruct(const std::vector<double>& scores, const FpcaModel& model) {
  if (static_cast<int>(scores.size()) != model.rank)
    throw std::invalid_argument("reconstruct: score length does not match model rank");
  std::vector<double> out = model.mean;
  for (int k = 0; k < model.rank; ++k)
    for (size_t c = 0; c < out.size(); ++c) out[c] += scores[k] * model.eigenfunctions[k][c];
  return out;
}

// ---------------------------------------------------------------------------

FpcaGramCache::FpcaGramCache(const std::vector<const PersistenceSurface*>& surfaces) {
  n_ = static_cast<int>(surfaces.size());
  if (n_ == 0) throw std::invalid_argument("FpcaGramCache: no surfaces");
  const SurfaceGrid& grid = surfaces[0]->grid;
  for (const PersistenceSurface* s : surfaces)
    if (!(s->grid == grid)) throw std::invalid_argument("FpcaGramCache: grid mismatch");
  const size_t m = grid.cells();
  const double area = grid.cell_area();

  Eigen::MatrixXd x(n_, m);
  for (int i = 0; i < n_; ++i)
    for (size_t c = 0; c < m; ++c) x(i, c) = surfaces[i]->values[c];
  Eigen::MatrixXd g = (x * x.transpose()) * area;
  gram_.assign(g.data(), g.data() + static_cast<size_t>(n_) * n_);
  raw_scale_ = g.trace() / n_;
}

FpcaGramCache::SubsetFit FpcaGramCache::fit_subset(const std::vector<int>& subset, double C) const {
  const int ns = static_cast<int>(subset.size());
  if (ns < 2) throw std::invalid_argument("fit_subset: need at least 2 surfaces");

  SubsetFit fit;
  fit.subset = subset;
  fit.row_mean.assign(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j : subset) s += gram_[static_cast<size_t>(i) * n_ + j];
    fit.row_mean[i] = s / ns;
  }
  double grand = 0.0;
  for (int i : subset) grand += fit.row_mean[i];
  fit.grand_mean = grand / ns;

  // Centered Gram restricted to the subset:
  // (Xi - mu) W (Xj - mu) = G_ij - a_i - a_j + grand.
  Eigen::MatrixXd g(ns, ns);
  for (int p = 0; p < ns; ++p)
    for (int q = 0; q < ns; ++q)
      g(p, q) = (gram_[static_cast<size_t>(subset[p]) * n_ + subset[q]] - fit.row_mean[subset[p]] -
                 fit.row_mean[subset[q]] + fit.grand_mean) /
                (ns - 1);

  EigOut eig = gram_eig(g, raw_scale_);
  if (eig.values.empty()) {
    fit.degenerate = true;
    fit.scores.assign(ns, {});
    return fit;
  }
  fit.eigenvalues = eig.values;
  fit.rank = rank_from_eigenvalues(fit.eigenvalues, C);
  fit.scores.assign(ns, std::vector<double>(fit.rank, 0.0));
  fit.eigvecs.resize(fit.rank);
  for (int k = 0; k < fit.rank; ++k) {
    double s = std::sqrt((ns - 1) * eig.values[k]);
    for (int p = 0; p < ns; ++p) fit.scores[p][k] = s * eig.vectors[k][p];
    fit.eigvecs[k].assign(eig.vectors[k].data(), eig.vectors[k].data() + ns);
  }
  return fit;
}

std::vector<double> FpcaGramCache::project(const SubsetFit& fit, int index) const {
  if (fit.degenerate) return {};
  const int ns = static_cast<int>(fit.subset.size());
  std::vector<double> scores(fit.rank, 0.0);
  for (int k = 0; k < fit.rank; ++k) {
    double denom = std::sqrt((ns - 1) * fit.eigenvalues[k]);
    double s = 0.0;
    for (int p = 0; p < ns; ++p) {
      double centered = gram_[static_cast<size_t>(index) * n_ + fit.subset[p]] -
                        fit.row_mean[index] - fit.row_mean[fit.subset[p]] + fit.grand_mean;
      s += fit.eigvecs[k][p] * centered;
    }
    scores[k] = s / denom;
  }
  return scores;
}

}  // namespace phfcox

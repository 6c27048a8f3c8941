#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "phfcox/fpca.hpp"

namespace phfcox {

struct SurvivalRecord {
  std::string subject_id;
  double time = 0.0;
  int event = 0;  // 1 = death observed, 0 = censored
  std::vector<double> clinical;
  bool frontal = false;
};

/// Per-dimension FPC scores, aligned with the record order.
struct ScoreMatrix {
  int dim = 0;
  int rank = 0;
  std::vector<std::vector<double>> rows;  // n x rank
};

/// Columns: [clinical..., frontal, FPC scores by (dim, k), interactions
/// score * frontal in the same order]. The penalty mask marks exactly the
/// FPC and interaction columns.
struct DesignMatrix {
  int n = 0, p = 0;
  std::vector<double> x;  // row-major
  std::vector<std::string> names;
  std::vector<uint8_t> penalized;

  struct FpcColumn {
    int dim = 0;
    int k = 0;  // 0-based component index
    bool interaction = false;
    int col = 0;
  };
  std::vector<FpcColumn> fpc_columns;

  double at(int i, int j) const { return x[static_cast<size_t>(i) * p + j]; }
  double& at(int i, int j) { return x[static_cast<size_t>(i) * p + j]; }
};

struct DesignOptions {
  std::vector<std::string> clinical_names;  // order of SurvivalRecord::clinical
  bool include_frontal_main = true;
  bool include_interactions = true;
};

DesignMatrix build_design(const std::array<ScoreMatrix, 3>& scores,
                          const std::vector<SurvivalRecord>& records,
                          const DesignOptions& options);

/// Value and exact gradient of the mean negative log partial likelihood
/// -(1/n) sum_{events} [eta_i - log sum_{risk set} exp(eta)], Breslow ties.
struct LikelihoodValue {
  double value = 0.0;
  std::vector<double> gradient;  // wrt beta
  bool degenerate = false;       // no events: likelihood constant
};
LikelihoodValue neg_log_partial_likelihood(const std::vector<double>& beta,
                                           const DesignMatrix& design,
                                           const std::vector<SurvivalRecord>& records);

/// Full Hessian of the same objective (for Wald intervals on small designs).
std::vector<double> neg_log_partial_likelihood_hessian(const std::vector<double>& beta,
                                                       const DesignMatrix& design,
                                                       const std::vector<SurvivalRecord>& records);

struct CoxFit {
  std::vector<double> beta;  // raw (back-transformed) coefficients, all columns
  double lambda = 0.0;
  bool converged = false;
  int iterations = 0;
  bool degenerate = false;            // no events
  std::vector<uint8_t> dropped;       // constant columns excluded from the fit
  std::vector<double> eta;            // linear predictors on the training rows
  double neg_log_likelihood = 0.0;    // at the fitted beta
};

struct CoxFitOptions {
  double tol = 1e-7;
  int max_outer = 200;
  int max_inner = 200;
  const std::vector<double>* warm_start = nullptr;  // raw-scale coefficients
};

/// Minimize -(1/n) log PL + lambda * sum_masked |beta_j| by IRLS with cyclic
/// coordinate descent. Columns are standardized internally; coefficients are
/// reported on the raw scale. Unpenalized columns are updated without
/// soft-thresholding.
CoxFit fit_penalized_cox(const DesignMatrix& design, const std::vector<SurvivalRecord>& records,
                         double lambda, const CoxFitOptions& options = {});

/// Smallest lambda that zeroes every penalized column: the max absolute
/// penalized-column score gradient at the unpenalized-columns-only fit.
double compute_lambda_max(const DesignMatrix& design, const std::vector<SurvivalRecord>& records);

/// Log-spaced path of `points` values from lambda_max down `decades` decades.
std::vector<double> lambda_path(double lambda_max, int points = 50, double decades = 2.0);

struct CvLambdaResult {
  double lambda_star = 0.0;
  std::vector<double> path;
  std::vector<double> deviance;  // summed V&VH deviance per path point
  int folds_used = 0;
  bool reduced_folds = false;
};

/// 10-fold cross-validated partial-likelihood deviance (Verweij &
/// Van Houwelingen: full-data likelihood minus train-only likelihood per
/// fold), folds stratified by event status, seeded and reproducible.
CvLambdaResult cv_lambda(const DesignMatrix& design, const std::vector<SurvivalRecord>& records,
                         int n_folds, uint64_t seed, int path_points = 50,
                         double path_decades = 2.0);

/// Linear predictor of one design row under a fit.
double risk_score(const CoxFit& fit, const DesignMatrix& design, int row);

/// Reconstructed functional coefficients sum_k beta_k phi_k on each
/// dimension's grid: .main for the base effect, .frontal for the
/// interaction part (frontal total effect = main + frontal).
struct FunctionalCoefficients {
  struct PerDim {
    SurfaceGrid grid;
    std::vector<double> main;
    std::vector<double> frontal;
  };
  std::array<PerDim, 3> dims;
};
FunctionalCoefficients functional_coefficients(const CoxFit& fit, const DesignMatrix& design,
                                               const std::array<const FpcaModel*, 3>& models);

/// Event-stratified fold assignment (values in [0, n_folds)), seeded.
std::vector<int> stratified_folds(const std::vector<SurvivalRecord>& records, int n_folds,
                                  uint64_t seed);

}  // namespace phfcox

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "phfcox/pipeline.hpp"
#include "phfcox/survstats.hpp"

namespace phfcox {

struct TuningConfig {
  // Candidate smoothing values per dimension; the default grid is 0.3..3.0
  // in steps of 0.3.
  std::vector<double> sigma_values = {0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7, 3.0};
  // full: Cartesian product over (sigma0, sigma1, sigma2). shared: one sigma
  // for all three dimensions (desk-scale alternative to the 1000-point grid).
  enum class GridMode { Full, Shared } mode = GridMode::Full;
  PipelineOptions pipeline;
  uint64_t seed = 0;
  int workers = 1;
};

struct TuningGridPoint {
  std::array<double, 3> sigma = {0, 0, 0};
  double lambda_star = 0.0;
  double chi_square = 0.0;
  double logrank_p = 1.0;
  bool failed = false;
  std::string note;
};

struct TuningResult {
  std::array<double, 3> selected_sigma = {0, 0, 0};
  std::vector<TuningGridPoint> grid;  // every evaluated point, grid order
  // Refit at the selected sigma:
  FittedPipeline final_fit;
  LoocvResult final_loocv;
  RiskSplit final_split;
  LogRankResult final_logrank;
};

/// All sigma triples of the configured grid, lexicographic order.
std::vector<std::array<double, 3>> enumerate_sigma_grid(const TuningConfig& config);

/// Evaluate one sigma triple: profile lambda by 10-fold CV deviance, compute
/// LOOCV risks at lambda*, split at the median, and run the log-rank test.
TuningGridPoint evaluate_sigma(const std::vector<SubjectData>& subjects,
                               const TuningConfig& config, const std::array<double, 3>& sigma);

/// Grid search over sigma triples; the triple with the smallest LOOCV
/// log-rank p wins, ties broken toward the lexicographically smaller triple.
TuningResult sigma_grid_search(const std::vector<SubjectData>& subjects,
                               const TuningConfig& config);

}  // namespace phfcox

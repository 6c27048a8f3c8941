#include "phfcox/tuning.hpp"

#include <cmath>
#include <stdexcept>

#include "phfcox/parallel.hpp"

namespace phfcox {

std::vector<std::array<double, 3>> enumerate_sigma_grid(const TuningConfig& config) {
  std::vector<std::array<double, 3>> grid;
  if (config.sigma_values.empty())
    throw std::invalid_argument("sigma grid: no candidate values");
  if (config.mode == TuningConfig::GridMode::Shared) {
    for (double s : config.sigma_values) grid.push_back({s, s, s});
  } else {
    for (double s0 : config.sigma_values)
      for (double s1 : config.sigma_values)
        for (double s2 : config.sigma_values) grid.push_back({s0, s1, s2});
  }
  return grid;
}

namespace {

struct SigmaEvaluation {
  TuningGridPoint point;
  double lambda = 0.0;
};

SigmaEvaluation evaluate_impl(const std::vector<SubjectData>& subjects,
                              const TuningConfig& config, const std::array<double, 3>& sigma) {
  SigmaEvaluation ev;
  ev.point.sigma = sigma;
  try {
    PipelineOptions opts = config.pipeline;
    opts.sigma = sigma;
    FittedPipeline fitted = fit_pipeline(subjects, opts, config.seed);
    ev.lambda = fitted.fit.lambda;
    ev.point.lambda_star = fitted.fit.lambda;

    LoocvResult loocv = loocv_risks(subjects, opts, ev.lambda, 1);
    std::vector<double> risks;
    std::vector<SurvivalRecord> records;
    for (size_t i = 0; i < subjects.size(); ++i) {
      if (std::isnan(loocv.eta[i])) continue;
      risks.push_back(loocv.eta[i]);
      records.push_back(subjects[i].record);
    }
    if (risks.size() < 4) throw std::runtime_error("too few usable LOOCV risks");

    RiskSplit split = median_risk_split(risks);
    if (split.degenerate) throw std::runtime_error("degenerate risk split");
    std::vector<SurvivalRecord> high, low;
    for (int i : split.high) high.push_back(records[i]);
    for (int i : split.low) low.push_back(records[i]);
    LogRankResult lr = log_rank_test(high, low);
    ev.point.chi_square = lr.chi_square;
    ev.point.logrank_p = lr.p_value;
  } catch (const std::exception& e) {
    ev.point.failed = true;
    ev.point.logrank_p = 1.0;
    ev.point.note = e.what();
  }
  return ev;
}

}  // namespace

TuningGridPoint evaluate_sigma(const std::vector<SubjectData>& subjects,
                               const TuningConfig& config, const std::array<double, 3>& sigma) {
  return evaluate_impl(subjects, config, sigma).point;
}

TuningResult sigma_grid_search(const std::vector<SubjectData>& subjects,
                               const TuningConfig& config) {
  int n_events = 0;
  for (const SubjectData& s : subjects) n_events += s.record.event;
  if (n_events < 2) throw std::runtime_error("sigma_grid_search: fewer than 2 events");

  std::vector<std::array<double, 3>> grid = enumerate_sigma_grid(config);
  TuningResult result;
  result.grid.resize(grid.size());

  // Grid points are independent; reduce in grid order, never completion
  // order.
  parallel_for(static_cast<int>(grid.size()), config.workers,
               [&](int g) { result.grid[g] = evaluate_sigma(subjects, config, grid[g]); });

  int best = -1;
  for (int g = 0; g < static_cast<int>(result.grid.size()); ++g) {
    if (result.grid[g].failed) continue;
    if (best < 0 || result.grid[g].logrank_p < result.grid[best].logrank_p) best = g;
  }
  if (best < 0) throw std::runtime_error("sigma_grid_search: every grid point failed");

  result.selected_sigma = result.grid[best].sigma;

  // Refit the winner end to end for reporting.
  PipelineOptions opts = config.pipeline;
  opts.sigma = result.selected_sigma;
  result.final_fit = fit_pipeline(subjects, opts, config.seed);
  result.final_loocv = loocv_risks(subjects, opts, result.final_fit.fit.lambda, config.workers);

  std::vector<double> risks;
  std::vector<SurvivalRecord> records;
  for (size_t i = 0; i < subjects.size(); ++i) {
    if (std::isnan(result.final_loocv.eta[i])) continue;
    risks.push_back(result.final_loocv.eta[i]);
    records.push_back(subjects[i].record);
  }
  result.final_split = median_risk_split(risks);
  std::vector<SurvivalRecord> high, low;
  for (int i : result.final_split.high) high.push_back(records[i]);
  for (int i : result.final_split.low) low.push_back(records[i]);
  result.final_logrank = log_rank_test(high, low);
  return result;
}

}  // namespace phfcox

#pragma once

#include <string>
#include <vector>

#include "phfcox/cox.hpp"

namespace phfcox {

/// Product-limit curve with Greenwood standard errors and log-scale
/// pointwise confidence bounds.
struct KmCurve {
  std::vector<double> times;      // distinct event times, ascending
  std::vector<double> survival;   // S(t) just after each event time
  std::vector<int> at_risk;       // n at risk just before each event time
  std::vector<int> events;        // events at each time
  std::vector<double> std_err;    // Greenwood SE of S(t)
  std::vector<double> lower;      // log-scale 95% bounds
  std::vector<double> upper;
};

KmCurve kaplan_meier(const std::vector<SurvivalRecord>& records);

struct LogRankResult {
  double chi_square = 0.0;
  double p_value = 1.0;
};

/// Two-sample log-rank test, 1 df, asymptotic chi-square p-value.
/// Zero events (or zero variance) gives statistic 0, p = 1.
LogRankResult log_rank_test(const std::vector<SurvivalRecord>& group_a,
                            const std::vector<SurvivalRecord>& group_b);

/// Median-risk stratification. The threshold is the floor(n/2)-th order
/// statistic (1-indexed), so with distinct risks the high group has
/// ceil(n/2) members; ties at the threshold go low.
struct RiskSplit {
  std::vector<int> high;  // indices into the input
  std::vector<int> low;
  double threshold = 0.0;
  bool degenerate = false;  // all risks identical
};

RiskSplit median_risk_split(const std::vector<double>& risks);

/// Upper-tail probability of a chi-square(1) variate.
double chi_square_1df_upper(double x);

}  // namespace phfcox

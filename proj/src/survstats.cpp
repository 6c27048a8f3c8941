#include "phfcox/survstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace phfcox {

double chi_square_1df_upper(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

KmCurve kaplan_meier(const std::vector<SurvivalRecord>& records) {
  if (records.empty()) throw std::invalid_argument("kaplan_meier: no records");
  std::vector<int> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return records[a].time < records[b].time; });

  KmCurve curve;
  double s = 1.0;
  double greenwood = 0.0;  // sum d / (n (n - d))
  size_t k = 0;
  int at_risk = static_cast<int>(records.size());
  const double z = 1.959963984540054;  // 97.5% normal quantile
  while (k < idx.size()) {
    double t = records[idx[k]].time;
    int d = 0, removed = 0;
    while (k < idx.size() && records[idx[k]].time == t) {
      d += records[idx[k]].event;
      ++removed;
      ++k;
    }
    if (d > 0) {
      curve.times.push_back(t);
      curve.at_risk.push_back(at_risk);
      curve.events.push_back(d);
      s *= 1.0 - static_cast<double>(d) / at_risk;
      if (at_risk > d) greenwood += static_cast<double>(d) / (static_cast<double>(at_risk) * (at_risk - d));
      curve.survival.push_back(s);
      curve.std_err.push_back(s * std::sqrt(greenwood));
      if (s > 0.0) {
        // log-scale interval: exp(log S -+ z * se(log S))
        double se_log = std::sqrt(greenwood);
        curve.lower.push_back(std::max(0.0, std::exp(std::log(s) - z * se_log)));
        curve.upper.push_back(std::min(1.0, std::exp(std::log(s) + z * se_log)));
      } else {
        curve.lower.push_back(0.0);
        curve.upper.push_back(0.0);
      }
    }
    at_risk -= removed;
  }
  return curve;
}

LogRankResult log_rank_test(const std::vector<SurvivalRecord>& group_a,
                            const std::vector<SurvivalRecord>& group_b) {
  if (group_a.empty() || group_b.empty())
    throw std::invalid_argument("log_rank_test: both groups must be non-empty");

  struct Entry {
    double time;
    int event;
    int group;
  };
  std::vector<Entry> all;
  all.reserve(group_a.size() + group_b.size());
  for (const SurvivalRecord& r : group_a) all.push_back({r.time, r.event, 0});
  for (const SurvivalRecord& r : group_b) all.push_back({r.time, r.event, 1});
  std::sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) { return x.time < y.time; });

  double observed_minus_expected = 0.0;  // for group a
  double variance = 0.0;
  int n_a = static_cast<int>(group_a.size());
  int n_total = static_cast<int>(all.size());
  size_t k = 0;
  while (k < all.size()) {
    double t = all[k].time;
    int d = 0, d_a = 0, removed = 0, removed_a = 0;
    while (k < all.size() && all[k].time == t) {
      d += all[k].event;
      d_a += all[k].event && all[k].group == 0;
      ++removed;
      removed_a += all[k].group == 0;
      ++k;
    }
    if (d > 0 && n_total > 1) {
      double frac_a = static_cast<double>(n_a) / n_total;
      observed_minus_expected += d_a - d * frac_a;
      variance += d * frac_a * (1.0 - frac_a) * (n_total - d) / (n_total - 1);
    }
    n_total -= removed;
    n_a -= removed_a;
  }

  LogRankResult result;
  if (variance > 0.0) {
    result.chi_square = observed_minus_expected * observed_minus_expected / variance;
    result.p_value = chi_square_1df_upper(result.chi_square);
  }
  return result;
}

RiskSplit median_risk_split(const std::vector<double>& risks) {
  const int n = static_cast<int>(risks.size());
  if (n < 2) throw std::invalid_argument("median_risk_split: need at least 2 risks");

  std::vector<double> sorted = risks;
  std::sort(sorted.begin(), sorted.end());
  RiskSplit split;
  // Lower-central-median convention: with distinct risks this puts ceil(n/2)
  // subjects above the threshold.
  split.threshold = sorted[n / 2 - 1];
  if (sorted.front() == sorted.back()) split.degenerate = true;
  for (int i = 0; i < n; ++i)
    (risks[i] > split.threshold ? split.high : split.low).push_back(i);
  return split;
}

}  // namespace phfcox

#include "phfcox/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "phfcox/rng.hpp"

namespace phfcox {

DesignMatrix build_design(const std::array<ScoreMatrix, 3>& scores,
                          const std::vector<SurvivalRecord>& records,
                          const DesignOptions& options) {
  const int n = static_cast<int>(records.size());
  for (const ScoreMatrix& sm : scores)
    if (!sm.rows.empty() && static_cast<int>(sm.rows.size()) != n)
      throw std::invalid_argument("build_design: score rows do not match records");

  const int n_clin = static_cast<int>(options.clinical_names.size());
  for (const SurvivalRecord& r : records)
    if (static_cast<int>(r.clinical.size()) != n_clin)
      throw std::invalid_argument("build_design: clinical vector length mismatch for subject " +
                                  r.subject_id);

  DesignMatrix d;
  d.n = n;
  for (int c = 0; c < n_clin; ++c) {
    d.names.push_back(options.clinical_names[c]);
    d.penalized.push_back(0);
  }
  if (options.include_frontal_main) {
    d.names.push_back("frontal");
    d.penalized.push_back(0);
  }
  int col = static_cast<int>(d.names.size());
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < scores[j].rank; ++k) {
      d.names.push_back("fpc" + std::to_string(j) + "_" + std::to_string(k + 1));
      d.penalized.push_back(1);
      d.fpc_columns.push_back({j, k, false, col++});
    }
  if (options.include_interactions) {
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < scores[j].rank; ++k) {
        d.names.push_back("fpc" + std::to_string(j) + "_" + std::to_string(k + 1) + ":frontal");
        d.penalized.push_back(1);
        d.fpc_columns.push_back({j, k, true, col++});
      }
  }
  d.p = static_cast<int>(d.names.size());
  d.x.assign(static_cast<size_t>(n) * d.p, 0.0);

  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (; c < n_clin; ++c) d.at(i, c) = records[i].clinical[c];
    if (options.include_frontal_main) d.at(i, c++) = records[i].frontal ? 1.0 : 0.0;
  }
  for (const DesignMatrix::FpcColumn& fc : d.fpc_columns) {
    for (int i = 0; i < n; ++i) {
      double score = scores[fc.dim].rank > 0 ? scores[fc.dim].rows[i][fc.k] : 0.0;
      d.at(i, fc.col) = fc.interaction ? (records[i].frontal ? score : 0.0) : score;
    }
  }
  return d;
}

namespace {

struct SurvOrder {
  std::vector<int> order;                     // subjects by time descending
  std::vector<std::pair<int, int>> blocks;    // [begin, end) runs of tied times in `order`
  int n_events = 0;
};

SurvOrder make_order(const std::vector<SurvivalRecord>& records) {
  SurvOrder so;
  const int n = static_cast<int>(records.size());
  so.order.resize(n);
  std::iota(so.order.begin(), so.order.end(), 0);
  std::sort(so.order.begin(), so.order.end(), [&](int a, int b) {
    if (records[a].time != records[b].time) return records[a].time > records[b].time;
    return a < b;
  });
  int b = 0;
  while (b < n) {
    int e = b + 1;
    while (e < n && records[so.order[e]].time == records[so.order[b]].time) ++e;
    so.blocks.emplace_back(b, e);
    b = e;
  }
  for (const SurvivalRecord& r : records) so.n_events += r.event;
  return so;
}

// First- and second-order information of the mean negative log partial
// likelihood in eta space (Breslow ties). u = d nll / d eta, w = the diagonal
// of its Hessian (non-negative).
struct EtaDerivs {
  double value = 0.0;
  std::vector<double> u;
  std::vector<double> w;
};

EtaDerivs eta_derivs(const std::vector<double>& eta, const SurvOrder& so,
                     const std::vector<SurvivalRecord>& records, bool need_second) {
  const int n = static_cast<int>(eta.size());
  EtaDerivs out;
  out.u.assign(n, 0.0);
  if (need_second) out.w.assign(n, 0.0);
  if (so.n_events == 0) return out;

  // Centering eta leaves the partial likelihood and its derivatives
  // unchanged and keeps exp() in range.
  double mean_eta = std::accumulate(eta.begin(), eta.end(), 0.0) / n;
  std::vector<double> ex(n);
  for (int i = 0; i < n; ++i) ex[i] = std::exp(eta[i] - mean_eta);

  // Risk-set denominators per block, walking times downward.
  const int nb = static_cast<int>(so.blocks.size());
  std::vector<double> block_s(nb), block_d(nb);
  double s = 0.0;
  double loglik = 0.0;
  for (int b = 0; b < nb; ++b) {
    auto [begin, end] = so.blocks[b];
    int d = 0;
    for (int k = begin; k < end; ++k) {
      int i = so.order[k];
      s += ex[i];
      if (records[i].event) {
        loglik += eta[i] - mean_eta;
        ++d;
      }
    }
    block_s[b] = s;
    block_d[b] = d;
    if (d > 0) loglik -= d * std::log(s);
  }

  // Suffix sums over event terms: C_i = sum_{events with t_e <= t_i} 1/S_e.
  double cum_c = 0.0, cum_c2 = 0.0;
  for (int b = nb - 1; b >= 0; --b) {
    cum_c += block_d[b] / block_s[b];
    if (need_second) cum_c2 += block_d[b] / (block_s[b] * block_s[b]);
    auto [begin, end] = so.blocks[b];
    for (int k = begin; k < end; ++k) {
      int i = so.order[k];
      out.u[i] = -(records[i].event - ex[i] * cum_c) / n;
      if (need_second) out.w[i] = (ex[i] * cum_c - ex[i] * ex[i] * cum_c2) / n;
    }
  }
  out.value = -loglik / n;
  return out;
}

}  // namespace

LikelihoodValue neg_log_partial_likelihood(const std::vector<double>& beta,
                                           const DesignMatrix& design,
                                           const std::vector<SurvivalRecord>& records) {
  if (static_cast<int>(beta.size()) != design.p)
    throw std::invalid_argument("neg_log_partial_likelihood: beta length mismatch");
  if (static_cast<int>(records.size()) != design.n)
    throw std::invalid_argument("neg_log_partial_likelihood: records/design mismatch");
  SurvOrder so = make_order(records);

  std::vector<double> eta(design.n, 0.0);
  for (int i = 0; i < design.n; ++i)
    for (int j = 0; j < design.p; ++j) eta[i] += design.at(i, j) * beta[j];

  EtaDerivs d = eta_derivs(eta, so, records, false);
  LikelihoodValue out;
  out.value = d.value;
  out.degenerate = so.n_events == 0;
  out.gradient.assign(design.p, 0.0);
  for (int j = 0; j < design.p; ++j) {
    double g = 0.0;
    for (int i = 0; i < design.n; ++i) g += design.at(i, j) * d.u[i];
    out.gradient[j] = g;
  }
  return out;
}

std::vector<double> neg_log_partial_likelihood_hessian(const std::vector<double>& beta,
                                                       const DesignMatrix& design,
                                                       const std::vector<SurvivalRecord>& records) {
  const int n = design.n, p = design.p;
  SurvOrder so = make_order(records);
  std::vector<double> eta(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) eta[i] += design.at(i, j) * beta[j];
  double mean_eta = std::accumulate(eta.begin(), eta.end(), 0.0) / std::max(n, 1);

  std::vector<double> h(static_cast<size_t>(p) * p, 0.0);
  double s = 0.0;
  std::vector<double> sx(p, 0.0), sxx(static_cast<size_t>(p) * p, 0.0);
  for (auto [begin, end] : so.blocks) {
    for (int k = begin; k < end; ++k) {
      int i = so.order[k];
      double e = std::exp(eta[i] - mean_eta);
      s += e;
      for (int a = 0; a < p; ++a) {
        double xa = design.at(i, a);
        sx[a] += e * xa;
        for (int b = 0; b <= a; ++b) sxx[static_cast<size_t>(a) * p + b] += e * xa * design.at(i, b);
      }
    }
    int d = 0;
    for (int k = begin; k < end; ++k) d += records[so.order[k]].event;
    if (d == 0) continue;
    for (int a = 0; a < p; ++a)
      for (int b = 0; b <= a; ++b) {
        double v = d * (sxx[static_cast<size_t>(a) * p + b] / s - sx[a] * sx[b] / (s * s));
        h[static_cast<size_t>(a) * p + b] += v;
      }
  }
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      h[static_cast<size_t>(a) * p + b] = h[static_cast<size_t>(b) * p + a];
  for (double& v : h) v /= n;
  return h;
}

namespace {

struct Standardized {
  std::vector<double> mean, sd;
  std::vector<uint8_t> dropped;  // constant columns
  std::vector<double> xs;        // row-major, dropped columns zeroed
};

Standardized standardize(const DesignMatrix& d) {
  Standardized s;
  s.mean.assign(d.p, 0.0);
  s.sd.assign(d.p, 1.0);
  s.dropped.assign(d.p, 0);
  s.xs.assign(d.x.size(), 0.0);
  for (int j = 0; j < d.p; ++j) {
    double m = 0.0;
    for (int i = 0; i < d.n; ++i) m += d.at(i, j);
    m /= d.n;
    double v = 0.0;
    for (int i = 0; i < d.n; ++i) {
      double c = d.at(i, j) - m;
      v += c * c;
    }
    v /= d.n;
    s.mean[j] = m;
    if (v < 1e-24) {
      s.dropped[j] = 1;
      continue;
    }
    s.sd[j] = std::sqrt(v);
    for (int i = 0; i < d.n; ++i)
      s.xs[static_cast<size_t>(i) * d.p + j] = (d.at(i, j) - m) / s.sd[j];
  }
  return s;
}

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

}  // namespace

CoxFit fit_penalized_cox(const DesignMatrix& design, const std::vector<SurvivalRecord>& records,
                         double lambda, const CoxFitOptions& options) {
  if (lambda < 0.0) throw std::invalid_argument("fit_penalized_cox: lambda must be >= 0");
  const int n = design.n, p = design.p;
  SurvOrder so = make_order(records);
  Standardized st = standardize(design);

  CoxFit fit;
  fit.lambda = lambda;
  fit.dropped = st.dropped;
  fit.beta.assign(p, 0.0);
  fit.eta.assign(n, 0.0);
  if (so.n_events == 0) {
    // Constant likelihood: every beta is a minimizer; report zero.
    fit.degenerate = true;
    fit.converged = true;
    return fit;
  }

  std::vector<double> bs(p, 0.0);  // standardized-scale coefficients
  if (options.warm_start) {
    for (int j = 0; j < p; ++j)
      if (!st.dropped[j]) bs[j] = (*options.warm_start)[j] * st.sd[j];
  }

  auto xs = [&](int i, int j) { return st.xs[static_cast<size_t>(i) * p + j]; };

  std::vector<double> eta(n, 0.0);
  auto recompute_eta = [&] {
    std::fill(eta.begin(), eta.end(), 0.0);
    for (int j = 0; j < p; ++j) {
      if (bs[j] == 0.0) continue;
      for (int i = 0; i < n; ++i) eta[i] += xs(i, j) * bs[j];
    }
  };
  recompute_eta();

  std::vector<double> q(n), den(p);
  bool converged = false;
  int total_outer = 0;
  auto run_irls = [&](bool freeze_penalized, double tol) {
    converged = false;
    for (int outer = 0; outer < options.max_outer && !converged; ++outer, ++total_outer) {
      EtaDerivs dv = eta_derivs(eta, so, records, true);
      // Quadratic model at the current eta: residual-weighted form tracked
      // as q_i = w_i * (z_i - eta_i) = -u_i, so no division by small weights.
      for (int i = 0; i < n; ++i) q[i] = -dv.u[i];
      for (int j = 0; j < p; ++j) {
        double s = 0.0;
        if (!st.dropped[j])
          for (int i = 0; i < n; ++i) s += dv.w[i] * xs(i, j) * xs(i, j);
        den[j] = s;
      }

      double outer_change = 0.0;
      for (int inner = 0; inner < options.max_inner; ++inner) {
        double inner_change = 0.0;
        for (int j = 0; j < p; ++j) {
          if (st.dropped[j] || den[j] <= 0.0) continue;
          if (freeze_penalized && design.penalized[j]) continue;
          double num = bs[j] * den[j];
          for (int i = 0; i < n; ++i) num += xs(i, j) * q[i];
          double nb = design.penalized[j] ? soft_threshold(num, lambda) / den[j] : num / den[j];
          double delta = nb - bs[j];
          if (delta != 0.0) {
            for (int i = 0; i < n; ++i) q[i] -= dv.w[i] * xs(i, j) * delta;
            bs[j] = nb;
            inner_change = std::max(inner_change, std::fabs(delta));
          }
        }
        outer_change = std::max(outer_change, inner_change);
        if (inner_change < tol * 0.1) break;
      }
      recompute_eta();
      if (outer_change < tol) converged = true;
    }
  };

  // When starting with an all-zero penalized block, first converge the
  // unpenalized columns alone (to near machine precision; this block is
  // small). The subsequent full sweeps then evaluate the penalized gradients
  // at the point lambda_max is defined at, so lambda >= lambda_max keeps the
  // whole block at an exact zero.
  bool penalized_all_zero = true;
  for (int j = 0; j < p; ++j)
    if (design.penalized[j] && bs[j] != 0.0) penalized_all_zero = false;
  if (lambda > 0.0 && penalized_all_zero) run_irls(true, std::min(options.tol, 1e-13));
  run_irls(false, options.tol);

  fit.converged = converged;
  fit.iterations = total_outer;
  for (int j = 0; j < p; ++j)
    if (!st.dropped[j]) fit.beta[j] = bs[j] / st.sd[j];
  for (int i = 0; i < n; ++i) {
    double e = 0.0;
    for (int j = 0; j < p; ++j) e += design.at(i, j) * fit.beta[j];
    fit.eta[i] = e;
  }
  fit.neg_log_likelihood = eta_derivs(eta, so, records, false).value;
  return fit;
}

double compute_lambda_max(const DesignMatrix& design, const std::vector<SurvivalRecord>& records) {
  // Fit with the penalized block forced to zero, then read the score
  // gradient of the standardized penalized columns at that point.
  CoxFit base = fit_penalized_cox(design, records, std::numeric_limits<double>::max());
  Standardized st = standardize(design);
  SurvOrder so = make_order(records);

  std::vector<double> eta(design.n, 0.0);
  for (int i = 0; i < design.n; ++i)
    for (int j = 0; j < design.p; ++j) eta[i] += design.at(i, j) * base.beta[j];
  EtaDerivs dv = eta_derivs(eta, so, records, false);

  double lmax = 0.0;
  for (int j = 0; j < design.p; ++j) {
    if (!design.penalized[j] || st.dropped[j]) continue;
    double g = 0.0;
    for (int i = 0; i < design.n; ++i)
      g += st.xs[static_cast<size_t>(i) * design.p + j] * dv.u[i];
    lmax = std::max(lmax, std::fabs(g));
  }
  // Tiny relative headroom so the argmax column's soft threshold lands at an
  // exact zero despite the last residual drift of the base fit.
  return lmax * (1.0 + 1e-10);
}

std::vector<double> lambda_path(double lambda_max, int points, double decades) {
  if (points < 2 || lambda_max <= 0.0) return {lambda_max};
  std::vector<double> path(points);
  double lmin = lambda_max * std::pow(10.0, -decades);
  for (int k = 0; k < points; ++k) {
    double t = static_cast<double>(k) / (points - 1);
    path[k] = std::exp(std::log(lambda_max) * (1 - t) + std::log(lmin) * t);
  }
  return path;
}

std::vector<int> stratified_folds(const std::vector<SurvivalRecord>& records, int n_folds,
                                  uint64_t seed) {
  std::vector<int> events, censored;
  for (int i = 0; i < static_cast<int>(records.size()); ++i)
    (records[i].event ? events : censored).push_back(i);
  Rng rng = Rng::substream(seed, "cv-folds", 0);
  rng.shuffle(events);
  rng.shuffle(censored);
  std::vector<int> fold(records.size(), 0);
  int next = 0;
  for (int i : events) fold[i] = next++ % n_folds;
  for (int i : censored) fold[i] = next++ % n_folds;
  return fold;
}

namespace {

DesignMatrix subset_design(const DesignMatrix& d, const std::vector<int>& rows) {
  DesignMatrix s = d;
  s.n = static_cast<int>(rows.size());
  s.x.assign(static_cast<size_t>(s.n) * d.p, 0.0);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < d.p; ++j) s.at(i, j) = d.at(rows[i], j);
  return s;
}

}  // namespace

CvLambdaResult cv_lambda(const DesignMatrix& design, const std::vector<SurvivalRecord>& records,
                         int n_folds, uint64_t seed, int path_points, double path_decades) {
  const int n = design.n;
  int n_events = 0;
  for (const SurvivalRecord& r : records) n_events += r.event;
  if (n_events < 2) throw std::runtime_error("cv_lambda: fewer than 2 events");

  CvLambdaResult result;
  result.folds_used = n_folds;
  if (n_events < n_folds) {
    result.folds_used = n_events;  // every fold keeps >= 1 event
    result.reduced_folds = true;
  }
  if (n < result.folds_used) result.folds_used = n;

  double lmax = compute_lambda_max(design, records);
  if (lmax <= 0.0) {
    // No penalized signal at all; any lambda gives the same fit.
    result.path = {0.0};
    result.deviance = {0.0};
    result.lambda_star = 0.0;
    return result;
  }
  result.path = lambda_path(lmax, path_points, path_decades);
  result.deviance.assign(result.path.size(), 0.0);

  std::vector<int> fold = stratified_folds(records, result.folds_used, seed);
  std::vector<double> beta_full(design.p, 0.0);

  for (int f = 0; f < result.folds_used; ++f) {
    std::vector<int> train_rows;
    for (int i = 0; i < n; ++i)
      if (fold[i] != f) train_rows.push_back(i);
    DesignMatrix train_design = subset_design(design, train_rows);
    std::vector<SurvivalRecord> train_records;
    train_records.reserve(train_rows.size());
    for (int i : train_rows) train_records.push_back(records[i]);

    CoxFitOptions opts;
    std::vector<double> warm(design.p, 0.0);
    for (size_t k = 0; k < result.path.size(); ++k) {
      opts.warm_start = &warm;
      CoxFit fit = fit_penalized_cox(train_design, train_records, result.path[k], opts);
      warm = fit.beta;
      // Verweij & Van Houwelingen: held-out contribution = full-data log
      // partial likelihood minus train-only, both unscaled.
      double ll_full = -neg_log_partial_likelihood(fit.beta, design, records).value * n;
      double ll_train = -fit.neg_log_likelihood * static_cast<int>(train_rows.size());
      result.deviance[k] += -2.0 * (ll_full - ll_train);
    }
  }

  size_t best = 0;
  for (size_t k = 1; k < result.path.size(); ++k)
    if (result.deviance[k] < result.deviance[best]) best = k;
  result.lambda_star = result.path[best];
  return result;
}

double risk_score(const CoxFit& fit, const DesignMatrix& design, int row) {
  double e = 0.0;
  for (int j = 0; j < design.p; ++j) e += design.at(row, j) * fit.beta[j];
  return e;
}

FunctionalCoefficients functional_coefficients(const CoxFit& fit, const DesignMatrix& design,
                                               const std::array<const FpcaModel*, 3>& models) {
  FunctionalCoefficients out;
  for (int j = 0; j < 3; ++j) {
    const FpcaModel* model = models[j];
    if (!model) continue;
    int max_k = -1;
    for (const DesignMatrix::FpcColumn& fc : design.fpc_columns)
      if (fc.dim == j) max_k = std::max(max_k, fc.k);
    if (max_k + 1 > model->rank)
      throw std::invalid_argument("functional_coefficients: design rank exceeds model rank");
    out.dims[j].grid = model->grid;
    out.dims[j].main.assign(model->grid.cells(), 0.0);
    out.dims[j].frontal.assign(model->grid.cells(), 0.0);
    for (const DesignMatrix::FpcColumn& fc : design.fpc_columns) {
      if (fc.dim != j) continue;
      double b = fit.beta[fc.col];
      if (b == 0.0) continue;
      std::vector<double>& target = fc.interaction ? out.dims[j].frontal : out.dims[j].main;
      const std::vector<double>& phi = model->eigenfunctions[fc.k];
      for (size_t c = 0; c < target.size(); ++c) target[c] += b * phi[c];
    }
  }
  return out;
}

}  // namespace phfcox

#include "phfcox/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phfcox/cubical.hpp"
#include "phfcox/imaging.hpp"
#include "phfcox/parallel.hpp"
#include "phfcox/survstats.hpp"

namespace phfcox {

namespace {

// Un-normalized Gaussian kernel sum over a point cloud, evaluated on the
// pixel grid: points are binned to pixel centers, then convolved separably
// with exp(-t^2 / (2 sigma^2)) truncated at 4 sigma.
struct DensityField {
  int size;
  std::vector<double> values;

  explicit DensityField(int size_) : size(size_), values(static_cast<size_t>(size_) * size_, 0.0) {}

  void add_points(const std::vector<std::pair<double, double>>& pts) {
    double half = size / 2.0;
    for (auto [px, py] : pts) {
      int x = static_cast<int>(std::floor(px + half));
      int y = static_cast<int>(std::floor(py + half));
      if (x < 0 || x >= size || y < 0 || y >= size) continue;  // off-image draws vanish
      values[static_cast<size_t>(y) * size + x] += 1.0;
    }
  }

  void smooth(double sigma) {
    int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    for (int t = -radius; t <= radius; ++t)
      kernel[t + radius] = std::exp(-(t * t) / (2.0 * sigma * sigma));
    std::vector<double> tmp(values.size(), 0.0);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double v = values[static_cast<size_t>(y) * size + x];
        if (v == 0.0) continue;
        int lo = std::max(0, x - radius), hi = std::min(size - 1, x + radius);
        for (int u = lo; u <= hi; ++u)
          tmp[static_cast<size_t>(y) * size + u] += v * kernel[u - x + radius];
      }
    std::fill(values.begin(), values.end(), 0.0);
    for (int x = 0; x < size; ++x)
      for (int y = 0; y < size; ++y) {
        double v = tmp[static_cast<size_t>(y) * size + x];
        if (v == 0.0) continue;
        int lo = std::max(0, y - radius), hi = std::min(size - 1, y + radius);
        for (int u = lo; u <= hi; ++u)
          values[static_cast<size_t>(u) * size + x] += v * kernel[u - y + radius];
      }
  }

  void threshold_into(BinaryImage& mask, double scale, double cut) const {
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        if (scale * values[static_cast<size_t>(y) * size + x] >= cut) mask.at(x, y) = 1;
  }
};

std::vector<std::pair<double, double>> draw_cloud(Rng& rng, int n, double cx, double cy,
                                                  double sd) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.emplace_back(cx + sd * rng.normal(), cy + sd * rng.normal());
  return pts;
}

size_t mask_area(const BinaryImage& img) { return img.count_tumor(); }

}  // namespace

BinaryImage generate_group_a(Rng& rng, int size, const GeneratorTuning& t) {
  for (int attempt = 0; attempt < t.max_retries; ++attempt) {
    BinaryImage mask(size, size);

    DensityField main(size);
    main.add_points(draw_cloud(rng, t.a_main_points, 0.0, 0.0, t.a_main_sd * t.unit_px));
    main.smooth(t.a_main_kernel);
    main.threshold_into(mask, t.a_main_scale, t.a_main_threshold);

    DensityField debris(size);
    debris.add_points(draw_cloud(rng, t.a_debris_points, 0.0, 0.0, t.a_debris_sd * t.unit_px));
    debris.smooth(t.a_debris_kernel);
    debris.threshold_into(mask, t.a_debris_scale, t.a_debris_threshold);

    if (mask_area(mask) > 0 && mask_area(mask) < mask.pixels.size()) return mask;
  }
  throw std::runtime_error("generate_group_a: empty mask after retries");
}

BinaryImage generate_group_b(Rng& rng, int size, const GeneratorTuning& t) {
  for (int attempt = 0; attempt < t.max_retries; ++attempt) {
    BinaryImage mask(size, size);

    // Means approximately aligned along a random line through the center.
    double angle = rng.uniform(0.0, M_PI);
    double ux = std::cos(angle), uy = std::sin(angle);
    double spacing = t.b_mean_spacing * t.unit_px;
    std::vector<std::pair<double, double>> means;
    for (int i = 0; i < t.b_means; ++i) {
      double offset = (i - (t.b_means - 1) / 2.0) * spacing;
      means.emplace_back(offset * ux + t.b_mean_jitter * rng.normal(),
                         offset * uy + t.b_mean_jitter * rng.normal());
    }

    DensityField field(size);
    for (auto [mx, my] : means)
      field.add_points(draw_cloud(rng, t.b_cluster_points, mx, my, t.b_cluster_sd * t.unit_px));
    for (auto [mx, my] : means)
      field.add_points(draw_cloud(rng, t.b_fragment_points, mx, my, t.b_fragment_sd * t.unit_px));
    field.smooth(t.b_kernel);
    field.threshold_into(mask, t.b_scale, t.b_threshold);

    if (mask_area(mask) > 0 && mask_area(mask) < mask.pixels.size()) return mask;
  }
  throw std::runtime_error("generate_group_b: empty mask after retries");
}

double planted_log_hazard(int group, bool frontal) {
  if (group == 1) return frontal ? 0.8 : 0.4;
  return frontal ? -0.2 : 0.0;
}

std::pair<double, int> simulate_survival(int group, bool frontal, const SimConfig& config,
                                         double censor_rate, Rng& rng) {
  double hazard = config.baseline_rate * std::exp(planted_log_hazard(group, frontal));
  double t_event = -std::log(rng.uniform_pos()) / hazard;
  double t_censor = -std::log(rng.uniform_pos()) / censor_rate;
  if (t_event <= t_censor) return {t_event, 1};
  return {t_censor, 0};
}

double calibrate_censoring_rate(const SimConfig& config) {
  // Common random numbers keep the censoring fraction monotone in the rate,
  // so plain bisection converges.
  const int draws = 100000;
  Rng rng = Rng::substream(config.seed, "censor-calibration", 0);
  struct Draw {
    double log_u_event, log_u_censor, hazard;
  };
  std::vector<Draw> sample(draws);
  for (Draw& d : sample) {
    int group = rng.uniform() < config.group_b_fraction ? 1 : 0;
    bool frontal = rng.uniform() < config.frontal_fraction;
    d.hazard = config.baseline_rate * std::exp(planted_log_hazard(group, frontal));
    d.log_u_event = -std::log(rng.uniform_pos());
    d.log_u_censor = -std::log(rng.uniform_pos());
  }
  auto censored_fraction = [&](double rate) {
    int censored = 0;
    for (const Draw& d : sample)
      censored += (d.log_u_censor / rate) < (d.log_u_event / d.hazard);
    return static_cast<double>(censored) / draws;
  };
  double lo = 1e-9, hi = 1e-1;
  for (int it = 0; it < 60; ++it) {
    double mid = std::sqrt(lo * hi);
    if (censored_fraction(mid) < config.censoring_rate)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<SimSubject> generate_dataset(const SimConfig& config, double censor_rate, Rng& rng) {
  const int n = config.n_subjects;
  const int n_b = static_cast<int>(std::lround(n * config.group_b_fraction));
  const int n_a = n - n_b;
  const int f_a = static_cast<int>(std::lround(n_a * config.frontal_fraction));
  const int f_b = static_cast<int>(std::lround(n_b * config.frontal_fraction));

  std::vector<SimSubject> subjects;
  subjects.reserve(n);
  for (int i = 0; i < n; ++i) {
    SimSubject s;
    s.group = i >= n_a;
    int within = s.group ? i - n_a : i;
    s.frontal = within < (s.group ? f_b : f_a);
    s.image = s.group ? generate_group_b(rng, config.image_size, config.tuning)
                      : generate_group_a(rng, config.image_size, config.tuning);
    auto [time, event] = simulate_survival(s.group, s.frontal, config, censor_rate, rng);
    s.time = time;
    s.event = event;
    subjects.push_back(std::move(s));
  }
  return subjects;
}

SubjectData extract_subject(const SimSubject& subject, int index) {
  SubjectData data;
  data.subject_id = "sim" + std::to_string(index);
  SignedDistanceVolume sdv = sedt2(subject.image);
  auto diagrams = compute_persistence(build_filtration(sdv));
  data.diagrams = diagrams;
  data.record.subject_id = data.subject_id;
  data.record.time = subject.time;
  data.record.event = subject.event;
  data.record.frontal = subject.frontal;
  return data;
}

SimulationReport run_simulation(const SimConfig& config) {
  SimulationReport report;
  report.config = config;
  report.censor_rate_used = calibrate_censoring_rate(config);
  report.datasets.resize(config.n_datasets);

  report.grid.x_min = config.grid_lo;
  report.grid.x_max = config.grid_hi;
  report.grid.y_min = config.grid_lo;
  report.grid.y_max = config.grid_hi;
  report.grid.nx = config.grid_res;
  report.grid.ny = config.grid_res;
  for (int j = 0; j < 2; ++j) {
    report.avg_beta_main[j].assign(report.grid.cells(), 0.0);
    report.avg_beta_frontal[j].assign(report.grid.cells(), 0.0);
  }

  // Per-dataset coefficient surfaces, reduced in dataset order afterwards.
  std::vector<std::array<std::vector<double>, 2>> beta_main(config.n_datasets);
  std::vector<std::array<std::vector<double>, 2>> beta_frontal(config.n_datasets);

  PipelineOptions base_opts;
  base_opts.sigma = {config.sigma, config.sigma, config.sigma};
  base_opts.fpca_c = config.fpca_c;
  base_opts.cv_folds = config.cv_folds;
  base_opts.design.clinical_names = {};
  base_opts.design.include_frontal_main = false;  // the planted model has no main effect
  base_opts.design.include_interactions = true;
  base_opts.fixed_grids = {report.grid, report.grid, report.grid};

  parallel_for(config.n_datasets, config.workers, [&](int d) {
    DatasetOutcome& out = report.datasets[d];
    out.index = d;
    try {
      Rng rng = Rng::substream(config.seed, "dataset", d);
      std::vector<SimSubject> sim = generate_dataset(config, report.censor_rate_used, rng);

      std::vector<SubjectData> subjects;
      subjects.reserve(sim.size());
      double area_a = 0, area_b = 0;
      int count_a = 0, count_b = 0;
      for (size_t i = 0; i < sim.size(); ++i) {
        subjects.push_back(extract_subject(sim[i], static_cast<int>(i)));
        size_t area = sim[i].image.count_tumor();
        if (sim[i].group) {
          area_b += area;
          ++count_b;
        } else {
          area_a += area;
          ++count_a;
        }
        out.n_censored += sim[i].event == 0;
      }
      out.mean_area_a = area_a / std::max(count_a, 1);
      out.mean_area_b = area_b / std::max(count_b, 1);

      FittedPipeline fitted = fit_pipeline(subjects, base_opts, Rng::substream(config.seed, "cv", d).next_u64());
      out.lambda_star = fitted.fit.lambda;

      LoocvResult loocv = loocv_risks(subjects, base_opts, fitted.fit.lambda, 1);
      std::vector<double> risks;
      std::vector<SurvivalRecord> records;
      double sum_bf = 0, sum_bn = 0, sum_af = 0, sum_an = 0;
      int n_bf = 0, n_bn = 0, n_af = 0, n_an = 0;
      for (size_t i = 0; i < subjects.size(); ++i) {
        if (std::isnan(loocv.eta[i])) continue;
        risks.push_back(loocv.eta[i]);
        records.push_back(subjects[i].record);
        if (sim[i].group) {
          if (sim[i].frontal) {
            sum_bf += loocv.eta[i];
            ++n_bf;
          } else {
            sum_bn += loocv.eta[i];
            ++n_bn;
          }
        } else if (sim[i].frontal) {
          sum_af += loocv.eta[i];
          ++n_af;
        } else {
          sum_an += loocv.eta[i];
          ++n_an;
        }
      }
      RiskSplit split = median_risk_split(risks);
      std::vector<SurvivalRecord> high, low;
      for (int i : split.high) high.push_back(records[i]);
      for (int i : split.low) low.push_back(records[i]);
      LogRankResult lr = log_rank_test(high, low);
      out.chi_square = lr.chi_square;
      out.logrank_p = lr.p_value;
      out.mean_eta_b_frontal = n_bf ? sum_bf / n_bf : 0;
      out.mean_eta_b_nonfrontal = n_bn ? sum_bn / n_bn : 0;
      out.mean_eta_a_frontal = n_af ? sum_af / n_af : 0;
      out.mean_eta_a_nonfrontal = n_an ? sum_an / n_an : 0;
      out.ordering_ok = out.mean_eta_b_frontal > out.mean_eta_b_nonfrontal &&
                        out.mean_eta_b_nonfrontal > out.mean_eta_a_nonfrontal;

      for (int j = 0; j < 2; ++j) {
        beta_main[d][j] = fitted.fcoef.dims[j].main;
        beta_frontal[d][j] = fitted.fcoef.dims[j].frontal;
        if (beta_main[d][j].empty()) beta_main[d][j].assign(report.grid.cells(), 0.0);
        if (beta_frontal[d][j].empty()) beta_frontal[d][j].assign(report.grid.cells(), 0.0);
      }
    } catch (const std::exception& e) {
      out.failed = true;
      out.note = e.what();
    }
  });

  int ok = 0, significant = 0, ordered = 0;
  for (int d = 0; d < config.n_datasets; ++d) {
    const DatasetOutcome& out = report.datasets[d];
    if (out.failed) {
      ++report.n_failed;
      continue;
    }
    ++ok;
    significant += out.logrank_p < 0.05;
    ordered += out.ordering_ok;
    for (int j = 0; j < 2; ++j) {
      for (size_t c = 0; c < report.grid.cells(); ++c) {
        report.avg_beta_main[j][c] += beta_main[d][j][c];
        report.avg_beta_frontal[j][c] += beta_frontal[d][j][c];
      }
    }
  }
  if (ok > 0) {
    for (int j = 0; j < 2; ++j)
      for (size_t c = 0; c < report.grid.cells(); ++c) {
        report.avg_beta_main[j][c] /= ok;
        report.avg_beta_frontal[j][c] /= ok;
      }
    report.frac_significant = static_cast<double>(significant) / ok;
    report.frac_ordering = static_cast<double>(ordered) / ok;
  }
  return report;
}

}  // namespace phfcox

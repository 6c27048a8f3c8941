#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "phfcox/pipeline.hpp"
#include "phfcox/rng.hpp"
#include "phfcox/volume.hpp"

namespace phfcox {

/// Synthetic-tumor generator settings. Point-cloud standard deviations are
/// the published design values scaled into pixels (unit_px pixels per design
/// unit); density scales were calibrated once against the target mean area
/// of ~2000 px and then frozen.
struct GeneratorTuning {
  double unit_px = 10.0;

  // Group A: one big central mass plus scattered debris.
  int a_main_points = 30;
  double a_main_sd = 1.25;        // design units
  double a_main_kernel = 7.0;     // pixels
  double a_main_threshold = 0.0025;
  double a_main_scale = 1.341e-3;
  int a_debris_points = 30;
  double a_debris_sd = 5.0;       // design units
  double a_debris_kernel = 2.0;   // pixels
  double a_debris_threshold = 0.02;
  double a_debris_scale = 3.0e-2;

  // Group B: six collinear small masses plus diffuse fragments, one summed
  // density field thresholded once.
  int b_means = 6;
  double b_mean_spacing = 2.2;    // design units between consecutive means
  double b_mean_jitter = 1.0;     // pixels
  int b_cluster_points = 2000;
  double b_cluster_sd = 0.4;      // design units
  int b_fragment_points = 500;
  double b_fragment_sd = 4.8;     // design units
  double b_kernel = 2.0;          // pixels
  double b_threshold = 1.0;
  double b_scale = 1.887e-2;

  int max_retries = 20;
};

struct SimConfig {
  int image_size = 200;
  int n_subjects = 140;
  double group_b_fraction = 0.5;
  double frontal_fraction = 0.30;
  double censoring_rate = 0.15;
  double baseline_rate = 1.0 / 3000.0;
  int n_datasets = 300;
  uint64_t seed = 0;
  GeneratorTuning tuning;

  // Model settings for the recovery pipeline.
  double sigma = 2.0;  // shared smoothing for dims 0 and 1
  double fpca_c = 0.9;
  int cv_folds = 10;
  int workers = 1;
  // Common surface grid across datasets so functional coefficients average.
  double grid_lo = -40.0, grid_hi = 80.0;
  int grid_res = 120;
};

struct SimSubject {
  BinaryImage image;
  int group = 0;  // 0 = A, 1 = B
  bool frontal = false;
  double time = 0.0;
  int event = 1;
};

BinaryImage generate_group_a(Rng& rng, int size, const GeneratorTuning& tuning = {});
BinaryImage generate_group_b(Rng& rng, int size, const GeneratorTuning& tuning = {});

/// Log hazard ratio of Eq-style group-by-location classes:
/// 0.8*(B,frontal) + 0.4*(B,non-frontal) - 0.2*(A,frontal).
double planted_log_hazard(int group, bool frontal);

/// Exponential censoring rate that hits the target marginal censoring
/// probability under the configured class mix, found by bisection on 1e5
/// common random draws.
double calibrate_censoring_rate(const SimConfig& config);

/// One subject's observed time and event indicator under the planted hazard
/// and an exponential censoring time with the given rate.
std::pair<double, int> simulate_survival(int group, bool frontal, const SimConfig& config,
                                         double censor_rate, Rng& rng);

/// Full dataset: exact group split, exact per-group frontal counts, images,
/// survival.
std::vector<SimSubject> generate_dataset(const SimConfig& config, double censor_rate, Rng& rng);

struct DatasetOutcome {
  int index = 0;
  bool failed = false;
  std::string note;
  double lambda_star = 0.0;
  double logrank_p = 1.0;
  double chi_square = 0.0;
  // Mean held-out linear predictor by true class.
  double mean_eta_b_frontal = 0.0;
  double mean_eta_b_nonfrontal = 0.0;
  double mean_eta_a_frontal = 0.0;
  double mean_eta_a_nonfrontal = 0.0;
  bool ordering_ok = false;  // B-frontal > B-non-frontal > A-non-frontal
  double mean_area_a = 0.0, mean_area_b = 0.0;
  int n_censored = 0;
};

struct SimulationReport {
  SimConfig config;
  double censor_rate_used = 0.0;
  std::vector<DatasetOutcome> datasets;
  int n_failed = 0;
  double frac_significant = 0.0;  // log-rank p < 0.05 among successes
  double frac_ordering = 0.0;
  // Functional coefficient surfaces averaged over successful datasets,
  // dims 0 and 1.
  SurfaceGrid grid;
  std::array<std::vector<double>, 2> avg_beta_main;
  std::array<std::vector<double>, 2> avg_beta_frontal;
};

SimulationReport run_simulation(const SimConfig& config);

/// SubjectData (diagram + survival row) for one simulated subject.
SubjectData extract_subject(const SimSubject& subject, int index);

}  // namespace phfcox

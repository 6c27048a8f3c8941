#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "phfcox/cox.hpp"
#include "phfcox/diagram.hpp"
#include "phfcox/fpca.hpp"
#include "phfcox/surface.hpp"

namespace phfcox {

/// One subject after feature extraction: raw persistence diagrams (essential
/// deaths still +inf) plus the survival row.
struct SubjectData {
  std::string subject_id;
  std::array<PersistenceDiagram, 3> diagrams;
  SurvivalRecord record;
};

struct PipelineOptions {
  std::array<double, 3> sigma = {1.0, 1.0, 1.0};
  double fpca_c = 0.9;
  int grid_nx = 50, grid_ny = 50;
  double grid_pad = 3.0;
  // When set, these grids are used as-is for every dimension instead of
  // pooled bounds (and are then shared by cross-validation folds).
  std::optional<std::array<SurfaceGrid, 3>> fixed_grids;
  DesignOptions design;
  int cv_folds = 10;
  int path_points = 50;
  double path_decades = 2.0;
};

/// Full-data fit: surfaces, per-dimension FPCA, design, penalized Cox at a
/// profiled (or supplied) lambda, and reconstructed functional coefficients.
struct FittedPipeline {
  std::array<SurfaceGrid, 3> grids;
  std::array<bool, 3> dim_active = {false, false, false};
  std::array<FpcaModel, 3> fpca;
  std::array<ScoreMatrix, 3> scores;
  DesignMatrix design;
  CvLambdaResult cv;  // path/deviance empty when lambda was supplied
  CoxFit fit;
  FunctionalCoefficients fcoef;
};

/// Regularize diagrams, rasterize, fit FPCA per dimension, build the design,
/// select lambda by 10-fold CV deviance (unless `fixed_lambda`), and fit.
FittedPipeline fit_pipeline(const std::vector<SubjectData>& subjects,
                            const PipelineOptions& options, uint64_t seed,
                            std::optional<double> fixed_lambda = std::nullopt);

/// Design row of a new subject against an existing fit (projection onto the
/// stored FPCA bases). Ordering matches FittedPipeline.design.
std::vector<double> project_subject(const FittedPipeline& fitted, const PipelineOptions& options,
                                    const SubjectData& subject);

/// Leave-one-out linear predictors: for each subject, grids, FPCA, and the
/// penalized Cox fit are recomputed on the other n-1 (lambda frozen), and the
/// held-out subject is projected through that fold's bases. Subjects whose
/// fold fit fails get NaN and a note in `failures`.
struct LoocvResult {
  std::vector<double> eta;
  std::vector<std::string> failures;
};
LoocvResult loocv_risks(const std::vector<SubjectData>& subjects, const PipelineOptions& options,
                        double lambda, int workers = 1);

}  // namespace phfcox

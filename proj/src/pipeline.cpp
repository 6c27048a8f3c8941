#include "phfcox/pipeline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "phfcox/parallel.hpp"

namespace phfcox {

namespace {

struct Extracted {
  std::array<SurfaceGrid, 3> grids;
  std::array<bool, 3> active = {false, false, false};
  std::array<std::vector<PersistenceSurface>, 3> surfaces;  // [dim][subject]
  std::vector<SurvivalRecord> records;
};

// Regularize and rasterize every subject. Grid bounds come from the pool
// subset (all subjects when null); a dimension with an empty pool is
// inactive and contributes no columns.
Extracted extract(const std::vector<SubjectData>& subjects, const PipelineOptions& options,
                  const std::vector<int>* pool = nullptr) {
  Extracted ex;
  const int n = static_cast<int>(subjects.size());
  std::vector<int> all;
  if (!pool) {
    all.resize(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    pool = &all;
  }

  std::array<std::vector<PersistenceDiagram>, 3> reg;
  for (int j = 0; j < 3; ++j) {
    reg[j].reserve(n);
    for (int i = 0; i < n; ++i) reg[j].push_back(regularize_infinite(subjects[i].diagrams[j]));
  }

  for (int j = 0; j < 3; ++j) {
    if (options.fixed_grids) {
      ex.grids[j] = (*options.fixed_grids)[j];
      ex.active[j] = true;  // grid given; emptiness shows up as a zero surface
    } else {
      std::vector<const PersistenceDiagram*> pool_diagrams;
      for (int i : *pool)
        if (!reg[j][i].empty()) pool_diagrams.push_back(&reg[j][i]);
      if (pool_diagrams.empty()) continue;  // dimension carries no features
      ex.grids[j] = pooled_grid_bounds(pool_diagrams, options.sigma[j], options.grid_nx,
                                       options.grid_ny, options.grid_pad);
      ex.active[j] = true;
    }
    ex.surfaces[j].reserve(n);
    for (int i = 0; i < n; ++i)
      ex.surfaces[j].push_back(rasterize_surface(reg[j][i], ex.grids[j], options.sigma[j]));
  }

  ex.records.reserve(n);
  for (const SubjectData& s : subjects) ex.records.push_back(s.record);
  return ex;
}

std::vector<const PersistenceSurface*> surface_ptrs(const std::vector<PersistenceSurface>& s,
                                                    const std::vector<int>* subset = nullptr) {
  std::vector<const PersistenceSurface*> p;
  if (subset) {
    for (int i : *subset) p.push_back(&s[i]);
  } else {
    for (const auto& x : s) p.push_back(&x);
  }
  return p;
}

}  // namespace

FittedPipeline fit_pipeline(const std::vector<SubjectData>& subjects,
                            const PipelineOptions& options, uint64_t seed,
                            std::optional<double> fixed_lambda) {
  const int n = static_cast<int>(subjects.size());
  if (n < 3) throw std::invalid_argument("fit_pipeline: need at least 3 subjects");

  Extracted ex = extract(subjects, options);

  FittedPipeline out;
  out.grids = ex.grids;
  out.dim_active = ex.active;
  for (int j = 0; j < 3; ++j) {
    out.scores[j].dim = j;
    out.scores[j].rank = 0;
    out.scores[j].rows.assign(n, {});
    if (!ex.active[j]) continue;
    out.fpca[j] = fit_fpca(surface_ptrs(ex.surfaces[j]), options.fpca_c);
    if (out.fpca[j].degenerate || out.fpca[j].rank == 0) continue;
    out.scores[j].rank = out.fpca[j].rank;
    for (int i = 0; i < n; ++i)
      out.scores[j].rows[i] = project_scores(ex.surfaces[j][i], out.fpca[j]);
  }

  out.design = build_design(out.scores, ex.records, options.design);
  double lambda;
  if (fixed_lambda) {
    lambda = *fixed_lambda;
  } else {
    out.cv = cv_lambda(out.design, ex.records, options.cv_folds, seed, options.path_points,
                       options.path_decades);
    lambda = out.cv.lambda_star;
  }
  out.fit = fit_penalized_cox(out.design, ex.records, lambda);
  out.fcoef = functional_coefficients(
      out.fit, out.design, {&out.fpca[0], &out.fpca[1], &out.fpca[2]});
  return out;
}

std::vector<double> project_subject(const FittedPipeline& fitted, const PipelineOptions& options,
                                    const SubjectData& subject) {
  std::array<ScoreMatrix, 3> scores;
  for (int j = 0; j < 3; ++j) {
    scores[j].dim = j;
    scores[j].rank = fitted.scores[j].rank;
    if (scores[j].rank == 0) {
      scores[j].rows = {std::vector<double>{}};
      continue;
    }
    PersistenceDiagram reg = regularize_infinite(subject.diagrams[j]);
    PersistenceSurface surf = rasterize_surface(reg, fitted.grids[j], options.sigma[j]);
    scores[j].rows = {project_scores(surf, fitted.fpca[j])};
  }
  DesignMatrix row = build_design(scores, {subject.record}, options.design);
  std::vector<double> out(row.p);
  for (int j = 0; j < row.p; ++j) out[j] = row.at(0, j);
  return out;
}

namespace {

// One leave-one-out fold on the slow path: grids and FPCA recomputed from
// the n-1 training subjects, held-out subject projected through them.
double loocv_fold_recompute(const std::vector<SubjectData>& subjects,
                            const PipelineOptions& options, double lambda, int held) {
  const int n = static_cast<int>(subjects.size());
  std::vector<int> train;
  train.reserve(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != held) train.push_back(i);

  Extracted ex = extract(subjects, options, &train);
  std::array<ScoreMatrix, 3> scores;
  std::array<FpcaModel, 3> models;
  for (int j = 0; j < 3; ++j) {
    scores[j].dim = j;
    scores[j].rank = 0;
    scores[j].rows.assign(train.size(), {});
    if (!ex.active[j]) continue;
    models[j] = fit_fpca(surface_ptrs(ex.surfaces[j], &train), options.fpca_c);
    if (models[j].degenerate || models[j].rank == 0) continue;
    scores[j].rank = models[j].rank;
    for (size_t p = 0; p < train.size(); ++p)
      scores[j].rows[p] = project_scores(ex.surfaces[j][train[p]], models[j]);
  }
  std::vector<SurvivalRecord> train_records;
  train_records.reserve(train.size());
  for (int i : train) train_records.push_back(subjects[i].record);

  DesignMatrix design = build_design(scores, train_records, options.design);
  CoxFit fit = fit_penalized_cox(design, train_records, lambda);

  // Held-out design row through the fold's bases.
  std::array<ScoreMatrix, 3> held_scores;
  for (int j = 0; j < 3; ++j) {
    held_scores[j].dim = j;
    held_scores[j].rank = scores[j].rank;
    if (scores[j].rank == 0) {
      held_scores[j].rows = {std::vector<double>{}};
      continue;
    }
    held_scores[j].rows = {project_scores(ex.surfaces[j][held], models[j])};
  }
  DesignMatrix row = build_design(held_scores, {subjects[held].record}, options.design);
  double eta = 0.0;
  for (int j = 0; j < row.p; ++j) eta += row.at(0, j) * fit.beta[j];
  return eta;
}

}  // namespace

LoocvResult loocv_risks(const std::vector<SubjectData>& subjects, const PipelineOptions& options,
                        double lambda, int workers) {
  const int n = static_cast<int>(subjects.size());
  if (n < 3) throw std::invalid_argument("loocv_risks: need at least 3 subjects");

  LoocvResult result;
  result.eta.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failures(n);

  if (!options.fixed_grids) {
    parallel_for(n, workers, [&](int held) {
      try {
        result.eta[held] = loocv_fold_recompute(subjects, options, lambda, held);
      } catch (const std::exception& e) {
        failures[held] = subjects[held].subject_id + ": " + e.what();
      }
    });
  } else {
    // Shared fixed grids: rasterize once, refit FPCA per fold from the raw
    // Gram matrix.
    Extracted ex = extract(subjects, options);
    std::array<std::optional<FpcaGramCache>, 3> caches;
    for (int j = 0; j < 3; ++j)
      if (ex.active[j]) caches[j].emplace(surface_ptrs(ex.surfaces[j]));

    parallel_for(n, workers, [&](int held) {
      try {
        std::vector<int> train;
        train.reserve(n - 1);
        for (int i = 0; i < n; ++i)
          if (i != held) train.push_back(i);

        std::array<ScoreMatrix, 3> scores;
        std::array<std::vector<double>, 3> held_scores;
        for (int j = 0; j < 3; ++j) {
          scores[j].dim = j;
          scores[j].rank = 0;
          scores[j].rows.assign(train.size(), {});
          if (!ex.active[j]) continue;
          FpcaGramCache::SubsetFit fit = caches[j]->fit_subset(train, options.fpca_c);
          if (fit.degenerate || fit.rank == 0) continue;
          scores[j].rank = fit.rank;
          scores[j].rows = fit.scores;
          held_scores[j] = caches[j]->project(fit, held);
        }
        std::vector<SurvivalRecord> train_records;
        train_records.reserve(train.size());
        for (int i : train) train_records.push_back(subjects[i].record);
        DesignMatrix design = build_design(scores, train_records, options.design);
        CoxFit fit = fit_penalized_cox(design, train_records, lambda);

        std::array<ScoreMatrix, 3> hs;
        for (int j = 0; j < 3; ++j) {
          hs[j].dim = j;
          hs[j].rank = scores[j].rank;
          hs[j].rows = {scores[j].rank > 0 ? held_scores[j] : std::vector<double>{}};
        }
        DesignMatrix row = build_design(hs, {subjects[held].record}, options.design);
        double eta = 0.0;
        for (int j = 0; j < row.p; ++j) eta += row.at(0, j) * fit.beta[j];
        result.eta[held] = eta;
      } catch (const std::exception& e) {
        failures[held] = subjects[held].subject_id + ": " + e.what();
      }
    });
  }

  for (const std::string& f : failures)
    if (!f.empty()) result.failures.push_back(f);
  return result;
}

}  // namespace phfcox

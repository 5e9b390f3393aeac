#pragma once

#include <optional>

#include "sysid/estimators.hpp"
#include "sysid/filtering.hpp"

namespace sysid {

enum class FilterMode { Threshold, Ranking };

struct TwoStageConfig {
  FilterMode mode = FilterMode::Ranking;
  ThresholdParams threshold;
  RankingParams ranking;
  LadConfig lad_cfg;
  std::size_t min_retained = 0;  // 0 -> default n + 5

  void validate() const;
};

struct BoundParams {
  double sigma_w = 1.0, sigma_v = 1.0, lambda = 1.0, rho = 0.5, p = 0.0, delta = 0.05;
  double kappa = 1.0, gamma_const = 1.0;  // unknown absolute constants, user-supplied

  void validate() const;
};

struct PipelineReport {
  Matrix A_ring, A_hat;
  FilterResult filter;
  std::optional<DetectionMetrics> detection;
  double stage1_error = -1.0, stage2_error = -1.0;  // opnorm vs truth; -1 when truth absent
  Vec stage1_row_errs, stage2_row_errs;
  std::vector<SolverReport> stage1_reports;
  std::vector<std::size_t> retained_sizes;  // |T_i| per node
};

// Stage I: row-wise LAD on the full trajectory; filtering; Stage II: row-wise
// LS on each retained set. truth/schedule may be null (no error/detection
// fields then). |T_i| below min_retained is a hard error, never a fallback.
PipelineReport two_stage(const std::vector<Vec>& states, const TwoStageConfig& cfg,
                         const SystemMatrix* truth, const AttackSchedule* schedule,
                         bool parallel = true);

struct ErrorReport {
  double opnorm_err = 0.0;
  Vec row_errs;
};

ErrorReport estimation_error(const Matrix& A_hat, const Matrix& A_true);

// kappa (sigma_w + sigma_v)^4 sigma_w / (lambda^5 (1 - 2p))
double stage1_bound(const BoundParams& bp);

struct Stage2Bounds {
  double stat_term = 0.0;
  double misclass_term = 0.0;
  double tail_term = 0.0;
};

struct GammaNorms {
  double sum_sq = 0.0;  // sum of ||x_t||^2 over misclassified false negatives
  double sum = 0.0;     // sum of ||x_t||
};

// The three displayed error terms (implied constants = 1): statistical,
// misclassification, truncation tail.
Stage2Bounds stage2_bound_terms(const BoundParams& bp, double alpha1, double alpha2,
                                const GammaNorms& gamma_norms, std::size_t T, std::size_t n);

}  // namespace sysid

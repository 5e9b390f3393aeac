#pragma once

#include <cstddef>
#include <vector>

#include "sysid/numerics.hpp"
#include "sysid/simulate.hpp"

namespace sysid {

struct ThresholdParams {
  double beta1 = 0.0;  // slope on ||x_t||
  double beta2 = 0.0;  // absolute offset

  void validate() const;
};

enum class RankingMode { Quantile, FixedCutoff };

struct RankingParams {
  RankingMode mode = RankingMode::Quantile;
  double q1 = 1.0;  // middle-norm fraction (Quantile)
  double q2 = 1.0;  // retained fraction within the middle set (Quantile)
  double norm_lo = 0.0, norm_hi = 0.0, ratio_max = 0.0;  // FixedCutoff

  void validate() const;
};

struct FilterResult {
  std::size_t T = 0;
  std::vector<std::vector<std::size_t>> retained;  // T_i per node, ascending
  std::vector<std::vector<double>> residuals;      // [n][T], |x_{t+1}^(i) - a_i^T x_t|
  Vec norm_used;                                   // ||x_t||_2 per t
  std::vector<std::size_t> middle;                 // the middle-norm set C (all t for threshold mode)
};

struct DetectionMetrics {
  std::vector<std::size_t> tp, fp, fn, tn;          // per node
  std::vector<std::vector<std::size_t>> gamma;      // false-negative sets per node
};

// Keep t iff |x_{t+1}^(i) - a_i^T x_t| <= beta1 ||x_t|| + beta2 (boundary kept).
FilterResult filter_threshold(const std::vector<Vec>& states, const Matrix& A_ring,
                              const ThresholdParams& params);

// Quantile: middle q1-fraction of state norms, then the floor(q2 |C|) smallest
// residual/norm ratios per node. FixedCutoff: norm window + ratio threshold.
// Ties broken by smaller time index.
FilterResult filter_ranking(const std::vector<Vec>& states, const Matrix& A_ring,
                            const RankingParams& params);

// TP = discarded & attacked, FP = discarded & clean, FN = retained & attacked
// (the set Gamma_i), TN = retained & clean; totals sum to T per node.
DetectionMetrics detection_metrics(const FilterResult& result, const AttackSchedule& truth);

}  // namespace sysid

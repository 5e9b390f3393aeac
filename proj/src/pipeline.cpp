#include "sysid/pipeline.hpp"

#include <cmath>

#include "sysid/parallel.hpp"

namespace sysid {

void TwoStageConfig::validate() const {
  if (mode == FilterMode::Threshold)
    threshold.validate();
  else
    ranking.validate();
}

void BoundParams::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) fail(ErrorCode::ConfigError, "BoundParams: rho in (0,1)");
  if (!(p >= 0.0 && p < 0.5)) fail(ErrorCode::ConfigError, "BoundParams: p in [0,0.5)");
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorCode::ConfigError, "BoundParams: delta in (0,1]");
  if (!(lambda > 0.0)) fail(ErrorCode::ConfigError, "BoundParams: lambda > 0");
}

PipelineReport two_stage(const std::vector<Vec>& states, const TwoStageConfig& cfg,
                         const SystemMatrix* truth, const AttackSchedule* schedule,
                         bool parallel) {
  cfg.validate();
  if (states.size() < 2) fail(ErrorCode::DimensionMismatch, "two_stage: need at least 2 states");
  const std::size_t T = states.size() - 1, n = states[0].size();
  const std::size_t min_retained = cfg.min_retained ? cfg.min_retained : n + 5;
  if (min_retained < n) fail(ErrorCode::ConfigError, "two_stage: min_retained < n");
  if (T < min_retained) fail(ErrorCode::InsufficientRetained, "two_stage: T < min_retained");

  PipelineReport rep;
  rep.stage1_reports.resize(n);
  std::vector<Vec> ring_rows(n);

  // Stage I: full-trajectory LAD per node
  std::exception_ptr first_error;
  parallel_for(n, parallel, [&](std::size_t i) {
    try {
      LadSolution sol = lad_rowwise(node_data(states, i), cfg.lad_cfg);
      ring_rows[i] = std::move(sol.a);
      rep.stage1_reports[i] = sol.report;
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);
  rep.A_ring = assemble_matrix(ring_rows);

  // Filtering
  rep.filter = cfg.mode == FilterMode::Threshold
                   ? filter_threshold(states, rep.A_ring, cfg.threshold)
                   : filter_ranking(states, rep.A_ring, cfg.ranking);
  rep.retained_sizes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.retained_sizes[i] = rep.filter.retained[i].size();
    if (rep.retained_sizes[i] < min_retained)
      fail(ErrorCode::InsufficientRetained,
           "two_stage: node " + std::to_string(i) + " retained only " +
               std::to_string(rep.retained_sizes[i]) + " indices (need " +
               std::to_string(min_retained) + ")");
  }

  // Stage II: LS on the retained indices per node
  std::vector<Vec> hat_rows(n);
  parallel_for(n, parallel, [&](std::size_t i) {
    try {
      const auto& keep = rep.filter.retained[i];
      RegressionData d;
      d.X = Matrix(keep.size(), n);
      d.y.resize(keep.size());
      d.node = i;
      d.times = keep;
      for (std::size_t r = 0; r < keep.size(); ++r) {
        const std::size_t t = keep[r];
        for (std::size_t j = 0; j < n; ++j) d.X(r, j) = states[t][j];
        d.y[r] = states[t + 1][i];
      }
      hat_rows[i] = ls_rowwise(d);
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);
  rep.A_hat = assemble_matrix(hat_rows);

  if (schedule) rep.detection = detection_metrics(rep.filter, *schedule);
  if (truth) {
    ErrorReport e1 = estimation_error(rep.A_ring, truth->A);
    ErrorReport e2 = estimation_error(rep.A_hat, truth->A);
    rep.stage1_error = e1.opnorm_err;
    rep.stage2_error = e2.opnorm_err;
    rep.stage1_row_errs = std::move(e1.row_errs);
    rep.stage2_row_errs = std::move(e2.row_errs);
  }
  return rep;
}

ErrorReport estimation_error(const Matrix& A_hat, const Matrix& A_true) {
  if (A_hat.rows() != A_true.rows() || A_hat.cols() != A_true.cols())
    fail(ErrorCode::DimensionMismatch, "estimation_error: shapes");
  ErrorReport rep;
  Matrix D = sub(A_hat, A_true);
  rep.opnorm_err = operator_norm(D);
  rep.row_errs.resize(D.rows());
  for (std::size_t i = 0; i < D.rows(); ++i) rep.row_errs[i] = norm2(D.row(i));
  return rep;
}

double stage1_bound(const BoundParams& bp) {
  bp.validate();
  double s = bp.sigma_w + bp.sigma_v;
  return bp.kappa * s * s * s * s * bp.sigma_w / (std::pow(bp.lambda, 5) * (1.0 - 2.0 * bp.p));
}

Stage2Bounds stage2_bound_terms(const BoundParams& bp, double alpha1, double alpha2,
                                const GammaNorms& gamma_norms, std::size_t T, std::size_t n) {
  bp.validate();
  if (T < 1) fail(ErrorCode::ConfigError, "stage2_bound_terms: T >= 1");
  const double s = bp.sigma_w + bp.sigma_v;
  const double tau = bp.kappa * s * s * s * s / (std::pow(bp.lambda, 5) * (1.0 - 2.0 * bp.p));
  Stage2Bounds b;
  b.stat_term = std::sqrt(double(n) / double(T) *
                          std::log(double(n) * s / (bp.lambda * (1.0 - bp.rho) * bp.delta))) *
                s / bp.lambda;
  b.misclass_term = bp.sigma_w * ((1.0 + alpha1) * tau * gamma_norms.sum_sq + alpha2 * gamma_norms.sum) /
                    (bp.lambda * bp.lambda * double(T));
  b.tail_term = bp.sigma_w * (alpha2 + 1.0 / alpha2) * std::exp(-alpha2 * alpha2 / 2.0) *
                std::sqrt(double(n)) * s / (bp.lambda * bp.lambda * (1.0 - bp.rho)) *
                std::log(double(n) / bp.delta);
  return b;
}

}  // namespace sysid

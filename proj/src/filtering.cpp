#include "sysid/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sysid {

void ThresholdParams::validate() const {
  if (!(beta1 >= 0.0) || !(beta2 >= 0.0))
    fail(ErrorCode::ConfigError, "ThresholdParams: beta1, beta2 must be finite and >= 0");
}

void RankingParams::validate() const {
  if (mode == RankingMode::Quantile) {
    if (!(q1 > 0.0 && q1 <= 1.0) || !(q2 > 0.0 && q2 <= 1.0))
      fail(ErrorCode::ConfigError, "RankingParams: q1, q2 must lie in (0,1]");
  } else {
    if (!(norm_lo >= 0.0) || !(norm_hi >= norm_lo) || !(ratio_max >= 0.0))
      fail(ErrorCode::ConfigError, "RankingParams: need 0 <= norm_lo <= norm_hi and ratio_max >= 0");
  }
}

namespace {

// shared residual/norm computation; states has T+1 entries
FilterResult base_result(const std::vector<Vec>& states, const Matrix& A_ring) {
  if (states.size() < 2) fail(ErrorCode::DimensionMismatch, "filter: need at least 2 states");
  const std::size_t T = states.size() - 1, n = states[0].size();
  if (A_ring.rows() != n || A_ring.cols() != n)
    fail(ErrorCode::DimensionMismatch, "filter: A_ring shape");
  FilterResult res;
  res.T = T;
  res.retained.assign(n, {});
  res.residuals.assign(n, std::vector<double>(T, 0.0));
  res.norm_used.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    res.norm_used[t] = norm2(states[t]);
    for (std::size_t i = 0; i < n; ++i) {
      double pred = 0.0;
      for (std::size_t j = 0; j < n; ++j) pred += A_ring(i, j) * states[t][j];
      res.residuals[i][t] = std::abs(states[t + 1][i] - pred);
    }
  }
  return res;
}

double ratio_of(double resid, double norm) {
  if (norm == 0.0) return resid == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return resid / norm;
}

}  // namespace

FilterResult filter_threshold(const std::vector<Vec>& states, const Matrix& A_ring,
                              const ThresholdParams& params) {
  params.validate();
  FilterResult res = base_result(states, A_ring);
  const std::size_t n = res.residuals.size();
  res.middle.resize(res.T);
  for (std::size_t t = 0; t < res.T; ++t) res.middle[t] = t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < res.T; ++t)
      if (res.residuals[i][t] <= params.beta1 * res.norm_used[t] + params.beta2)
        res.retained[i].push_back(t);
  return res;
}

FilterResult filter_ranking(const std::vector<Vec>& states, const Matrix& A_ring,
                            const RankingParams& params) {
  params.validate();
  FilterResult res = base_result(states, A_ring);
  const std::size_t T = res.T, n = res.residuals.size();

  if (params.mode == RankingMode::Quantile) {
    const std::size_t count = static_cast<std::size_t>(std::floor(params.q1 * double(T)));
    if (count < 1) fail(ErrorCode::EmptyMiddleSet, "filter_ranking: q1*T < 1");
    std::vector<std::size_t> order(T);
    for (std::size_t t = 0; t < T; ++t) order[t] = t;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (res.norm_used[a] != res.norm_used[b]) return res.norm_used[a] < res.norm_used[b];
      return a < b;  // ties by time
    });
    std::size_t lo = static_cast<std::size_t>(std::ceil((1.0 - params.q1) * double(T) / 2.0));
    if (lo + count > T) lo = T - count;
    res.middle.assign(order.begin() + lo, order.begin() + lo + count);
    std::sort(res.middle.begin(), res.middle.end());

    const std::size_t keep = static_cast<std::size_t>(std::floor(params.q2 * double(res.middle.size())));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> byratio = res.middle;
      std::sort(byratio.begin(), byratio.end(), [&](std::size_t a, std::size_t b) {
        double za = ratio_of(res.residuals[i][a], res.norm_used[a]);
        double zb = ratio_of(res.residuals[i][b], res.norm_used[b]);
        if (za != zb) return za < zb;
        return a < b;
      });
      byratio.resize(keep);
      std::sort(byratio.begin(), byratio.end());
      res.retained[i] = std::move(byratio);
    }
  } else {
    for (std::size_t t = 0; t < T; ++t)
      if (res.norm_used[t] >= params.norm_lo && res.norm_used[t] <= params.norm_hi)
        res.middle.push_back(t);
    if (res.middle.empty()) fail(ErrorCode::EmptyMiddleSet, "filter_ranking: empty norm window");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t : res.middle)
        if (ratio_of(res.residuals[i][t], res.norm_used[t]) <= params.ratio_max)
          res.retained[i].push_back(t);
  }
  return res;
}

DetectionMetrics detection_metrics(const FilterResult& result, const AttackSchedule& truth) {
  const std::size_t n = result.residuals.size(), T = result.T;
  if (truth.T != T || truth.n != n) fail(ErrorCode::DimensionMismatch, "detection_metrics: shapes");
  DetectionMetrics m;
  m.tp.assign(n, 0);
  m.fp.assign(n, 0);
  m.fn.assign(n, 0);
  m.tn.assign(n, 0);
  m.gamma.assign(n, {});
  std::vector<std::uint8_t> kept(T);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(kept.begin(), kept.end(), 0);
    for (std::size_t t : result.retained[i]) kept[t] = 1;
    for (std::size_t t = 0; t < T; ++t) {
      bool attacked = truth.at(t, i);
      if (kept[t]) {
        if (attacked) {
          ++m.fn[i];
          m.gamma[i].push_back(t);
        } else {
          ++m.tn[i];
        }
      } else {
        if (attacked)
          ++m.tp[i];
        else
          ++m.fp[i];
      }
    }
  }
  return m;
}

}  // namespace sysid

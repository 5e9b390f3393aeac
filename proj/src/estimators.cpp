#include "sysid/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace sysid {

namespace {

double median_abs(Vec v) {
  for (double& x : v) x = std::abs(x);
  if (v.empty()) return 0.0;
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

Vec residuals(const RegressionData& d, const Vec& a) {
  Vec r(d.y.size());
  for (std::size_t t = 0; t < d.y.size(); ++t) {
    double s = d.y[t];
    for (std::size_t j = 0; j < d.X.cols(); ++j) s -= d.X(t, j) * a[j];
    r[t] = s;
  }
  return r;
}

Vec weighted_ls(const RegressionData& d, const Vec& w) {
  Matrix Xw = d.X;
  Vec yw = d.y;
  for (std::size_t t = 0; t < yw.size(); ++t) {
    double sw = std::sqrt(w[t]);
    for (std::size_t j = 0; j < Xw.cols(); ++j) Xw(t, j) *= sw;
    yw[t] *= sw;
  }
  return qr_solve_normal(Xw, yw);
}

}  // namespace

RegressionData node_data(const std::vector<Vec>& states, std::size_t node) {
  if (states.size() < 2) fail(ErrorCode::DimensionMismatch, "node_data: need at least 2 states");
  const std::size_t T = states.size() - 1, n = states[0].size();
  RegressionData d;
  d.X = Matrix(T, n);
  d.y.resize(T);
  d.node = node;
  d.times.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < n; ++j) d.X(t, j) = states[t][j];
    d.y[t] = states[t + 1][node];
    d.times[t] = t;
  }
  return d;
}

Vec ls_rowwise(const RegressionData& data) { return qr_solve_normal(data.X, data.y); }

double lad_objective(const RegressionData& data, const Vec& a) {
  double s = 0.0;
  for (double r : residuals(data, a)) s += std::abs(r);
  return s;
}

static double min_norm_subgradient(const RegressionData& data, const Vec& a,
                                   std::size_t pg_iters, Vec* g_out);
static void vertex_snap(const RegressionData& data, Vec& a);
static double exact_line_search(const Vec& r, const Vec& u);

LadSolution lad_rowwise(const RegressionData& data, const LadConfig& cfg) {
  const std::size_t m = data.y.size(), n = data.X.cols();
  if (m < n) fail(ErrorCode::RankDeficient, "lad_rowwise: fewer samples than unknowns");

  LadSolution sol;
  try {
    sol.a = qr_solve_normal(data.X, data.y);
  } catch (const Error&) {
    sol.a.assign(n, 0.0);
  }
  Vec r = residuals(data, sol.a);
  double eps0 = median_abs(r);
  if (eps0 == 0.0) {
    // exact fit at the LS start
    sol.report.final_objective = lad_objective(data, sol.a);
    sol.report.certificate_gap = lad_certificate(data, sol.a);
    sol.report.certified = sol.report.certificate_gap <= kCertifiedGap;
    return sol;
  }
  const double eps_min = 1e-12 * eps0;

  auto smoothed = [&](const Vec& rr, double eps) {
    double s = 0.0;
    for (double x : rr) s += std::sqrt(x * x + eps * eps);
    return s;
  };

  double eps = eps0;
  double obj_prev = smoothed(r, eps);
  std::size_t k = 0;
  Vec w(m);
  for (k = 1; k <= cfg.max_iters; ++k) {
    eps = std::max(eps_min, eps * 0.5);
    for (std::size_t t = 0; t < m; ++t) w[t] = 1.0 / std::sqrt(r[t] * r[t] + eps * eps);
    try {
      sol.a = weighted_ls(data, w);
    } catch (const Error&) {
      break;  // weighted system degenerated; keep the previous iterate
    }
    r = residuals(data, sol.a);
    double obj = smoothed(r, eps);
    if (eps == eps_min && std::abs(obj_prev - obj) <= cfg.tol_obj * std::max(obj, 1e-300)) break;
    obj_prev = obj;
  }

  // The smoothed solver only crawls into kinks. Finish combinatorially: snap
  // to the vertex through the most-active rows, then, while the subgradient
  // certificate refuses to sign off, take its minimum-norm element as an
  // exact steepest-descent direction with an exact piecewise-linear line
  // search. Every accepted step strictly improves a piecewise-linear convex
  // objective with finitely many vertices, so this terminates.
  vertex_snap(data, sol.a);
  double best_obj = lad_objective(data, sol.a);
  for (int round = 0; round < 40; ++round) {
    Vec g;
    double gap = min_norm_subgradient(data, sol.a, 20000, &g);
    if (gap <= 0.25 * kCertifiedGap) break;
    Vec u(m, 0.0);
    bool moved = false;
    for (std::size_t t = 0; t < m; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s -= data.X(t, j) * g[j];
      u[t] = s;
      moved = moved || s != 0.0;
    }
    if (!moved) break;
    r = residuals(data, sol.a);
    double alpha = exact_line_search(r, u);
    Vec cand = sol.a;
    for (std::size_t j = 0; j < n; ++j) cand[j] -= alpha * g[j];
    vertex_snap(data, cand);
    double obj_c = lad_objective(data, cand);
    if (!(obj_c < best_obj)) break;
    sol.a = std::move(cand);
    best_obj = obj_c;
  }

  sol.report.iterations = std::min(k, cfg.max_iters);
  sol.report.final_epsilon = eps;
  sol.report.final_objective = lad_objective(data, sol.a);
  sol.report.certificate_gap = lad_certificate(data, sol.a);
  sol.report.certified = sol.report.certificate_gap <= kCertifiedGap;
  return sol;
}

// Minimum-norm element of the subdifferential at a, as a normalized gap.
// g_out (when requested) receives the unnormalized minimizer: its negative is
// the steepest-descent direction whenever the gap is nonzero.
static double min_norm_subgradient(const RegressionData& data, const Vec& a,
                                   std::size_t pg_iters, Vec* g_out) {
  const std::size_t m = data.y.size(), n = data.X.cols();
  Vec r = residuals(data, a);
  double yinf = 0.0;
  for (double v : data.y) yinf = std::max(yinf, std::abs(v));
  const double tol_active = 1e-7 * std::max(yinf, 1e-30);

  Vec g(n, 0.0);                   // fixed part: sum of sign(r_t) x_t over inactive rows
  std::vector<std::size_t> free_rows;  // near-zero residuals with nonzero x_t
  for (std::size_t t = 0; t < m; ++t) {
    double xn = 0.0;
    for (std::size_t j = 0; j < n; ++j) xn += data.X(t, j) * data.X(t, j);
    if (xn == 0.0) continue;  // zero rows contribute a constant
    if (std::abs(r[t]) > tol_active) {
      double s = r[t] > 0.0 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < n; ++j) g[j] += s * data.X(t, j);
    } else {
      free_rows.push_back(t);
    }
  }

  double xfro = 0.0;
  for (double v : data.X.data()) xfro += v * v;
  xfro = std::sqrt(xfro);
  const double denom = 1.0 + xfro;

  const std::size_t f = free_rows.size();
  if (f == 0) {
    if (g_out) *g_out = g;
    return norm2(g) / denom;
  }
  if (f == 1) {
    // closed form: clamp the unconstrained minimizer
    const std::size_t t = free_rows[0];
    double xx = 0.0, xg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      xx += data.X(t, j) * data.X(t, j);
      xg += data.X(t, j) * g[j];
    }
    double s = std::clamp(-xg / xx, -1.0, 1.0);
    Vec h = g;
    for (std::size_t j = 0; j < n; ++j) h[j] += s * data.X(t, j);
    if (g_out) *g_out = h;
    return norm2(h) / denom;
  }

  // projected gradient on q(s) = 0.5 || g + sum_t s_t x_t ||^2 over the box
  double L = 0.0;  // Lipschitz bound: ||Xf||_F^2
  for (std::size_t t : free_rows)
    for (std::size_t j = 0; j < n; ++j) L += data.X(t, j) * data.X(t, j);
  if (L == 0.0) {
    if (g_out) *g_out = g;
    return norm2(g) / denom;
  }
  Vec s(f, 0.0), h(n);
  for (std::size_t it = 0; it < pg_iters; ++it) {
    h = g;
    for (std::size_t u = 0; u < f; ++u)
      for (std::size_t j = 0; j < n; ++j) h[j] += s[u] * data.X(free_rows[u], j);
    double step_sq = 0.0;
    for (std::size_t u = 0; u < f; ++u) {
      double grad = 0.0;
      for (std::size_t j = 0; j < n; ++j) grad += data.X(free_rows[u], j) * h[j];
      double ns = std::clamp(s[u] - grad / L, -1.0, 1.0);
      step_sq += (ns - s[u]) * (ns - s[u]);
      s[u] = ns;
    }
    if (step_sq <= 1e-32) break;
  }
  h = g;
  for (std::size_t u = 0; u < f; ++u)
    for (std::size_t j = 0; j < n; ++j) h[j] += s[u] * data.X(free_rows[u], j);
  if (g_out) *g_out = h;
  return norm2(h) / denom;
}

double lad_certificate(const RegressionData& data, const Vec& a) {
  return min_norm_subgradient(data, a, 50000, nullptr);
}

// optima are vertices interpolating n rows; solving through the most-active
// rows removes the last crawl of the smoothed solver
static void vertex_snap(const RegressionData& data, Vec& a) {
  const std::size_t m = data.y.size(), n = data.X.cols();
  if (m < n) return;
  Vec r = residuals(data, a);
  std::vector<std::size_t> order(m);
  for (std::size_t t = 0; t < m; ++t) order[t] = t;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    double rx = std::abs(r[x]), ry = std::abs(r[y]);
    return rx != ry ? rx < ry : x < y;
  });
  Matrix Xa(n, n);
  Vec ya(n);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t j = 0; j < n; ++j) Xa(q, j) = data.X(order[q], j);
    ya[q] = data.y[order[q]];
  }
  try {
    Vec snap = qr_solve_normal(Xa, ya);
    if (lad_objective(data, snap) <= lad_objective(data, a)) a = std::move(snap);
  } catch (const Error&) {
    // active rows degenerate; keep the smoothed iterate
  }
}

// exact minimizer of sum_t |r_t - alpha u_t| over alpha: a weighted median of
// the breakpoints r_t / u_t with weights |u_t|
static double exact_line_search(const Vec& r, const Vec& u) {
  std::vector<std::pair<double, double>> rw;
  rw.reserve(r.size());
  for (std::size_t t = 0; t < r.size(); ++t)
    if (u[t] != 0.0) rw.push_back({r[t] / u[t], std::abs(u[t])});
  if (rw.empty()) return 0.0;
  std::sort(rw.begin(), rw.end());
  double total = 0.0;
  for (const auto& [b, w] : rw) total += w;
  double acc = 0.0;
  for (const auto& [b, w] : rw) {
    acc += w;
    if (acc >= 0.5 * total) return b;
  }
  return rw.back().first;
}

L2Solution l2_full(const std::vector<Vec>& states, const LadConfig& cfg) {
  if (states.size() < 2) fail(ErrorCode::DimensionMismatch, "l2_full: need at least 2 states");
  const std::size_t T = states.size() - 1, n = states[0].size();
  if (T < n) fail(ErrorCode::RankDeficient, "l2_full: T < n");

  Matrix X(T, n), Y(T, n);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < n; ++j) {
      X(t, j) = states[t][j];
      Y(t, j) = states[t + 1][j];
    }

  auto solve_weighted = [&](const Vec& w) {
    Matrix A(n, n);
    RegressionData d;
    d.X = X;
    for (std::size_t t = 0; t < T; ++t) {
      double sw = std::sqrt(w[t]);
      for (std::size_t j = 0; j < n; ++j) d.X(t, j) *= sw;
    }
    d.y.resize(T);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < T; ++t) d.y[t] = std::sqrt(w[t]) * Y(t, i);
      A.set_row(i, qr_solve_normal(d.X, d.y));
    }
    return A;
  };

  auto row_norms = [&](const Matrix& A) {
    Vec rn(T);
    for (std::size_t t = 0; t < T; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double ri = Y(t, i);
        for (std::size_t j = 0; j < n; ++j) ri -= A(i, j) * X(t, j);
        s += ri * ri;
      }
      rn[t] = std::sqrt(s);
    }
    return rn;
  };

  L2Solution sol;
  sol.A = solve_weighted(Vec(T, 1.0));  // plain LS start
  Vec rn = row_norms(sol.A);
  double true_obj = 0.0;
  for (double v : rn) true_obj += v;

  double eps0 = median_abs(rn);
  if (eps0 == 0.0) {
    sol.report.final_objective = 0.0;
    return sol;
  }
  const double eps_min = 1e-12 * eps0;
  double eps = eps0;
  bool hit_cap = true;
  std::size_t k = 0;
  for (k = 1; k <= cfg.max_iters; ++k) {
    eps = std::max(eps_min, eps * 0.5);
    Vec w(T);
    for (std::size_t t = 0; t < T; ++t) w[t] = 1.0 / std::max(rn[t], eps);
    sol.A = solve_weighted(w);
    rn = row_norms(sol.A);
    double obj = 0.0;
    for (double v : rn) obj += v;
    if (eps == eps_min && std::abs(true_obj - obj) <= cfg.tol_obj * std::max(obj, 1e-300)) {
      true_obj = obj;
      hit_cap = false;
      break;
    }
    true_obj = obj;
  }
  sol.report.iterations = std::min(k, cfg.max_iters);
  sol.report.final_epsilon = eps;
  sol.report.final_objective = true_obj;
  sol.report.certified = !hit_cap;
  return sol;
}

Matrix assemble_matrix(const std::vector<Vec>& rows) {
  if (rows.empty()) fail(ErrorCode::DimensionMismatch, "assemble_matrix: empty");
  const std::size_t n = rows.size();
  Matrix A(n, rows[0].size());
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != A.cols()) fail(ErrorCode::DimensionMismatch, "assemble_matrix: ragged rows");
    A.set_row(i, rows[i]);
  }
  return A;
}

}  // namespace sysid

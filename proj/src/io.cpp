#include "sysid/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

namespace sysid {

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail(ErrorCode::IoError, "to_chars failed");
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) fail(ErrorCode::IoError, "bad numeric field: '" + s + "'");
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoError, "read failed: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot create " + path);
  out << body;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed: " + path);
}

json load_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::IoError, "malformed JSON: " + path);
  return j;
}

// NaN marks "not applicable"; JSON carries it as null.
static json jnum(double v) { return std::isnan(v) ? json() : json(v); }

static double jnum_from(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<double>();
}

// ---- enum name tables ----

static const char* noise_kind_name(NoiseKind k) {
  return k == NoiseKind::Gaussian ? "gaussian" : "uniform_bounded";
}

static NoiseKind noise_kind_from(const std::string& s) {
  if (s == "gaussian") return NoiseKind::Gaussian;
  if (s == "uniform_bounded") return NoiseKind::UniformBounded;
  fail(ErrorCode::ConfigError, "unknown noise kind: " + s);
}

static const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::None: return "none";
    case AttackKind::ScaledState: return "scaled_state";
    case AttackKind::MisleadingNodewise: return "misleading_nodewise";
    case AttackKind::MisleadingAlternating: return "misleading_alternating";
    case AttackKind::FixedOffset: return "fixed_offset";
  }
  return "none";
}

static AttackKind attack_kind_from(const std::string& s) {
  if (s == "none") return AttackKind::None;
  if (s == "scaled_state") return AttackKind::ScaledState;
  if (s == "misleading_nodewise") return AttackKind::MisleadingNodewise;
  if (s == "misleading_alternating") return AttackKind::MisleadingAlternating;
  if (s == "fixed_offset") return AttackKind::FixedOffset;
  fail(ErrorCode::ConfigError, "unknown attack kind: " + s);
}

static const char* ranking_mode_name(RankingMode m) {
  return m == RankingMode::Quantile ? "quantile" : "fixed_cutoff";
}

static RankingMode ranking_mode_from(const std::string& s) {
  if (s == "quantile") return RankingMode::Quantile;
  if (s == "fixed_cutoff") return RankingMode::FixedCutoff;
  fail(ErrorCode::ConfigError, "unknown ranking mode: " + s);
}

static const char* filter_mode_name(FilterMode m) {
  return m == FilterMode::Threshold ? "threshold" : "ranking";
}

static FilterMode filter_mode_from(const std::string& s) {
  if (s == "threshold") return FilterMode::Threshold;
  if (s == "ranking") return FilterMode::Ranking;
  fail(ErrorCode::ConfigError, "unknown filter mode: " + s);
}

// ---- core containers ----

void to_json(json& j, const Matrix& m) {
  j = json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", m.data()}};
}

void from_json(const json& j, Matrix& m) {
  std::size_t r = j.at("rows").get<std::size_t>();
  std::size_t c = j.at("cols").get<std::size_t>();
  auto e = j.at("entries").get<std::vector<double>>();
  if (e.size() != r * c) fail(ErrorCode::ConfigError, "matrix entries/shape mismatch");
  m = Matrix(r, c);
  m.data() = std::move(e);
}

void to_json(json& j, const SystemSpec& s) {
  j = json{{"n", s.n}, {"rho_target", s.rho_target}, {"opnorm_target", s.opnorm_target}, {"seed", s.seed}};
}

void from_json(const json& j, SystemSpec& s) {
  s.n = j.at("n").get<std::size_t>();
  s.rho_target = j.at("rho_target").get<double>();
  s.opnorm_target = j.at("opnorm_target").get<double>();
  s.seed = j.value("seed", std::uint64_t{0});
}

void to_json(json& j, const SystemMatrix& s) {
  j = json{{"n", s.A.rows()}, {"rho", s.rho}, {"opnorm", s.opnorm}, {"psi", s.psi},
           {"entries", s.A.data()}};
}

void from_json(const json& j, SystemMatrix& s) {
  std::size_t n = j.at("n").get<std::size_t>();
  auto e = j.at("entries").get<std::vector<double>>();
  if (e.size() != n * n) fail(ErrorCode::ConfigError, "system entries/shape mismatch");
  s.A = Matrix(n, n);
  s.A.data() = std::move(e);
  s.rho = j.at("rho").get<double>();
  s.opnorm = j.at("opnorm").get<double>();
  s.psi = j.at("psi").get<double>();
}

void to_json(json& j, const NoiseModel& m) {
  j = json{{"kind", noise_kind_name(m.kind)}, {"sigma_w", m.sigma_w}};
}

void from_json(const json& j, NoiseModel& m) {
  m.kind = noise_kind_from(j.value("kind", std::string("gaussian")));
  m.sigma_w = j.at("sigma_w").get<double>();
}

void to_json(json& j, const AttackStrategy& a) {
  j = json{{"kind", attack_kind_name(a.kind)}, {"param", a.param}, {"p", a.p}};
}

void from_json(const json& j, AttackStrategy& a) {
  a.kind = attack_kind_from(j.at("kind").get<std::string>());
  a.param = j.value("param", 0.0);
  a.p = j.value("p", 0.0);
}

void to_json(json& j, const AttackSchedule& s) {
  j = json{{"T", s.T}, {"n", s.n}, {"xi", s.xi}};
}

void from_json(const json& j, AttackSchedule& s) {
  s.T = j.at("T").get<std::size_t>();
  s.n = j.at("n").get<std::size_t>();
  s.xi = j.at("xi").get<std::vector<std::uint8_t>>();
  if (s.xi.size() != s.T * s.n) fail(ErrorCode::ConfigError, "schedule bitmap size mismatch");
}

void to_json(json& j, const TrajectoryRecord& r) {
  j = json{{"system", r.system},
           {"T", r.T},
           {"seed", r.seed},
           {"noise_model", r.noise_model},
           {"attack_strategy", r.attack_strategy},
           {"states", r.states},
           {"noise", r.noise},
           {"attacks", r.attacks},
           {"schedule", r.schedule},
           {"max_abs_attack", r.max_abs_attack}};
}

void from_json(const json& j, TrajectoryRecord& r) {
  j.at("system").get_to(r.system);
  r.T = j.at("T").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  j.at("noise_model").get_to(r.noise_model);
  j.at("attack_strategy").get_to(r.attack_strategy);
  r.states = j.at("states").get<std::vector<Vec>>();
  r.noise = j.at("noise").get<std::vector<Vec>>();
  r.attacks = j.at("attacks").get<std::vector<Vec>>();
  j.at("schedule").get_to(r.schedule);
  r.max_abs_attack = j.at("max_abs_attack").get<double>();
}

std::string trajectory_to_csv(const TrajectoryRecord& r) {
  const std::size_t n = r.system.A.rows();
  std::ostringstream out;
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",w_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",v_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",xi_" << i;
  out << "\n";
  for (std::size_t t = 0; t <= r.T; ++t) {
    out << t;
    for (std::size_t i = 0; i < n; ++i) out << "," << fmt_double(r.states[t][i]);
    if (t < r.T) {
      for (std::size_t i = 0; i < n; ++i) out << "," << fmt_double(r.noise[t][i]);
      for (std::size_t i = 0; i < n; ++i) out << "," << fmt_double(r.attacks[t][i]);
      for (std::size_t i = 0; i < n; ++i) out << "," << (r.schedule.at(t, i) ? 1 : 0);
    } else {
      for (std::size_t i = 0; i < 3 * n; ++i) out << ",";
    }
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

void trajectory_states_from_csv(const std::string& body, std::size_t n,
                                std::vector<Vec>& states, std::vector<Vec>& noise,
                                std::vector<Vec>& attacks, std::vector<std::vector<std::uint8_t>>& xi) {
  states.clear();
  noise.clear();
  attacks.clear();
  xi.clear();
  std::istringstream in(body);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, "empty trajectory CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 1 + 4 * n) fail(ErrorCode::IoError, "trajectory CSV: wrong field count");
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = parse_double(f[1 + i]);
    states.push_back(std::move(x));
    if (f[1 + n].empty()) continue;  // terminal row: state only
    Vec w(n), v(n);
    std::vector<std::uint8_t> row(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = parse_double(f[1 + n + i]);
    for (std::size_t i = 0; i < n; ++i) v[i] = parse_double(f[1 + 2 * n + i]);
    for (std::size_t i = 0; i < n; ++i) row[i] = static_cast<std::uint8_t>(parse_double(f[1 + 3 * n + i]) != 0.0);
    noise.push_back(std::move(w));
    attacks.push_back(std::move(v));
    xi.push_back(std::move(row));
  }
  if (states.size() != noise.size() + 1)
    fail(ErrorCode::IoError, "trajectory CSV: missing terminal state row");
}

// ---- estimator / filter / pipeline types ----

void to_json(json& j, const LadConfig& c) {
  j = json{{"max_iters", c.max_iters}, {"tol_obj", c.tol_obj}};
}

void from_json(const json& j, LadConfig& c) {
  c.max_iters = j.value("max_iters", std::size_t{500});
  c.tol_obj = j.value("tol_obj", 1e-9);
}

void to_json(json& j, const SolverReport& r) {
  j = json{{"iterations", r.iterations},
           {"final_objective", r.final_objective},
           {"certificate_gap", r.certificate_gap},
           {"certified", r.certified},
           {"final_epsilon", r.final_epsilon}};
}

void from_json(const json& j, SolverReport& r) {
  r.iterations = j.at("iterations").get<std::size_t>();
  r.final_objective = j.at("final_objective").get<double>();
  r.certificate_gap = j.at("certificate_gap").get<double>();
  r.certified = j.at("certified").get<bool>();
  r.final_epsilon = j.at("final_epsilon").get<double>();
}

void to_json(json& j, const ThresholdParams& p) {
  j = json{{"beta1", p.beta1}, {"beta2", p.beta2}};
}

void from_json(const json& j, ThresholdParams& p) {
  p.beta1 = j.value("beta1", 0.0);
  p.beta2 = j.value("beta2", 0.0);
}

void to_json(json& j, const RankingParams& p) {
  j = json{{"mode", ranking_mode_name(p.mode)}, {"q1", p.q1},       {"q2", p.q2},
           {"norm_lo", p.norm_lo},              {"norm_hi", p.norm_hi}, {"ratio_max", p.ratio_max}};
}

void from_json(const json& j, RankingParams& p) {
  p.mode = ranking_mode_from(j.value("mode", std::string("quantile")));
  p.q1 = j.value("q1", 1.0);
  p.q2 = j.value("q2", 1.0);
  p.norm_lo = j.value("norm_lo", 0.0);
  p.norm_hi = j.value("norm_hi", 0.0);
  p.ratio_max = j.value("ratio_max", 0.0);
}

void to_json(json& j, const FilterResult& f) {
  j = json{{"T", f.T},
           {"retained", f.retained},
           {"residuals", f.residuals},
           {"norm_used", f.norm_used},
           {"middle", f.middle}};
}

void from_json(const json& j, FilterResult& f) {
  f.T = j.at("T").get<std::size_t>();
  f.retained = j.at("retained").get<std::vector<std::vector<std::size_t>>>();
  f.residuals = j.at("residuals").get<std::vector<std::vector<double>>>();
  f.norm_used = j.at("norm_used").get<Vec>();
  f.middle = j.at("middle").get<std::vector<std::size_t>>();
}

std::string retained_to_csv(const FilterResult& f) {
  const std::size_t n = f.retained.size();
  std::vector<std::vector<std::uint8_t>> keep(n, std::vector<std::uint8_t>(f.T, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t : f.retained[i]) keep[i][t] = 1;
  std::ostringstream out;
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",node_" << i;
  out << "\n";
  for (std::size_t t = 0; t < f.T; ++t) {
    out << t;
    for (std::size_t i = 0; i < n; ++i) out << "," << int(keep[i][t]);
    out << "\n";
  }
  return out.str();
}

void to_json(json& j, const DetectionMetrics& d) {
  j = json{{"tp", d.tp}, {"fp", d.fp}, {"fn", d.fn}, {"tn", d.tn}, {"gamma", d.gamma}};
}

void from_json(const json& j, DetectionMetrics& d) {
  d.tp = j.at("tp").get<std::vector<std::size_t>>();
  d.fp = j.at("fp").get<std::vector<std::size_t>>();
  d.fn = j.at("fn").get<std::vector<std::size_t>>();
  d.tn = j.at("tn").get<std::vector<std::size_t>>();
  d.gamma = j.at("gamma").get<std::vector<std::vector<std::size_t>>>();
}

void to_json(json& j, const TwoStageConfig& c) {
  j = json{{"mode", filter_mode_name(c.mode)},
           {"threshold", c.threshold},
           {"ranking", c.ranking},
           {"lad", c.lad_cfg},
           {"min_retained", c.min_retained}};
}

void from_json(const json& j, TwoStageConfig& c) {
  c.mode = filter_mode_from(j.value("mode", std::string("ranking")));
  if (j.contains("threshold")) j.at("threshold").get_to(c.threshold);
  if (j.contains("ranking")) j.at("ranking").get_to(c.ranking);
  if (j.contains("lad")) j.at("lad").get_to(c.lad_cfg);
  c.min_retained = j.value("min_retained", std::size_t{0});
}

void to_json(json& j, const BoundParams& b) {
  j = json{{"sigma_w", b.sigma_w}, {"sigma_v", b.sigma_v}, {"lambda", b.lambda},
           {"rho", b.rho},         {"p", b.p},             {"delta", b.delta},
           {"kappa", b.kappa},     {"gamma_const", b.gamma_const}};
}

void from_json(const json& j, BoundParams& b) {
  b.sigma_w = j.value("sigma_w", 1.0);
  b.sigma_v = j.value("sigma_v", 1.0);
  b.lambda = j.value("lambda", 1.0);
  b.rho = j.value("rho", 0.5);
  b.p = j.value("p", 0.0);
  b.delta = j.value("delta", 0.05);
  b.kappa = j.value("kappa", 1.0);
  b.gamma_const = j.value("gamma_const", 1.0);
}

void to_json(json& j, const PipelineReport& r) {
  j = json{{"A_ring", r.A_ring},
           {"A_hat", r.A_hat},
           {"filter", r.filter},
           {"stage1_error", r.stage1_error},
           {"stage2_error", r.stage2_error},
           {"stage1_row_errs", r.stage1_row_errs},
           {"stage2_row_errs", r.stage2_row_errs},
           {"stage1_reports", r.stage1_reports},
           {"retained_sizes", r.retained_sizes}};
  j["detection"] = r.detection ? json(*r.detection) : json();
}

// ---- harness types ----

void to_json(json& j, const FailureDemoParams& f) {
  j = json{{"n", f.n}, {"p", f.p}, {"c_bar", f.c_bar}, {"sigma_w", f.sigma_w}, {"T_max", f.T_max}};
}

void from_json(const json& j, FailureDemoParams& f) {
  f.n = j.value("n", std::size_t{2});
  f.p = j.value("p", 0.45);
  f.c_bar = j.value("c_bar", 30.0);
  f.sigma_w = j.value("sigma_w", 1.0);
  f.T_max = j.value("T_max", std::size_t{100000});
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"preset", preset_name(c.preset)},
           {"system", c.system},
           {"noise", c.noise},
           {"attack", c.attack},
           {"T_grid", c.T_grid},
           {"seeds", c.seeds},
           {"base_seed", c.base_seed},
           {"estimators", c.estimators},
           {"filter", c.filter},
           {"failure", c.failure},
           {"output_dir", c.output_dir}};
}

void from_json(const json& j, ExperimentConfig& c) {
  Preset p = preset_from_name(j.value("preset", std::string("custom")));
  c = preset_config(p);
  if (j.contains("system")) j.at("system").get_to(c.system);
  if (j.contains("noise")) j.at("noise").get_to(c.noise);
  if (j.contains("attack")) j.at("attack").get_to(c.attack);
  if (j.contains("T_grid")) c.T_grid = j.at("T_grid").get<std::vector<std::size_t>>();
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::size_t>();
  if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("estimators")) c.estimators = j.at("estimators").get<std::vector<std::string>>();
  if (j.contains("filter")) j.at("filter").get_to(c.filter);
  if (j.contains("failure")) j.at("failure").get_to(c.failure);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
}

void to_json(json& j, const ExperimentRow& r) {
  j = json{{"preset", r.preset},
           {"T", r.T},
           {"trial", r.trial},
           {"estimator", r.estimator},
           {"status", r.status},
           {"opnorm_err", jnum(r.opnorm_err)},
           {"row_errs", r.row_errs},
           {"retained_median", jnum(r.retained_median)},
           {"misclass_worst", jnum(r.misclass_worst)},
           {"fp", r.fp},
           {"fn", r.fn},
           {"tp", r.tp},
           {"tn", r.tn},
           {"wall_ms", r.wall_ms}};
}

void from_json(const json& j, ExperimentRow& r) {
  r.preset = j.at("preset").get<std::string>();
  r.T = j.at("T").get<std::size_t>();
  r.trial = j.at("trial").get<std::size_t>();
  r.estimator = j.at("estimator").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.opnorm_err = jnum_from(j, "opnorm_err", kMissing);
  r.row_errs = j.value("row_errs", Vec{});
  r.retained_median = jnum_from(j, "retained_median", kMissing);
  r.misclass_worst = jnum_from(j, "misclass_worst", kMissing);
  r.fp = j.value("fp", std::size_t{0});
  r.fn = j.value("fn", std::size_t{0});
  r.tp = j.value("tp", std::size_t{0});
  r.tn = j.value("tn", std::size_t{0});
  r.wall_ms = j.value("wall_ms", 0.0);
}

void to_json(json& j, const MedianRow& r) {
  j = json{{"T", r.T},
           {"estimator", r.estimator},
           {"ok_count", r.ok_count},
           {"median", jnum(r.median)},
           {"q25", jnum(r.q25)},
           {"q75", jnum(r.q75)},
           {"retained_median", jnum(r.retained_median)}};
}

void from_json(const json& j, MedianRow& r) {
  r.T = j.at("T").get<std::size_t>();
  r.estimator = j.at("estimator").get<std::string>();
  r.ok_count = j.at("ok_count").get<std::size_t>();
  r.median = jnum_from(j, "median", kMissing);
  r.q25 = jnum_from(j, "q25", kMissing);
  r.q75 = jnum_from(j, "q75", kMissing);
  r.retained_median = jnum_from(j, "retained_median", kMissing);
}

void to_json(json& j, const ScatterPoint& p) {
  j = json{{"t", p.t}, {"node", p.node}, {"norm", p.norm}, {"residual", p.residual},
           {"attacked", p.attacked}};
}

void from_json(const json& j, ScatterPoint& p) {
  p.t = j.at("t").get<std::size_t>();
  p.node = j.at("node").get<std::size_t>();
  p.norm = j.at("norm").get<double>();
  p.residual = j.at("residual").get<double>();
  p.attacked = j.at("attacked").get<bool>();
}

void to_json(json& j, const ExperimentReport& r) {
  j = json{{"config", r.cfg}, {"rows", r.rows}, {"medians", r.medians}, {"scatter", r.scatter}};
}

void from_json(const json& j, ExperimentReport& r) {
  j.at("config").get_to(r.cfg);
  r.rows = j.at("rows").get<std::vector<ExperimentRow>>();
  r.medians = j.at("medians").get<std::vector<MedianRow>>();
  r.scatter = j.value("scatter", std::vector<ScatterPoint>{});
}

static std::string opt_num(double v) { return std::isnan(v) ? std::string() : fmt_double(v); }

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "preset,T,trial,estimator,status,opnorm_err,row_errs,retained_median,"
         "misclass_worst,fp,fn,tp,tn\n";
  for (const auto& r : rows) {
    out << r.preset << "," << r.T << "," << r.trial << "," << r.estimator << "," << r.status << ",";
    out << opt_num(r.opnorm_err) << ",";
    for (std::size_t i = 0; i < r.row_errs.size(); ++i) {
      if (i) out << ";";
      out << fmt_double(r.row_errs[i]);
    }
    out << "," << opt_num(r.retained_median) << "," << opt_num(r.misclass_worst) << ",";
    if (std::isnan(r.misclass_worst)) {
      out << ",,,";
    } else {
      out << r.fp << "," << r.fn << "," << r.tp << "," << r.tn;
    }
    out << "\n";
  }
  return out.str();
}

std::string medians_to_csv(const std::vector<MedianRow>& rows) {
  std::ostringstream out;
  out << "T,estimator,ok_count,median,q25,q75,retained_median\n";
  for (const auto& r : rows) {
    out << r.T << "," << r.estimator << "," << r.ok_count << "," << opt_num(r.median) << ","
        << opt_num(r.q25) << "," << opt_num(r.q75) << "," << opt_num(r.retained_median) << "\n";
  }
  return out.str();
}

std::string scatter_to_csv(const std::vector<ScatterPoint>& pts) {
  std::ostringstream out;
  out << "t,node,norm,residual,ratio,attacked\n";
  for (const auto& p : pts) {
    out << p.t << "," << p.node << "," << fmt_double(p.norm) << "," << fmt_double(p.residual)
        << ",";
    if (p.norm > 0.0) out << fmt_double(p.residual / p.norm);
    out << "," << (p.attacked ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace sysid

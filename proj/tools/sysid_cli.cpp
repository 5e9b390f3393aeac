#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sysid/io.hpp"
#include "sysid/parallel.hpp"

using namespace sysid;

namespace {

int code_to_exit(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return 2;
    default:
      return 3;  // numerical / infeasibility failures
  }
}

Matrix load_matrix(const std::string& path) {
  json j = load_json_file(path);
  if (j.contains("rows")) return j.get<Matrix>();
  if (j.contains("n")) return j.get<SystemMatrix>().A;  // accept system.json too
  fail(ErrorCode::ConfigError, "not a matrix file: " + path);
}

struct Common {
  std::string config;
  std::string out = "out";
  std::string preset;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool out_set = false;
  int threads = 0;
};

json config_or_empty(const Common& c) {
  return c.config.empty() ? json::object() : load_json_file(c.config);
}

int cmd_gen_system(const Common& c, const json& flags) {
  json j = config_or_empty(c);
  SystemSpec spec{10, 0.75, 1.5, 42};
  if (!j.empty()) j.get_to(spec);
  if (flags.contains("n")) spec.n = flags.at("n").get<std::size_t>();
  if (flags.contains("rho")) spec.rho_target = flags.at("rho").get<double>();
  if (flags.contains("opnorm")) spec.opnorm_target = flags.at("opnorm").get<double>();
  if (c.has_seed) spec.seed = c.seed;
  SystemMatrix sys = generate_system(spec);
  std::filesystem::create_directories(c.out);
  write_text_file(c.out + "/system.json", json(sys).dump(2) + "\n");
  std::cout << "system: n=" << spec.n << " rho=" << fmt_double(sys.rho)
            << " opnorm=" << fmt_double(sys.opnorm) << " psi=" << fmt_double(sys.psi) << " -> "
            << c.out << "/system.json\n";
  return 0;
}

SystemMatrix system_from_config(const json& j) {
  if (j.contains("system_file"))
    return load_json_file(j.at("system_file").get<std::string>()).get<SystemMatrix>();
  if (j.contains("system")) {
    const json& s = j.at("system");
    if (s.contains("entries")) return s.get<SystemMatrix>();
    return generate_system(s.get<SystemSpec>());
  }
  fail(ErrorCode::ConfigError, "config needs 'system' or 'system_file'");
}

int cmd_simulate(const Common& c) {
  if (c.config.empty()) fail(ErrorCode::ConfigError, "simulate requires --config");
  json j = load_json_file(c.config);
  SystemMatrix sys = system_from_config(j);
  const std::size_t T = j.at("T").get<std::size_t>();
  NoiseModel noise = j.value("noise", NoiseModel{});
  AttackStrategy attack = j.value("attack", AttackStrategy{});
  std::uint64_t seed = c.has_seed ? c.seed : j.value("seed", std::uint64_t{0});
  Vec x0;
  const Vec* x0p = nullptr;
  if (j.contains("x0")) {
    x0 = j.at("x0").get<Vec>();
    x0p = &x0;
  }
  TrajectoryRecord rec = simulate(sys, T, noise, attack, x0p, seed);
  std::filesystem::create_directories(c.out);
  write_text_file(c.out + "/trajectory.json", json(rec).dump() + "\n");
  write_text_file(c.out + "/trajectory.csv", trajectory_to_csv(rec));
  std::cout << "trajectory: T=" << T << " n=" << sys.A.rows()
            << " max|v|=" << fmt_double(rec.max_abs_attack) << " -> " << c.out
            << "/trajectory.{json,csv}\n";
  return 0;
}

int cmd_estimate(const Common& c) {
  if (c.config.empty()) fail(ErrorCode::ConfigError, "estimate requires --config");
  json j = load_json_file(c.config);
  auto rec = load_json_file(j.at("trajectory").get<std::string>()).get<TrajectoryRecord>();
  std::string est = j.value("estimator", std::string("ls"));
  LadConfig lad = j.value("lad", LadConfig{});
  const std::size_t n = rec.system.A.rows();

  Matrix A_hat;
  json reports = json::array();
  if (est == "ls") {
    std::vector<Vec> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = ls_rowwise(node_data(rec.states, i));
    A_hat = assemble_matrix(rows);
  } else if (est == "l2") {
    L2Solution sol = l2_full(rec.states, lad);
    A_hat = sol.A;
    reports.push_back(sol.report);
  } else if (est == "l1") {
    std::vector<Vec> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      LadSolution sol = lad_rowwise(node_data(rec.states, i), lad);
      rows[i] = sol.a;
      reports.push_back(sol.report);
    }
    A_hat = assemble_matrix(rows);
  } else {
    fail(ErrorCode::ConfigError, "unknown estimator: " + est);
  }

  ErrorReport er = estimation_error(A_hat, rec.system.A);
  json out{{"estimator", est},
           {"A_hat", A_hat},
           {"reports", reports},
           {"opnorm_err", er.opnorm_err},
           {"row_errs", er.row_errs}};
  std::filesystem::create_directories(c.out);
  write_text_file(c.out + "/estimate.json", out.dump(2) + "\n");
  std::cout << "estimate: " << est << " opnorm_err=" << fmt_double(er.opnorm_err) << " -> "
            << c.out << "/estimate.json\n";
  return 0;
}

Matrix stage1_matrix(const TrajectoryRecord& rec, const LadConfig& lad) {
  const std::size_t n = rec.system.A.rows();
  std::vector<Vec> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = lad_rowwise(node_data(rec.states, i), lad).a;
  return assemble_matrix(rows);
}

int cmd_filter(const Common& c) {
  if (c.config.empty()) fail(ErrorCode::ConfigError, "filter requires --config");
  json j = load_json_file(c.config);
  auto rec = load_json_file(j.at("trajectory").get<std::string>()).get<TrajectoryRecord>();
  std::string source = j.value("a_ring", std::string("stage1"));
  Matrix A_ring =
      source == "stage1" ? stage1_matrix(rec, j.value("lad", LadConfig{})) : load_matrix(source);

  FilterMode mode = j.value("mode", std::string("ranking")) == "threshold" ? FilterMode::Threshold
                                                                           : FilterMode::Ranking;
  FilterResult fr;
  if (mode == FilterMode::Threshold) {
    ThresholdParams tp = j.value("threshold", ThresholdParams{});
    tp.validate();
    fr = filter_threshold(rec.states, A_ring, tp);
  } else {
    RankingParams rp = j.value("ranking", RankingParams{});
    rp.validate();
    fr = filter_ranking(rec.states, A_ring, rp);
  }
  DetectionMetrics dm = detection_metrics(fr, rec.schedule);

  std::filesystem::create_directories(c.out);
  json out{{"A_ring", A_ring}, {"filter", fr}, {"detection", dm}};
  write_text_file(c.out + "/filter.json", out.dump(2) + "\n");
  write_text_file(c.out + "/retained.csv", retained_to_csv(fr));
  std::size_t kept = 0;
  for (const auto& r : fr.retained) kept += r.size();
  std::cout << "filter: middle=" << fr.middle.size() << " retained_total=" << kept << " -> "
            << c.out << "/filter.{json,csv}\n";
  return 0;
}

int cmd_two_stage(const Common& c) {
  if (c.config.empty()) fail(ErrorCode::ConfigError, "two-stage requires --config");
  json j = load_json_file(c.config);
  auto rec = load_json_file(j.at("trajectory").get<std::string>()).get<TrajectoryRecord>();
  TwoStageConfig cfg = j.value("filter", TwoStageConfig{});
  cfg.validate();
  PipelineReport pr = two_stage(rec.states, cfg, &rec.system, &rec.schedule);
  std::filesystem::create_directories(c.out);
  write_text_file(c.out + "/pipeline.json", json(pr).dump(2) + "\n");
  write_text_file(c.out + "/retained.csv", retained_to_csv(pr.filter));
  std::cout << "two-stage: stage1_err=" << fmt_double(pr.stage1_error)
            << " stage2_err=" << fmt_double(pr.stage2_error) << " -> " << c.out
            << "/pipeline.json\n";
  return 0;
}

int cmd_experiment(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    load_json_file(c.config).get_to(cfg);
    if (!c.preset.empty() && preset_from_name(c.preset) != cfg.preset)
      fail(ErrorCode::ConfigError, "--preset conflicts with config file");
  } else if (!c.preset.empty()) {
    cfg = preset_config(preset_from_name(c.preset));
  } else {
    fail(ErrorCode::ConfigError, "experiment requires --preset or --config");
  }
  if (c.has_seed) cfg.base_seed = c.seed;
  if (c.out != "out") cfg.output_dir = c.out;
  ExperimentReport rep = run_experiment(cfg);
  write_report(rep, cfg.output_dir);
  std::cout << "experiment: " << preset_name(cfg.preset) << " rows=" << rep.rows.size() << " -> "
            << cfg.output_dir << "/{rows.csv,medians.csv,report.json}\n";
  for (const auto& m : rep.medians)
    std::cout << "  T=" << m.T << " " << m.estimator << " median=" << fmt_double(m.median)
              << " n_ok=" << m.ok_count << "\n";
  return 0;
}

int cmd_plot_data(const Common& c, std::string report_path, std::string kind) {
  if (!c.config.empty()) {
    json j = load_json_file(c.config);
    if (report_path.empty()) report_path = j.value("report", std::string());
    if (kind.empty()) kind = j.value("kind", std::string());
  }
  if (report_path.empty()) fail(ErrorCode::ConfigError, "plot-data needs a report path");
  if (kind.empty()) kind = "error_vs_t";
  if (std::filesystem::is_directory(report_path)) report_path += "/report.json";
  auto rep = load_json_file(report_path).get<ExperimentReport>();
  PlotKind pk;
  if (kind == "error_vs_t")
    pk = PlotKind::ErrorVsT;
  else if (kind == "residual_scatter")
    pk = PlotKind::ResidualScatter;
  else
    fail(ErrorCode::ConfigError, "unknown plot kind: " + kind);
  // without an explicit --out, plot files land next to the report they came from
  std::string dest = c.out;
  if (!c.out_set) {
    auto parent = std::filesystem::path(report_path).parent_path();
    if (!parent.empty()) dest = parent.string();
  }
  emit_plot_data(rep, pk, dest);
  std::cout << "plot-data: " << kind << " -> " << dest << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sysid: networked linear system identification under adversarial attacks"};
  app.require_subcommand(1);
  app.fallthrough();

  Common c;
  auto* seed_opt = app.add_option("--seed", c.seed, "base RNG seed override");
  app.add_option("--config", c.config, "JSON config file");
  auto* out_opt = app.add_option("--out", c.out, "output directory");
  app.add_option("--threads", c.threads, "OpenMP thread count (0 = runtime default)");
  app.add_option("--preset", c.preset, "experiment preset name");

  auto* gen = app.add_subcommand("gen-system", "draw a stable system matrix");
  double f_rho = 0, f_opnorm = 0;
  std::size_t f_n = 0;
  auto* n_opt = gen->add_option("--n", f_n, "dimension");
  auto* rho_opt = gen->add_option("--rho", f_rho, "target spectral radius");
  auto* op_opt = gen->add_option("--opnorm", f_opnorm, "target operator norm");

  auto* sim = app.add_subcommand("simulate", "roll out a trajectory under noise and attack");
  auto* est = app.add_subcommand("estimate", "one-stage estimators on a stored trajectory");
  auto* fil = app.add_subcommand("filter", "residual filter on a stored trajectory");
  auto* two = app.add_subcommand("two-stage", "full two-stage pipeline");
  auto* exp = app.add_subcommand("experiment", "multi-trial experiment sweep");
  auto* plo = app.add_subcommand("plot-data", "plot-ready series from a stored report");
  std::string plot_report, plot_kind;
  plo->add_option("--report", plot_report, "experiment report.json (or its directory)");
  plo->add_option("--kind", plot_kind, "error_vs_t | residual_scatter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    c.has_seed = seed_opt->count() > 0;
    c.out_set = out_opt->count() > 0;
    if (c.threads > 0) set_thread_count(c.threads);
    if (gen->parsed()) {
      json flags;
      if (n_opt->count()) flags["n"] = f_n;
      if (rho_opt->count()) flags["rho"] = f_rho;
      if (op_opt->count()) flags["opnorm"] = f_opnorm;
      return cmd_gen_system(c, flags);
    }
    if (sim->parsed()) return cmd_simulate(c);
    if (est->parsed()) return cmd_estimate(c);
    if (fil->parsed()) return cmd_filter(c);
    if (two->parsed()) return cmd_two_stage(c);
    if (exp->parsed()) return cmd_experiment(c);
    if (plo->parsed()) return cmd_plot_data(c, plot_report, plot_kind);
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return code_to_exit(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error [config]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

#include "sysid/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "sysid/io.hpp"
#include "sysid/parallel.hpp"
#include "sysid/rng.hpp"

namespace sysid {

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::OneStageComparison: return "one_stage_comparison";
    case Preset::FilterVisualization: return "filter_visualization";
    case Preset::TwoStageVsOneStage: return "two_stage_vs_one_stage";
    case Preset::OneStageFailureDemo: return "one_stage_failure_demo";
    case Preset::Custom: return "custom";
  }
  return "custom";
}

Preset preset_from_name(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    if (c == '-') c = '_';
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
  }
  if (s == "one_stage_comparison") return Preset::OneStageComparison;
  if (s == "filter_visualization") return Preset::FilterVisualization;
  if (s == "two_stage_vs_one_stage") return Preset::TwoStageVsOneStage;
  if (s == "one_stage_failure_demo") return Preset::OneStageFailureDemo;
  if (s == "custom") return Preset::Custom;
  fail(ErrorCode::ConfigError, "unknown preset: " + name);
}

// The shared benchmark plant: n = 10, spectral radius 0.75, operator norm
// 1.5, sigma_w = 3, node-wise sign-following attack at 40 sigma_w with
// p = 0.4. Magnitude chosen so corrupted rows are unmistakable against the
// noise floor while states stay bounded.
static void shared_plant(ExperimentConfig& c) {
  c.system = SystemSpec{10, 0.75, 1.5, 42};
  c.noise = NoiseModel{NoiseKind::Gaussian, 3.0};
  c.attack = AttackStrategy{AttackKind::MisleadingNodewise, 120.0, 0.4};
}

static TwoStageConfig cutoff_filter() {
  TwoStageConfig f;
  f.mode = FilterMode::Ranking;
  f.ranking.mode = RankingMode::FixedCutoff;
  f.ranking.norm_lo = 30.0;
  f.ranking.norm_hi = 600.0;
  f.ranking.ratio_max = 0.1;
  return f;
}

ExperimentConfig preset_config(Preset p) {
  ExperimentConfig c;
  c.preset = p;
  switch (p) {
    case Preset::OneStageComparison:
      shared_plant(c);
      c.T_grid = {250, 500, 1000, 2000, 4000};
      c.seeds = 10;
      c.estimators = {"ls", "l2", "l1"};
      c.output_dir = "out/one_stage_comparison";
      break;
    case Preset::TwoStageVsOneStage:
      shared_plant(c);
      c.T_grid = {500, 1000, 2000, 4000, 8000};
      c.seeds = 10;
      c.estimators = {"l1", "two_stage"};
      c.filter = cutoff_filter();
      c.output_dir = "out/two_stage_vs_one_stage";
      break;
    case Preset::FilterVisualization:
      shared_plant(c);
      c.T_grid = {1000};
      c.seeds = 1;
      c.estimators = {"l1", "two_stage"};
      c.filter = cutoff_filter();
      c.output_dir = "out/filter_visualization";
      break;
    case Preset::OneStageFailureDemo:
      c.system = SystemSpec{2, 0.5, 0.5, 42};  // placeholder; the demo plant is A = 0
      c.noise = NoiseModel{NoiseKind::Gaussian, 1.0};
      c.attack = AttackStrategy{AttackKind::MisleadingAlternating, 30.0, 0.45};
      c.failure = FailureDemoParams{2, 0.45, 30.0, 1.0, 100000};
      c.T_grid = {100, 1000, 10000, 100000};
      c.seeds = 10;
      c.estimators = {"ls_attacked", "ls_clean"};
      c.output_dir = "out/one_stage_failure_demo";
      break;
    case Preset::Custom:
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (T_grid.empty()) fail(ErrorCode::ConfigError, "empty T grid");
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    if (T_grid[k] == 0) fail(ErrorCode::ConfigError, "T must be positive");
    if (k > 0 && T_grid[k] <= T_grid[k - 1])
      fail(ErrorCode::ConfigError, "T grid must be strictly increasing");
  }
  if (seeds == 0) fail(ErrorCode::ConfigError, "need at least one trial");
  noise.validate();
  attack.validate();
  if (preset != Preset::OneStageFailureDemo) {
    system.validate();
    if (estimators.empty()) fail(ErrorCode::ConfigError, "no estimators requested");
    std::set<std::string> seen;
    for (const auto& e : estimators) {
      if (e != "ls" && e != "l2" && e != "l1" && e != "two_stage")
        fail(ErrorCode::ConfigError, "unknown estimator: " + e);
      if (!seen.insert(e).second) fail(ErrorCode::ConfigError, "duplicate estimator: " + e);
    }
    filter.validate();
  } else {
    if (failure.n == 0 || failure.T_max < 2) fail(ErrorCode::ConfigError, "bad failure demo size");
    if (!(failure.p >= 0.0 && failure.p < 0.5) || failure.c_bar < 0.0 || failure.sigma_w < 0.0)
      fail(ErrorCode::ConfigError, "bad failure demo parameters");
  }
}

double quantile_of(Vec v, double prob) {
  if (v.empty()) return kMissing;
  std::sort(v.begin(), v.end());
  double h = prob * double(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  double frac = h - double(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double median_of(Vec v) { return quantile_of(std::move(v), 0.5); }

static void sort_rows(std::vector<ExperimentRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    if (a.T != b.T) return a.T < b.T;
    if (a.trial != b.trial) return a.trial < b.trial;
    return a.estimator < b.estimator;
  });
}

static std::vector<MedianRow> compute_medians(const std::vector<ExperimentRow>& rows) {
  std::map<std::pair<std::size_t, std::string>, std::pair<Vec, Vec>> groups;  // errs, retained
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    auto& g = groups[{r.T, r.estimator}];
    g.first.push_back(r.opnorm_err);
    if (!std::isnan(r.retained_median)) g.second.push_back(r.retained_median);
  }
  std::vector<MedianRow> out;
  for (auto& [key, g] : groups) {
    MedianRow m;
    m.T = key.first;
    m.estimator = key.second;
    m.ok_count = g.first.size();
    m.median = median_of(g.first);
    m.q25 = quantile_of(g.first, 0.25);
    m.q75 = quantile_of(g.first, 0.75);
    m.retained_median = median_of(g.second);
    out.push_back(std::move(m));
  }
  return out;
}

// misclassification inside the middle-norm window: retained-but-attacked plus
// dropped-but-clean, as a fraction of |C|; worst node reported
static double worst_misclass(const FilterResult& f, const AttackSchedule& sched) {
  const std::size_t n = f.retained.size();
  if (f.middle.empty()) return kMissing;
  std::vector<std::uint8_t> in_middle(f.T, 0);
  for (std::size_t t : f.middle) in_middle[t] = 1;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> kept(f.T, 0);
    for (std::size_t t : f.retained[i]) kept[t] = 1;
    std::size_t bad = 0;
    for (std::size_t t : f.middle) {
      bool attacked = sched.at(t, i);
      if (kept[t] ? attacked : !attacked) ++bad;
    }
    worst = std::max(worst, double(bad) / double(f.middle.size()));
  }
  return worst;
}

static Matrix ls_all_rows(const std::vector<Vec>& states) {
  const std::size_t n = states.front().size();
  std::vector<Vec> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = ls_rowwise(node_data(states, i));
  return assemble_matrix(rows);
}

static double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool parallel) {
  cfg.validate();
  if (cfg.preset == Preset::OneStageFailureDemo) {
    ExperimentReport rep = failure_demo(cfg.failure, cfg.seeds, cfg.base_seed, parallel);
    rep.cfg = cfg;
    return rep;
  }

  const SystemMatrix sys = generate_system(cfg.system);
  const std::size_t E = cfg.estimators.size();
  const std::size_t combos = cfg.T_grid.size() * cfg.seeds;
  const bool want_two = std::find(cfg.estimators.begin(), cfg.estimators.end(), "two_stage") !=
                        cfg.estimators.end();

  ExperimentReport rep;
  rep.cfg = cfg;
  rep.rows.resize(combos * E);
  std::vector<ScatterPoint> scatter;

  parallel_for(combos, parallel, [&](std::size_t c) {
    const std::size_t ti = c / cfg.seeds;
    const std::size_t trial = c % cfg.seeds;
    const std::size_t T = cfg.T_grid[ti];
    const std::uint64_t seed = rng::trial_seed(cfg.base_seed, T, trial);

    auto* slot = &rep.rows[c * E];
    for (std::size_t e = 0; e < E; ++e) {
      slot[e].preset = preset_name(cfg.preset);
      slot[e].T = T;
      slot[e].trial = trial;
      slot[e].estimator = cfg.estimators[e];
    }

    TrajectoryRecord traj;
    try {
      traj = simulate(sys, T, cfg.noise, cfg.attack, nullptr, seed);
    } catch (const Error& err) {
      for (std::size_t e = 0; e < E; ++e) slot[e].status = error_code_name(err.code());
      return;
    }

    // one pipeline run feeds both the l1 (stage I) and two_stage rows
    PipelineReport pr;
    bool pr_ok = false;
    std::string pr_status;
    double pr_ms = 0.0;
    if (want_two) {
      double t0 = now_ms();
      try {
        pr = two_stage(traj.states, cfg.filter, &sys, &traj.schedule, false);
        pr_ok = true;
      } catch (const Error& err) {
        pr_status = error_code_name(err.code());
      }
      pr_ms = now_ms() - t0;
    }

    for (std::size_t e = 0; e < E; ++e) {
      ExperimentRow& row = slot[e];
      const std::string& est = cfg.estimators[e];
      double t0 = now_ms();
      try {
        if (est == "ls") {
          ErrorReport er = estimation_error(ls_all_rows(traj.states), sys.A);
          row.opnorm_err = er.opnorm_err;
          row.row_errs = er.row_errs;
        } else if (est == "l2") {
          ErrorReport er = estimation_error(l2_full(traj.states).A, sys.A);
          row.opnorm_err = er.opnorm_err;
          row.row_errs = er.row_errs;
        } else if (est == "l1") {
          if (want_two && pr_ok) {
            row.opnorm_err = pr.stage1_error;
            row.row_errs = pr.stage1_row_errs;
          } else {
            const std::size_t n = sys.A.rows();
            std::vector<Vec> rows(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = lad_rowwise(node_data(traj.states, i)).a;
            ErrorReport er = estimation_error(assemble_matrix(rows), sys.A);
            row.opnorm_err = er.opnorm_err;
            row.row_errs = er.row_errs;
          }
        } else {  // two_stage
          if (!pr_ok) {
            row.status = pr_status;
          } else {
            row.opnorm_err = pr.stage2_error;
            row.row_errs = pr.stage2_row_errs;
            Vec sizes(pr.retained_sizes.begin(), pr.retained_sizes.end());
            row.retained_median = median_of(sizes);
            row.misclass_worst = worst_misclass(pr.filter, traj.schedule);
            if (pr.detection) {
              for (std::size_t i = 0; i < pr.detection->tp.size(); ++i) {
                row.tp += pr.detection->tp[i];
                row.fp += pr.detection->fp[i];
                row.fn += pr.detection->fn[i];
                row.tn += pr.detection->tn[i];
              }
            }
            row.wall_ms = pr_ms;
          }
        }
      } catch (const Error& err) {
        row.status = error_code_name(err.code());
      } catch (const std::exception&) {
        row.status = "error";
      }
      if (est != "two_stage") row.wall_ms = now_ms() - t0;
    }

    if (cfg.preset == Preset::FilterVisualization && ti == 0 && trial == 0 && pr_ok) {
      std::vector<ScatterPoint> pts;
      const std::size_t n = pr.filter.residuals.size();
      pts.reserve(n * pr.filter.T);
      for (std::size_t t = 0; t < pr.filter.T; ++t)
        for (std::size_t i = 0; i < n; ++i)
          pts.push_back({t, i, pr.filter.norm_used[t], pr.filter.residuals[i][t],
                         traj.schedule.at(t, i)});
      scatter = std::move(pts);  // single writer: the (ti=0, trial=0) cell
    }
  });

  sort_rows(rep.rows);
  rep.medians = compute_medians(rep.rows);
  rep.scatter = std::move(scatter);
  return rep;
}

ExperimentReport failure_demo(const FailureDemoParams& fd, std::size_t seeds,
                              std::uint64_t base_seed, bool parallel) {
  if (fd.n == 0 || fd.T_max < 2 || seeds == 0)
    fail(ErrorCode::ConfigError, "bad failure demo parameters");

  std::vector<std::size_t> cps;
  for (std::size_t c = 100; c < fd.T_max; c *= 10) cps.push_back(c);
  cps.push_back(fd.T_max);

  SystemMatrix plant;  // A = 0: every transition is pure noise plus attack
  plant.A = Matrix(fd.n, fd.n);
  plant.rho = 0.0;
  plant.opnorm = 0.0;
  plant.psi = 1.0;

  const NoiseModel noise{NoiseKind::Gaussian, fd.sigma_w};
  const AttackStrategy attacked{AttackKind::MisleadingAlternating, fd.c_bar, fd.p};
  const AttackStrategy clean{AttackKind::None, 0.0, 0.0};

  ExperimentReport rep;
  rep.cfg = preset_config(Preset::OneStageFailureDemo);
  rep.cfg.failure = fd;
  rep.cfg.seeds = seeds;
  rep.cfg.base_seed = base_seed;
  rep.cfg.T_grid = cps;
  rep.rows.resize(seeds * cps.size() * 2);

  parallel_for(seeds, parallel, [&](std::size_t trial) {
    const std::uint64_t seed = rng::trial_seed(base_seed, fd.T_max, trial);
    for (std::size_t arm = 0; arm < 2; ++arm) {
      const char* tag = arm == 0 ? "ls_attacked" : "ls_clean";
      TrajectoryRecord traj;
      bool sim_ok = true;
      std::string sim_status;
      try {
        // same seed on both arms: identical x0 and noise stream, attack only
        traj = simulate(plant, fd.T_max, noise, arm == 0 ? attacked : clean, nullptr, seed);
      } catch (const Error& err) {
        sim_ok = false;
        sim_status = error_code_name(err.code());
      }
      for (std::size_t k = 0; k < cps.size(); ++k) {
        ExperimentRow& row = rep.rows[(trial * cps.size() + k) * 2 + arm];
        row.preset = preset_name(Preset::OneStageFailureDemo);
        row.T = cps[k];
        row.trial = trial;
        row.estimator = tag;
        if (!sim_ok) {
          row.status = sim_status;
          continue;
        }
        try {
          const std::size_t cp = cps[k];
          std::vector<Vec> rows_hat(fd.n);
          for (std::size_t i = 0; i < fd.n; ++i) {
            RegressionData data;
            data.node = i;
            data.X = Matrix(cp, fd.n);
            data.y.resize(cp);
            data.times.resize(cp);
            for (std::size_t t = 0; t < cp; ++t) {
              for (std::size_t c2 = 0; c2 < fd.n; ++c2) data.X(t, c2) = traj.states[t][c2];
              data.y[t] = traj.states[t + 1][i];
              data.times[t] = t;
            }
            rows_hat[i] = ls_rowwise(data);
          }
          Matrix A_T = assemble_matrix(rows_hat);
          row.opnorm_err = frobenius(A_T);  // truth is the zero matrix
          row.row_errs.resize(fd.n);
          for (std::size_t i = 0; i < fd.n; ++i) row.row_errs[i] = norm2(A_T.row(i));
        } catch (const Error& err) {
          row.status = error_code_name(err.code());
        }
      }
    }
  });

  sort_rows(rep.rows);
  rep.medians = compute_medians(rep.rows);
  return rep;
}

void write_report(const ExperimentReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/rows.csv", rows_to_csv(rep.rows));
  write_text_file(dir + "/medians.csv", medians_to_csv(rep.medians));
  json j = rep;
  write_text_file(dir + "/report.json", j.dump(2) + "\n");
  if (!rep.scatter.empty()) write_text_file(dir + "/scatter.csv", scatter_to_csv(rep.scatter));
}

void emit_plot_data(const ExperimentReport& rep, PlotKind kind, const std::string& dir) {
  std::filesystem::create_directories(dir);
  if (kind == PlotKind::ErrorVsT) {
    if (rep.medians.empty()) fail(ErrorCode::IoError, "no medians to plot");
    std::ostringstream csv;
    csv << "T,estimator,median,q25,q75\n";
    std::vector<std::string> names;
    for (const auto& m : rep.medians) {
      csv << m.T << "," << m.estimator << "," << fmt_double(m.median) << ","
          << fmt_double(m.q25) << "," << fmt_double(m.q75) << "\n";
      if (std::find(names.begin(), names.end(), m.estimator) == names.end())
        names.push_back(m.estimator);
    }
    write_text_file(dir + "/error_vs_t.csv", csv.str());

    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel 'T'\n"
       << "set ylabel 'median operator-norm error'\n"
       << "set key outside\n"
       << "set term pngcairo size 900,600\n"
       << "set output 'error_vs_t.png'\n"
       << "plot \\\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
      gp << "  'error_vs_t.csv' every ::1 using (strcol(2) eq '" << names[k]
         << "' ? $1 : NaN):3 with linespoints title '" << names[k] << "'";
      gp << (k + 1 < names.size() ? ", \\\n" : "\n");
    }
    write_text_file(dir + "/error_vs_t.gp", gp.str());
  } else {
    if (rep.scatter.empty()) fail(ErrorCode::IoError, "no scatter points to plot");
    write_text_file(dir + "/scatter.csv", scatter_to_csv(rep.scatter));
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel '||x_t||'\n"
       << "set ylabel 'residual'\n"
       << "set term pngcairo size 900,600\n"
       << "set output 'scatter.png'\n"
       << "plot 'scatter.csv' every ::1 using ($6==0?$3:NaN):4 pt 7 ps 0.4 title 'clean', \\\n"
       << "     'scatter.csv' every ::1 using ($6==1?$3:NaN):4 pt 7 ps 0.4 lc rgb 'red' "
          "title 'attacked'\n";
    write_text_file(dir + "/scatter.gp", gp.str());
  }
}

}  // namespace sysid

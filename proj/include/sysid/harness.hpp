#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sysid/pipeline.hpp"

namespace sysid {

enum class Preset {
  OneStageComparison,
  FilterVisualization,
  TwoStageVsOneStage,
  OneStageFailureDemo,
  Custom,
};

const char* preset_name(Preset p);
Preset preset_from_name(const std::string& name);

struct FailureDemoParams {
  std::size_t n = 2;
  double p = 0.45;
  double c_bar = 30.0;  // absolute attack magnitude (presets use 30 * sigma_w)
  double sigma_w = 1.0;
  std::size_t T_max = 100000;
};

struct ExperimentConfig {
  Preset preset = Preset::Custom;
  SystemSpec system{10, 0.75, 1.5, 42};
  NoiseModel noise{NoiseKind::Gaussian, 3.0};
  AttackStrategy attack{AttackKind::MisleadingNodewise, 120.0, 0.4};
  std::vector<std::size_t> T_grid{1000};
  std::size_t seeds = 1;
  std::uint64_t base_seed = 1;
  std::vector<std::string> estimators{"ls"};  // subset of ls, l2, l1, two_stage
  TwoStageConfig filter;
  FailureDemoParams failure;
  std::string output_dir = "out";

  void validate() const;
};

// Fully expanded parameter sets for the built-in experiments.
ExperimentConfig preset_config(Preset p);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct ExperimentRow {
  std::string preset;
  std::size_t T = 0;  // trajectory length; checkpoint for the failure demo
  std::size_t trial = 0;
  std::string estimator;
  std::string status = "ok";  // or an error code name (failed-trial marker)
  double opnorm_err = kMissing;  // ||A_T||_F for the failure demo
  Vec row_errs;
  double retained_median = kMissing;  // median |T_i| over nodes (two_stage)
  double misclass_worst = kMissing;   // worst per-node (FP+FN)/|C| in the middle set
  std::size_t fp = 0, fn = 0, tp = 0, tn = 0;
  double wall_ms = 0.0;  // report.json only; rows.csv stays byte-deterministic
};

struct MedianRow {
  std::size_t T = 0;
  std::string estimator;
  std::size_t ok_count = 0;
  double median = kMissing, q25 = kMissing, q75 = kMissing;
  double retained_median = kMissing;
};

struct ScatterPoint {
  std::size_t t = 0, node = 0;
  double norm = 0.0, residual = 0.0;
  bool attacked = false;
};

struct ExperimentReport {
  ExperimentConfig cfg;
  std::vector<ExperimentRow> rows;      // sorted by (T, trial, estimator)
  std::vector<MedianRow> medians;       // per (T, estimator), successful rows only
  std::vector<ScatterPoint> scatter;    // FilterVisualization only
};

// One simulation per (T, trial); every requested estimator consumes the same
// trajectory. Per-trial seeds derive from hash(base_seed, T, trial); rows are
// sorted before writing, so output is identical for any thread count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, bool parallel = true);

// LS nonconvergence demo: A = 0, misleading alternating attack vs a no-attack
// arm on the same noise stream; ||A_T||_F tracked at decade checkpoints.
ExperimentReport failure_demo(const FailureDemoParams& fd, std::size_t seeds,
                              std::uint64_t base_seed, bool parallel = true);

// rows.csv + medians.csv + report.json (+ scatter.csv); creates dir as needed
void write_report(const ExperimentReport& rep, const std::string& dir);

enum class PlotKind { ErrorVsT, ResidualScatter };

// CSV series + a gnuplot script with log-scale axes
void emit_plot_data(const ExperimentReport& rep, PlotKind kind, const std::string& dir);

double median_of(Vec v);
double quantile_of(Vec v, double prob);  // linear interpolation on sorted values

}  // namespace sysid

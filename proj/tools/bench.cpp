#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "sysid/harness.hpp"
#include "sysid/io.hpp"
#include "sysid/parallel.hpp"
#include "sysid/rng.hpp"

using namespace sysid;
using clock_t_ = std::chrono::steady_clock;

static double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = clock_t_::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count());
  }
  return best;
}

int main(int argc, char** argv) {
  CLI::App app{"sysid_bench: OpenMP kernels vs the serial reference"};
  std::size_t T = 2000;
  int reps = 3, threads = 0;
  app.add_option("--T", T, "trajectory length");
  app.add_option("--reps", reps, "repetitions (best-of)");
  app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_thread_count(threads);

  ExperimentConfig cfg = preset_config(Preset::TwoStageVsOneStage);
  SystemMatrix sys = generate_system(cfg.system);
  TrajectoryRecord traj = simulate(sys, T, cfg.noise, cfg.attack, nullptr, 1234);

  PipelineReport serial, parallel;
  double t_ser = time_ms([&] { serial = two_stage(traj.states, cfg.filter, &sys, &traj.schedule, false); }, reps);
  double t_par = time_ms([&] { parallel = two_stage(traj.states, cfg.filter, &sys, &traj.schedule, true); }, reps);
  bool same = serial.A_ring == parallel.A_ring && serial.A_hat == parallel.A_hat;
  std::cout << "two_stage (T=" << T << ", n=" << sys.A.rows() << ")\n"
            << "  serial   " << t_ser << " ms\n"
            << "  parallel " << t_par << " ms  (x" << t_ser / t_par << ")\n"
            << "  bitwise identical: " << (same ? "yes" : "NO") << "\n";

  ExperimentConfig small = preset_config(Preset::OneStageComparison);
  small.T_grid = {250, 500};
  small.seeds = 4;
  ExperimentReport rs, rp;
  double e_ser = time_ms([&] { rs = run_experiment(small, false); }, 1);
  double e_par = time_ms([&] { rp = run_experiment(small, true); }, 1);
  bool rows_same = rows_to_csv(rs.rows) == rows_to_csv(rp.rows);
  std::cout << "experiment sweep (" << small.T_grid.size() * small.seeds << " cells)\n"
            << "  serial   " << e_ser << " ms\n"
            << "  parallel " << e_par << " ms  (x" << e_ser / e_par << ")\n"
            << "  rows.csv identical: " << (rows_same ? "yes" : "NO") << "\n";
  return (same && rows_same) ? 0 : 1;
}

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmrfdiff/scenario.hpp"

namespace gmrfdiff {

struct AlgorithmResult {
  std::string label;
  AlgorithmKind kind = AlgorithmKind::atc_gmrf;
  Eigen::VectorXd step_sizes;
  std::vector<double> msd;    // per iteration, linear, mean over non-diverged runs
  std::vector<double> comm;   // entries transmitted per iteration, mean over runs
  double dense_comm = 0.0;    // entries per iteration if every transmitted vector were dense
  Eigen::VectorXd steady_per_node;  // linear, mean over runs of the last-window average
  std::vector<std::size_t> diverged_runs;
  std::size_t completed_runs = 0;

  bool all_diverged() const { return completed_runs == 0; }
};

struct TrackingTrace {
  std::string algorithm;
  std::size_t node = 0;
  std::vector<std::size_t> components;
  std::vector<std::vector<double>> estimate;  // [component][iter], run 0
  std::vector<std::vector<double>> truth;     // [component][iter], run 0
};

struct RunResult {
  std::string scenario;
  std::uint64_t master_seed = 0;
  std::size_t runs = 0;
  std::size_t iters = 0;
  std::size_t steady_window = 0;
  std::vector<AlgorithmResult> algorithms;
  std::optional<TrackingTrace> tracking;
  std::vector<std::uint64_t> noise_seeds;  // seed trail: the noise stream seed of each run
  double wall_seconds = 0.0;

  const AlgorithmResult& algorithm(const std::string& label) const;
};

struct RunOptions {
  std::optional<std::size_t> jobs;  // overrides scenario.jobs
  bool record_tracking = true;
};

// Monte Carlo over scenario.runs independent runs. Within a run every
// algorithm consumes the same regressors, noise and parameter path. Throws
// Diverged when some algorithm diverges in every run, unless allow_unstable.
RunResult run_scenario(const ResolvedScenario& resolved, const RunOptions& options = {});
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

// Mean of the last `window` samples of a linear-scale trajectory, in dB.
double steady_state_msd(const std::vector<double>& trajectory, std::size_t window);

// Network steady-state MSD in dB (NaN when every run diverged).
double steady_msd_db(const RunResult& result, const AlgorithmResult& algorithm);

enum class SweepAxis { nu, kappa, support_size, gamma, step_size };

SweepAxis parse_axis(const std::string& name);
std::string to_string(SweepAxis axis);

// Copy of `scenario` with the axis set to `value`. step_size applies to every
// algorithm with an explicit step; gamma to every thresholded algorithm.
Scenario with_axis(const Scenario& scenario, SweepAxis axis, double value);

struct SweepRow {
  double axis_value = 0.0;
  std::string algorithm;
  double msd_db = 0.0;
};

// One steady-state record per (value, algorithm); seeds are shared across
// values so neighbouring points are paired.
std::vector<SweepRow> sweep(const Scenario& scenario, SweepAxis axis, const std::vector<double>& values,
                            const RunOptions& options = {});

// Simulated MSD gain (dB) of `aware` over `agnostic` across a (nu, kappa)
// grid, plus the matching theoretical gain. Rows carry axis_value = nu and
// algorithm = "gain[kappa=...]" or "theory_gain[kappa=...]".
std::vector<SweepRow> gain_sweep(const Scenario& scenario, const std::string& aware, const std::string& agnostic,
                                 const std::vector<double>& nu_values, const std::vector<double>& kappa_values,
                                 const RunOptions& options = {});

std::string format_number(double value);

}  // namespace gmrfdiff

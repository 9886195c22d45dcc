#include "gmrfdiff/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "gmrfdiff/analysis.hpp"
#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/random.hpp"

namespace gmrfdiff {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Static part of the per-iteration message count of one algorithm.
struct CommPlan {
  double fixed = 0.0;                   // data and gradient exchange
  std::vector<NodeIndex> broadcasters;  // nodes sending their combination input
  bool sparse_payload = false;          // ASC sends only the support of zeta
};

CommPlan plan_comm(const ResolvedScenario& r, const ResolvedAlgorithm& a) {
  const std::size_t n = r.topology.n_nodes();
  const double m = static_cast<double>(r.stats.m_dim);
  CommPlan plan;
  if (a.spec.kind == AlgorithmKind::centralized) {
    plan.fixed = static_cast<double>(n) * (m + 1.0);
    return plan;
  }
  // Raw (u_i, x_i) exchange along dependency edges the weights actually use.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && a.precision(static_cast<Index>(i), static_cast<Index>(j)) != 0.0) {
        plan.fixed += m + 1.0;
        break;
      }
    }
  }
  // One M-vector per off-diagonal adaptation weight.
  for (Index j = 0; j < a.weights.s.cols(); ++j) {
    for (Index i = 0; i < a.weights.s.rows(); ++i) {
      if (i != j && a.weights.s(i, j) != 0.0) plan.fixed += m;
    }
  }
  const bool cta = a.spec.kind == AlgorithmKind::cta_gmrf || a.spec.kind == AlgorithmKind::cta_agnostic;
  const MatrixXd& c = cta ? a.weights.p1 : a.weights.p2;
  for (Index j = 0; j < c.rows(); ++j) {
    for (Index i = 0; i < c.cols(); ++i) {
      if (i != j && c(j, i) != 0.0) {
        plan.broadcasters.push_back(static_cast<NodeIndex>(j));
        break;
      }
    }
  }
  plan.sparse_payload = a.spec.kind == AlgorithmKind::asc;
  return plan;
}

double dense_count(const CommPlan& plan, std::size_t m_dim) {
  return plan.fixed + static_cast<double>(plan.broadcasters.size() * m_dim);
}

struct RunRecord {
  std::vector<std::vector<double>> msd;   // [algorithm][iter]
  std::vector<std::vector<double>> comm;  // [algorithm][iter]
  std::vector<VectorXd> steady;           // [algorithm] per node
  std::vector<bool> diverged;
  std::optional<TrackingTrace> tracking;
};

struct Context {
  const ResolvedScenario& r;
  std::vector<PotentialField> fields;
  std::vector<CommPlan> plans;
  std::optional<std::size_t> tracked;  // algorithm index recorded in run 0
};

RunRecord simulate_run(const Context& ctx, std::size_t run) {
  const ResolvedScenario& r = ctx.r;
  const Scenario& s = r.scenario;
  const std::size_t n = r.topology.n_nodes();
  const std::size_t m = r.stats.m_dim;
  const std::size_t n_alg = r.algorithms.size();
  const std::size_t window_start = s.iters - s.steady_window;

  RandomStream noise(s.seed, run, StreamRole::noise);
  RandomStream regressors(s.seed, run, StreamRole::regressors);
  RandomStream parameter(s.seed, run, StreamRole::parameter);
  RandomStream support(s.seed, run, StreamRole::support);

  RunRecord rec;
  rec.msd.assign(n_alg, std::vector<double>(s.iters, kNaN));
  rec.comm.assign(n_alg, std::vector<double>(s.iters, 0.0));
  rec.steady.assign(n_alg, VectorXd::Zero(static_cast<Index>(n)));
  rec.diverged.assign(n_alg, false);

  std::vector<AlgorithmState> states;
  std::vector<VectorXd> central(n_alg);
  for (const auto& a : r.algorithms) {
    states.emplace_back(n, m, a.step_sizes);
    central[states.size() - 1] = VectorXd::Zero(static_cast<Index>(m));
  }

  const bool track = run == 0 && ctx.tracked.has_value();
  if (track) {
    TrackingTrace t;
    t.algorithm = r.algorithms[*ctx.tracked].spec.label;
    t.node = s.tracking.node;
    t.components = s.tracking.components;
    t.estimate.assign(t.components.size(), std::vector<double>(s.iters, 0.0));
    t.truth.assign(t.components.size(), std::vector<double>(s.iters, 0.0));
    rec.tracking = std::move(t);
  }

  VectorXd theta = initial_parameter(r.process, support);
  VectorXd node_err(static_cast<Index>(n));
  Snapshot data;
  for (std::size_t k = 0; k < s.iters; ++k) {
    if (k > 0) theta = step_parameter(r.process, theta, k, parameter);
    data.regressors = draw_regressors(r.stats, regressors);
    data.observations = observe(theta, data.regressors, r.model.sample(noise));

    for (std::size_t a = 0; a < n_alg; ++a) {
      if (rec.diverged[a]) continue;
      const ResolvedAlgorithm& alg = r.algorithms[a];
      AlgorithmState& st = states[a];
      try {
        switch (alg.spec.kind) {
          case AlgorithmKind::centralized:
            central[a] = centralized_lms_step(central[a], data, alg.precision, alg.step_sizes(0));
            break;
          case AlgorithmKind::cta_gmrf:
          case AlgorithmKind::cta_agnostic:
            cta_step(st, alg.weights.s, alg.weights.p1, data, ctx.fields[a]);
            break;
          case AlgorithmKind::acs:
            acs_step(st, alg.weights.s, alg.weights.p2, alg.spec.threshold, data, ctx.fields[a]);
            break;
          case AlgorithmKind::asc:
            asc_step(st, alg.weights.s, alg.weights.p2, alg.spec.threshold, data, ctx.fields[a]);
            break;
          default:
            atc_step(st, alg.weights.s, alg.weights.p2, data, ctx.fields[a]);
            break;
        }
      } catch (const Diverged&) {
        rec.diverged[a] = true;
        continue;
      }

      if (alg.spec.kind == AlgorithmKind::centralized) {
        node_err.setConstant((theta - central[a]).squaredNorm());
      } else {
        node_err = (st.thetas.rowwise() - theta.transpose()).rowwise().squaredNorm();
      }
      rec.msd[a][k] = node_err.mean();
      if (k >= window_start) rec.steady[a] += node_err;

      const CommPlan& plan = ctx.plans[a];
      double sent = plan.fixed;
      for (NodeIndex j : plan.broadcasters) {
        sent += plan.sparse_payload
                    ? static_cast<double>((st.scratch.row(static_cast<Index>(j)).array() != 0.0).count())
                    : static_cast<double>(m);
      }
      rec.comm[a][k] = sent;

      if (track && a == *ctx.tracked) {
        for (std::size_t c = 0; c < rec.tracking->components.size(); ++c) {
          const auto comp = static_cast<Index>(rec.tracking->components[c]);
          rec.tracking->estimate[c][k] = alg.spec.kind == AlgorithmKind::centralized
                                             ? central[a](comp)
                                             : st.thetas(static_cast<Index>(rec.tracking->node), comp);
          rec.tracking->truth[c][k] = theta(comp);
        }
      }
    }
  }
  for (std::size_t a = 0; a < n_alg; ++a) {
    if (rec.diverged[a]) {
      std::fill(rec.msd[a].begin(), rec.msd[a].end(), kNaN);
    } else {
      rec.steady[a] /= static_cast<double>(s.steady_window);
    }
  }
  return rec;
}

}  // namespace

const AlgorithmResult& RunResult::algorithm(const std::string& label) const {
  for (const auto& a : algorithms) {
    if (a.label == label) return a;
  }
  throw InvalidParameter("no result for algorithm '" + label + "'");
}

RunResult run_scenario(const ResolvedScenario& r, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const Scenario& s = r.scenario;
  const std::size_t n = r.topology.n_nodes();
  const std::size_t n_alg = r.algorithms.size();

  Context ctx{r, {}, {}, std::nullopt};
  for (const auto& a : r.algorithms) {
    ctx.fields.emplace_back(r.topology, a.precision);
    ctx.plans.push_back(plan_comm(r, a));
  }
  if (options.record_tracking && (s.output == OutputKind::tracking || !s.tracking.algorithm.empty())) {
    std::size_t idx = 0;
    if (!s.tracking.algorithm.empty()) {
      while (r.algorithms[idx].spec.label != s.tracking.algorithm) ++idx;
    }
    ctx.tracked = idx;
  }

  RunResult out;
  out.scenario = s.name;
  out.master_seed = s.seed;
  out.runs = s.runs;
  out.iters = s.iters;
  out.steady_window = s.steady_window;
  for (std::size_t a = 0; a < n_alg; ++a) {
    AlgorithmResult res;
    res.label = r.algorithms[a].spec.label;
    res.kind = r.algorithms[a].spec.kind;
    res.step_sizes = r.algorithms[a].step_sizes;
    res.msd.assign(s.iters, 0.0);
    res.comm.assign(s.iters, 0.0);
    res.dense_comm = dense_count(ctx.plans[a], r.stats.m_dim);
    res.steady_per_node = VectorXd::Zero(static_cast<Index>(n));
    out.algorithms.push_back(std::move(res));
  }
  for (std::size_t run = 0; run < s.runs; ++run) out.noise_seeds.push_back(derive_seed(s.seed, run, StreamRole::noise));

  // Runs execute in batches and are merged in run order, so the sums (and
  // every output byte) do not depend on the worker count.
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs.value_or(s.jobs));
  const std::size_t batch = jobs * 4;
  std::vector<RunRecord> records;
  for (std::size_t first = 0; first < s.runs; first += batch) {
    const std::size_t count = std::min(batch, s.runs - first);
    records.assign(count, RunRecord{});
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          records[i] = simulate_run(ctx, first + i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < count; ++i) {
      RunRecord& rec = records[i];
      for (std::size_t a = 0; a < n_alg; ++a) {
        AlgorithmResult& res = out.algorithms[a];
        for (std::size_t k = 0; k < s.iters; ++k) res.comm[k] += rec.comm[a][k];
        if (rec.diverged[a]) {
          res.diverged_runs.push_back(first + i);
          continue;
        }
        for (std::size_t k = 0; k < s.iters; ++k) res.msd[k] += rec.msd[a][k];
        res.steady_per_node += rec.steady[a];
        ++res.completed_runs;
      }
      if (rec.tracking) out.tracking = std::move(rec.tracking);
    }
  }

  bool any_all_diverged = false;
  for (auto& res : out.algorithms) {
    for (double& c : res.comm) c /= static_cast<double>(s.runs);
    if (res.all_diverged()) {
      any_all_diverged = true;
      std::fill(res.msd.begin(), res.msd.end(), kNaN);
      res.steady_per_node.setConstant(kNaN);
      continue;
    }
    const double completed = static_cast<double>(res.completed_runs);
    for (double& v : res.msd) v /= completed;
    res.steady_per_node /= completed;
  }
  if (any_all_diverged && !s.allow_unstable) {
    for (const auto& res : out.algorithms) {
      if (res.all_diverged()) throw Diverged("algorithm '" + res.label + "' diverged in every run");
    }
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  return run_scenario(resolve(scenario), options);
}

double steady_state_msd(const std::vector<double>& trajectory, std::size_t window) {
  if (window == 0 || window > trajectory.size()) throw InvalidParameter("steady-state window must lie in [1, length]");
  double sum = 0.0;
  for (std::size_t k = trajectory.size() - window; k < trajectory.size(); ++k) sum += trajectory[k];
  return to_db(sum / static_cast<double>(window));
}

double steady_msd_db(const RunResult& result, const AlgorithmResult& algorithm) {
  if (algorithm.all_diverged()) return kNaN;
  return steady_state_msd(algorithm.msd, result.steady_window);
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "nu") return SweepAxis::nu;
  if (name == "kappa") return SweepAxis::kappa;
  if (name == "support_size") return SweepAxis::support_size;
  if (name == "gamma") return SweepAxis::gamma;
  if (name == "step_size") return SweepAxis::step_size;
  throw ConfigError("unknown sweep axis '" + name + "' (expected nu, kappa, support_size, gamma or step_size)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::nu: return "nu";
    case SweepAxis::kappa: return "kappa";
    case SweepAxis::support_size: return "support_size";
    case SweepAxis::gamma: return "gamma";
    case SweepAxis::step_size: return "step_size";
  }
  return "unknown";
}

Scenario with_axis(const Scenario& scenario, SweepAxis axis, double value) {
  Scenario s = scenario;
  switch (axis) {
    case SweepAxis::nu:
      s.gmrf.nugget = value;
      break;
    case SweepAxis::kappa:
      s.gmrf.kappa = value;
      break;
    case SweepAxis::support_size:
      if (value < 0.0 || value != std::floor(value)) throw ConfigError("support_size values must be non-negative integers");
      s.parameter.support_size = static_cast<std::size_t>(value);
      break;
    case SweepAxis::gamma:
      for (auto& a : s.algorithms) {
        if (a.kind != AlgorithmKind::acs && a.kind != AlgorithmKind::asc) continue;
        a.threshold.gamma = value;
        try {
          a.threshold.validate();
        } catch (const Error& e) {
          throw ConfigError("algorithms." + a.label + ".threshold: " + e.what());
        }
      }
      break;
    case SweepAxis::step_size:
      for (auto& a : s.algorithms) {
        if (!a.match_rate_to) a.step_sizes = {value};
      }
      break;
  }
  return s;
}

std::vector<SweepRow> sweep(const Scenario& scenario, SweepAxis axis, const std::vector<double>& values,
                            const RunOptions& options) {
  std::vector<SweepRow> rows;
  RunOptions opts = options;
  opts.record_tracking = false;
  for (double value : values) {
    const RunResult result = run_scenario(with_axis(scenario, axis, value), opts);
    for (const auto& a : result.algorithms) rows.push_back(SweepRow{value, a.label, steady_msd_db(result, a)});
  }
  return rows;
}

std::vector<SweepRow> gain_sweep(const Scenario& scenario, const std::string& aware, const std::string& agnostic,
                                 const std::vector<double>& nu_values, const std::vector<double>& kappa_values,
                                 const RunOptions& options) {
  std::vector<SweepRow> rows;
  RunOptions opts = options;
  opts.record_tracking = false;
  for (double kappa : kappa_values) {
    const std::string suffix = "[kappa=" + format_number(kappa) + "]";
    for (double nu : nu_values) {
      const ResolvedScenario r = resolve(with_axis(with_axis(scenario, SweepAxis::kappa, kappa), SweepAxis::nu, nu));
      const RunResult result = run_scenario(r, opts);
      const double gain = steady_msd_db(result, result.algorithm(agnostic)) - steady_msd_db(result, result.algorithm(aware));
      rows.push_back(SweepRow{nu, "gain" + suffix, gain});

      double theory[2] = {0.0, 0.0};
      const std::string labels[2] = {aware, agnostic};
      for (int t = 0; t < 2; ++t) {
        for (const auto& a : r.algorithms) {
          if (a.spec.label != labels[t]) continue;
          const TheoryReport rep =
              analyze_strategy(r.topology, a.precision, r.model.covariance(), a.weights, a.step_sizes, r.stats);
          theory[t] = rep.ms_stable ? to_db(rep.msd_network) : kNaN;
        }
      }
      rows.push_back(SweepRow{nu, "theory_gain" + suffix, theory[1] - theory[0]});
    }
  }
  return rows;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

}  // namespace gmrfdiff

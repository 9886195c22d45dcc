#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gmrfdiff/analysis.hpp"
#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/runner.hpp"

using namespace gmrfdiff;

namespace {

const char* kBase = R"(
name: runner_check
seed: 99
runs: 6
iters: 600
steady_window: 100
topology:
  generate: {nodes: 5, radius: 0.7, seed: 2}
gmrf: {sigma2: 0.05, nugget: 0.9, kappa: 0.2}
regressors: {m_dim: 3, power_range: [0.2, 0.6]}
parameter: {kind: static_sparse, support_size: 1, value: 1.0}
algorithms:
  - {label: ATC-GMRF, kind: atc_gmrf, step_size: 0.01}
  - {label: CTA-GMRF, kind: cta_gmrf, step_size: 0.01}
  - {label: ATC, kind: atc_agnostic, match_rate_to: ATC-GMRF}
  - {label: Central, kind: centralized, match_rate_to: ATC-GMRF}
  - {label: Alone, kind: standalone, step_size: 0.01}
  - {label: ACS, kind: acs, step_size: 0.01, threshold: {kind: l0, gamma: 1.0e-3, beta: 10}}
  - {label: ASC, kind: asc, step_size: 0.01, threshold: {kind: l0, gamma: 1.0e-3, beta: 10}}
  - {label: ACS0, kind: acs, step_size: 0.01, threshold: {kind: soft, gamma: 0.0}}
)";

Scenario base() { return parse_scenario_yaml(kBase); }

}  // namespace

TEST_CASE("runs are reproducible and independent of the worker count") {
  Scenario s = base();
  const RunResult a = run_scenario(s, RunOptions{1, true});
  const RunResult b = run_scenario(s, RunOptions{3, true});
  REQUIRE(a.algorithms.size() == b.algorithms.size());
  for (std::size_t i = 0; i < a.algorithms.size(); ++i) {
    CHECK(a.algorithms[i].msd == b.algorithms[i].msd);
    CHECK(a.algorithms[i].comm == b.algorithms[i].comm);
    CHECK(a.algorithms[i].steady_per_node == b.algorithms[i].steady_per_node);
  }
  CHECK(a.noise_seeds == b.noise_seeds);
  s.seed = 100;
  const RunResult c = run_scenario(s);
  CHECK(c.algorithms[0].msd != a.algorithms[0].msd);
}

TEST_CASE("the seed trail records the noise stream of every run") {
  const RunResult r = run_scenario(base());
  REQUIRE(r.noise_seeds.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(r.noise_seeds[k] == derive_seed(99, k, StreamRole::noise));
  CHECK(r.master_seed == 99);
}

TEST_CASE("removing an algorithm leaves the others untouched") {
  Scenario s = base();
  const RunResult all = run_scenario(s);
  s.algorithms.erase(s.algorithms.begin() + 1);  // CTA-GMRF
  s.algorithms.pop_back();
  const RunResult fewer = run_scenario(s);
  for (const auto& a : fewer.algorithms) CHECK(a.msd == all.algorithm(a.label).msd);
}

TEST_CASE("a zero soft threshold reproduces ATC-GMRF exactly") {
  const RunResult r = run_scenario(base());
  CHECK(r.algorithm("ACS0").msd == r.algorithm("ATC-GMRF").msd);
  CHECK(r.algorithm("ACS0").comm == r.algorithm("ATC-GMRF").comm);
}

TEST_CASE("every algorithm learns and the GMRF-aware ones beat stand-alone LMS") {
  const RunResult r = run_scenario(base());
  for (const auto& a : r.algorithms) {
    CAPTURE(a.label);
    CHECK(a.completed_runs == 6);
    CHECK(a.msd.size() == 600);
    CHECK(a.msd.back() < 0.1 * a.msd.front());
  }
  CHECK(steady_msd_db(r, r.algorithm("ATC-GMRF")) < steady_msd_db(r, r.algorithm("Alone")));
}

TEST_CASE("communication counts") {
  const RunResult r = run_scenario(base());
  const auto& atc = r.algorithm("ATC-GMRF");
  const auto& asc = r.algorithm("ASC");
  const auto& central = r.algorithm("Central");
  for (double c : atc.comm) CHECK(c == atc.dense_comm);
  CHECK(asc.dense_comm == atc.dense_comm);
  for (double c : asc.comm) CHECK(c <= asc.dense_comm);
  // Two of three components are zero, so ASC ends up sending less.
  CHECK(asc.comm.back() < asc.dense_comm);
  CHECK(central.dense_comm == 5.0 * 4.0);
}

TEST_CASE("divergence is recorded per algorithm") {
  Scenario s = base();
  s.algorithms[4].step_sizes = {50.0};
  s.allow_unstable = true;
  const RunResult r = run_scenario(s);
  const auto& alone = r.algorithm("Alone");
  CHECK(alone.all_diverged());
  CHECK(alone.diverged_runs.size() == 6);
  CHECK(std::isnan(steady_msd_db(r, alone)));
  CHECK(r.algorithm("ATC-GMRF").completed_runs == 6);
  // Without the flag a run where an algorithm always diverges is an error.
  ResolvedScenario strict = resolve(s);
  strict.scenario.allow_unstable = false;
  CHECK_THROWS_AS(run_scenario(strict), Diverged);
}

TEST_CASE("steady-state averaging") {
  CHECK(steady_state_msd({1.0, 1.0, 0.01, 0.01}, 2) == doctest::Approx(-20.0));
  CHECK(steady_state_msd({5.0, 0.1, 0.2, 0.3}, 3) == doctest::Approx(to_db(0.2)));
  CHECK_THROWS(steady_state_msd({1.0}, 2));
}

TEST_CASE("tracking traces follow the configured node and components") {
  Scenario s = base();
  s.runs = 2;
  s.tracking = TrackingSpec{"ACS", 3, {0, 2}};
  const RunResult r = run_scenario(s);
  REQUIRE(r.tracking.has_value());
  CHECK(r.tracking->algorithm == "ACS");
  CHECK(r.tracking->node == 3);
  REQUIRE(r.tracking->estimate.size() == 2);
  CHECK(r.tracking->estimate[0].size() == 600);
  // A static parameter has a constant truth.
  CHECK(r.tracking->truth[1].front() == r.tracking->truth[1].back());
}

TEST_CASE("sweeps") {
  Scenario s = base();
  s.runs = 2;
  s.iters = 300;
  CHECK(sweep(s, SweepAxis::support_size, {}).empty());
  const auto rows = sweep(s, SweepAxis::support_size, {1, 3});
  CHECK(rows.size() == 2 * s.algorithms.size());
  CHECK(rows.front().axis_value == 1.0);
  CHECK(with_axis(s, SweepAxis::nu, 0.4).gmrf.nugget == 0.4);
  CHECK(with_axis(s, SweepAxis::kappa, 2.0).gmrf.kappa == 2.0);
  CHECK(with_axis(s, SweepAxis::gamma, 2e-4).algorithm("ASC").threshold.gamma == 2e-4);
  CHECK(with_axis(s, SweepAxis::step_size, 0.02).algorithm("Alone").step_sizes == std::vector<double>{0.02});
  CHECK(with_axis(s, SweepAxis::support_size, 2).parameter.support_size == 2);
  CHECK(parse_axis(to_string(SweepAxis::kappa)) == SweepAxis::kappa);
  CHECK_THROWS_AS(parse_axis("colour"), ConfigError);
}

TEST_CASE("gain sweeps emit simulated and theoretical rows") {
  Scenario s = base();
  s.runs = 2;
  s.iters = 300;
  s.parameter.kind = ParameterKind::static_dense;
  const auto rows = gain_sweep(s, "ATC-GMRF", "ATC", {0.5, 0.9}, {0.1});
  REQUIRE(rows.size() == 4);
  std::size_t theory = 0;
  for (const auto& row : rows) {
    if (row.algorithm.rfind("theory_gain", 0) == 0) {
      ++theory;
      CHECK(row.msd_db > 0.0);
    }
  }
  CHECK(theory == 2);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(1.0 / 0.0) == "inf");
  CHECK(format_number(-1.0 / 0.0) == "-inf");
}

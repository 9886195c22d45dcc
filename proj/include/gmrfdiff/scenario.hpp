#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmrfdiff/diffusion.hpp"
#include "gmrfdiff/gmrf.hpp"
#include "gmrfdiff/graph.hpp"
#include "gmrfdiff/sigmodel.hpp"
#include "gmrfdiff/sparsity.hpp"

namespace gmrfdiff {

enum class AlgorithmKind {
  standalone,
  centralized,
  atc_gmrf,
  cta_gmrf,
  atc_agnostic,
  cta_agnostic,
  acs,
  asc,
};

// Weights an agnostic algorithm uses in place of the true precision.
enum class AgnosticWeights { diagonal, identity };

enum class OutputKind { curves, per_node, tracking };

struct AlgorithmSpec {
  std::string label;
  AlgorithmKind kind = AlgorithmKind::atc_gmrf;
  std::vector<double> step_sizes;      // one entry (shared) or one per node
  std::optional<std::string> match_rate_to;  // label of the reference algorithm
  CombinationRule q_rule = CombinationRule::identity;
  CombinationRule w_rule = CombinationRule::uniform;
  AgnosticWeights agnostic_weights = AgnosticWeights::diagonal;
  ThresholdSpec threshold;  // acs / asc only
};

struct TopologySpec {
  // Generated: random geometric graph with a spanning-tree dependency graph.
  std::size_t nodes = 0;
  double radius = 0.0;  // link distance, in the same units as side
  double side = 1.0;    // nodes are placed uniformly on [0, side]^2
  std::optional<std::uint64_t> seed;  // defaults to a child of the master seed
  // Explicit: used when positions is non-empty.
  std::vector<Point> positions;
  std::vector<Edge> comm_edges;
  std::vector<Edge> dep_edges;

  bool generated() const { return positions.empty(); }
};

struct RegressorSpec {
  std::size_t m_dim = 1;
  std::vector<double> powers;               // explicit, one per node
  std::optional<std::pair<double, double>> power_range;  // uniform draw per node
};

struct ParameterSpec {
  ParameterKind kind = ParameterKind::static_dense;
  std::vector<double> theta0;  // explicit value; may be empty
  double value = 1.0;          // fill value for dense theta0 / sparse support
  std::size_t support_size = 0;
  double ar_coeff = 0.0;
  double drive_mean = 0.0;
  double drive_var = 0.0;
  std::vector<ZeroInterval> zero_intervals;
};

struct TrackingSpec {
  std::string algorithm;  // empty: first algorithm
  std::size_t node = 0;
  std::vector<std::size_t> components{0};
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  std::size_t iters = 1000;
  std::size_t steady_window = 200;
  std::size_t jobs = 1;
  bool allow_unstable = false;
  OutputKind output = OutputKind::curves;
  TopologySpec topology;
  GmrfParams gmrf;
  std::optional<Eigen::MatrixXd> covariance;  // overrides the tree construction
  RegressorSpec regressors;
  ParameterSpec parameter;
  std::vector<AlgorithmSpec> algorithms;
  TrackingSpec tracking;
  std::string note;

  // Throws ConfigError on violated structural invariants.
  void validate() const;
  const AlgorithmSpec& algorithm(const std::string& label) const;
};

// Parses a scenario document. Files ending in .json are read as JSON, anything
// else as YAML. Throws ConfigError with the offending key on bad input.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_yaml(const std::string& text);
Scenario parse_scenario_json(const std::string& text);

std::string to_string(AlgorithmKind kind);
std::string to_string(OutputKind kind);

// Everything a run needs, derived deterministically from a Scenario.
struct ResolvedAlgorithm {
  AlgorithmSpec spec;
  Eigen::MatrixXd precision;    // weights the algorithm uses
  CombinationMatrices weights;  // unused by the centralized kind
  Eigen::VectorXd step_sizes;   // per node; the centralized kind uses entry 0
  bool linear = true;           // false for the thresholded kinds
};

struct ResolvedScenario {
  Scenario scenario;
  NetworkTopology topology;
  GmrfModel model;
  RegressorStats stats;
  ParameterProcess process;
  std::vector<ResolvedAlgorithm> algorithms;
};

// Builds the topology, field, powers and weights, resolves rate-matched steps
// and enforces the mean-stability step bound (Unstable unless allow_unstable).
ResolvedScenario resolve(const Scenario& scenario);

// Upper step bound per node for one resolved algorithm.
Eigen::VectorXd algorithm_step_bounds(const ResolvedScenario& resolved, const ResolvedAlgorithm& algorithm);

}  // namespace gmrfdiff

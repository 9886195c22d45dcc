#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "gmrfdiff/graph.hpp"

namespace gmrfdiff {

struct GmrfParams {
  double sigma2 = 1.0;  // marginal noise variance c_ii
  double nugget = 0.9;  // correlation at zero distance, in (0,1)
  double kappa = 0.0;   // exponential decay rate per unit distance, >= 0
};

using EdgeCovariances = std::map<Edge, double>;

// c_ij = sigma2 * nugget * exp(-kappa * d_ij) for every dependency edge.
// Throws InvalidParameter for nugget outside (0,1), kappa < 0 or sigma2 <= 0.
EdgeCovariances build_covariance_edges(const NetworkTopology& topology, const GmrfParams& params);

// Closed-form precision of a tree-structured Gaussian field with unit-free
// marginal variance sigma2 on every node and the given edge covariances.
// The diagonal sums the contribution of every Markov neighbour. Throws
// SingularPair when c_ii c_jj - c_ij^2 <= 0 on some edge.
Eigen::MatrixXd precision_from_tree_covariance(const NetworkTopology& topology,
                                               const EdgeCovariances& edge_covariances,
                                               double sigma2);

// Dense inverse of a symmetric positive definite precision matrix. When
// expected_diagonal is given, also checks every c_ii against it within 1e-8.
Eigen::MatrixXd full_covariance(const Eigen::MatrixXd& precision,
                                std::optional<double> expected_diagonal = std::nullopt);

class RandomStream;

// Zero-mean Gaussian noise field over the network nodes, immutable once built.
class GmrfModel {
 public:
  // Tree construction from the exponential covariance model.
  static GmrfModel build(const NetworkTopology& topology, const GmrfParams& params);
  // Explicit covariance (tests, hand-made fields). Only positive definiteness
  // is enforced; use validate_markov_structure to inspect sparsity.
  static GmrfModel from_covariance(const Eigen::MatrixXd& covariance);

  std::size_t n_nodes() const { return static_cast<std::size_t>(covariance_.rows()); }
  const GmrfParams& params() const { return params_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& chol_factor() const { return chol_factor_; }

  // Precision an observer that ignores the correlation would use: diag(1/c_ii).
  Eigen::MatrixXd agnostic_precision() const;

  // v = L z with z standard normal drawn from `stream`.
  Eigen::VectorXd sample(RandomStream& stream) const;

 private:
  GmrfParams params_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd chol_factor_;
};

inline Eigen::VectorXd sample_noise(const GmrfModel& model, RandomStream& stream) {
  return model.sample(stream);
}

struct MarkovReport {
  double max_non_edge_precision = 0.0;  // max |b_ij| over pairs that are not dependency edges
  double max_identity_residual = 0.0;   // max |(BC - I)_ij|
  bool positive_definite = false;

  bool passes(double structural_tol = 1e-10, double inverse_tol = 1e-8) const {
    return positive_definite && max_non_edge_precision <= structural_tol &&
           max_identity_residual <= inverse_tol;
  }
};

MarkovReport validate_markov_structure(const Eigen::MatrixXd& precision,
                                       const Eigen::MatrixXd& covariance,
                                       const NetworkTopology& topology);

inline MarkovReport validate_markov_structure(const GmrfModel& model, const NetworkTopology& topology) {
  return validate_markov_structure(model.precision(), model.covariance(), topology);
}

}  // namespace gmrfdiff

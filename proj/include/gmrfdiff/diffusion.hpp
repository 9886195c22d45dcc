#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmrfdiff/graph.hpp"

namespace gmrfdiff {

// Data observed by the whole network at one time instant.
struct Snapshot {
  Eigen::MatrixXd regressors;    // N x M, row i = u_i^T[k]
  Eigen::VectorXd observations;  // N, x_i[k]
};

// Local potentials V_i of the GMRF-weighted least-squares cost. Node i's
// potential couples its own residual with those of its forward Markov
// neighbours A_i, weighted by the precision entries.
class PotentialField {
 public:
  struct Term {
    NodeIndex node;
    double weight;  // b_ij
  };

  PotentialField(const NetworkTopology& topology, const Eigen::MatrixXd& precision);

  std::size_t n_nodes() const { return diag_.size(); }
  double self_weight(NodeIndex i) const { return diag_[i]; }
  const std::vector<Term>& forward_terms(NodeIndex i) const { return forward_[i]; }

  // Stochastic gradient of V_i at theta, written into `out` (length M).
  void gradient(NodeIndex i, const Snapshot& data, const Eigen::Ref<const Eigen::VectorXd>& theta,
                Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd gradient(NodeIndex i, const Snapshot& data, const Eigen::VectorXd& theta) const;

 private:
  std::vector<double> diag_;
  std::vector<std::vector<Term>> forward_;
};

Eigen::VectorXd potential_gradient(NodeIndex i, const Snapshot& data, const Eigen::VectorXd& theta,
                                   const NetworkTopology& topology, const Eigen::MatrixXd& precision);

// Left-stochastic weights (columns sum to one): entry (j,i) is the weight node
// i gives to node j, non-zero only for j in N_i. Right-stochastic adaptation
// weights are the transpose of the same rule (see adaptation_weights).
enum class CombinationRule { identity, uniform, metropolis };

Eigen::MatrixXd build_combination(const NetworkTopology& topology, CombinationRule rule);
// Q with Q 1 = 1: q_ji = rule weight of node j's own neighbourhood.
Eigen::MatrixXd adaptation_weights(const NetworkTopology& topology, CombinationRule rule);

// Weights of the general three-step filter: combine with P1, adapt with
// S-weighted gradients, combine with P2.
struct CombinationMatrices {
  Eigen::MatrixXd p1;
  Eigen::MatrixXd s;
  Eigen::MatrixXd p2;

  static CombinationMatrices atc(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w);
  static CombinationMatrices cta(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w);
  static CombinationMatrices standalone(std::size_t n_nodes);

  // Throws InvalidParameter on negative entries, support outside N_i, or a
  // stochasticity violation beyond 1e-12.
  void validate(const NetworkTopology& topology) const;
};

// Per-node estimates and the intermediate vector of the last step.
struct AlgorithmState {
  Eigen::MatrixXd thetas;   // N x M, row i = theta_i[k]
  Eigen::MatrixXd scratch;  // N x M, psi / chi / zeta of the last step
  Eigen::VectorXd step_sizes;

  AlgorithmState() = default;
  AlgorithmState(std::size_t n_nodes, std::size_t m_dim, Eigen::VectorXd steps);

  std::size_t n_nodes() const { return static_cast<std::size_t>(thetas.rows()); }
  std::size_t m_dim() const { return static_cast<std::size_t>(thetas.cols()); }
};

// Absolute bound above which an estimate counts as diverged.
inline constexpr double kDivergenceBound = 1e12;

// Throws Diverged if any entry is non-finite or exceeds kDivergenceBound.
void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& estimates);

// All nodes read the k-1 iterates (synchronous update).
void general_diffusion_step(AlgorithmState& state, const CombinationMatrices& weights,
                            const Snapshot& data, const PotentialField& field);

// psi_i = theta_i - mu_i sum_j q_ji grad V_j(theta_i), then theta_i = sum_j w_ji psi_j.
void atc_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
              const Snapshot& data, const PotentialField& field);

// chi_i = sum_j w_ji theta_j, then theta_i = chi_i - mu_i sum_j q_ji grad V_j(chi_i).
void cta_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
              const Snapshot& data, const PotentialField& field);

// Fusion-centre LMS: theta + mu U^T B (x - U theta).
Eigen::VectorXd centralized_lms_step(const Eigen::VectorXd& theta, const Snapshot& data,
                                     const Eigen::MatrixXd& precision, double mu);

// Adaptation half of ATC, shared with the sparse strategies: writes
// psi_i = theta_i - mu_i sum_j q_ji grad V_j(theta_i) into `psi`.
void adapt(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& step_sizes, const Eigen::MatrixXd& q,
           const Snapshot& data, const PotentialField& field, Eigen::MatrixXd& psi);

// out_i = sum_j w_ji in_j.
void combine(const Eigen::MatrixXd& w, const Eigen::MatrixXd& in, Eigen::MatrixXd& out);

}  // namespace gmrfdiff

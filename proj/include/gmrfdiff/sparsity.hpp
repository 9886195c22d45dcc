#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmrfdiff/diffusion.hpp"

namespace gmrfdiff {

enum class ThresholdKind { soft, reweighted_l1, garotte, l0 };

struct ThresholdSpec {
  ThresholdKind kind = ThresholdKind::soft;
  double gamma = 0.0;
  double beta = 1.0;       // l0 shape parameter
  double epsilon = 0.01;   // reweighted-l1 offset

  // Throws InvalidSpec: gamma < 0, beta <= 0, epsilon outside (0, 0.1], or
  // l0 with beta >= sqrt(1/gamma).
  void validate() const;
};

// Scalar thresholding rule T_gamma.
//   soft:          x - gamma sign(x) outside [-gamma, gamma], else 0
//   reweighted_l1: x - gamma sign(x) when |x| > gamma f(eps + |x|), f(y) = 1/y for y <= 1 else 1
//   garotte:       x - gamma^2 / x when |x| > gamma, else 0
//   l0:            x when |x| >= 1/beta; (x - beta gamma sign(x)) / (1 - gamma beta^2)
//                  when gamma beta < |x| < 1/beta; 0 when |x| <= gamma beta
double apply_threshold(const ThresholdSpec& spec, double x);
Eigen::VectorXd apply_threshold(const ThresholdSpec& spec, const Eigen::VectorXd& x);

// Adapt, combine into zeta, then theta_i = T(zeta_i). `state.scratch` holds zeta.
void acs_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
              const ThresholdSpec& spec, const Snapshot& data, const PotentialField& field);

// Adapt, sparsify psi into zeta, then combine. `state.scratch` holds zeta,
// which is what each node transmits to its neighbours.
void asc_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
              const ThresholdSpec& spec, const Snapshot& data, const PotentialField& field);

// Indices m with |x_m| > tol.
std::vector<std::size_t> support(const Eigen::VectorXd& x, double tol = 0.0);

// Bound c1 on ||T(x) - x|| over R^M: gamma sqrt(M), or gamma beta sqrt(M) for l0.
double threshold_bound(const ThresholdSpec& spec, std::size_t m_dim);

}  // namespace gmrfdiff

#include "gmrfdiff/sparsity.hpp"

#include <cmath>

#include "gmrfdiff/errors.hpp"

namespace gmrfdiff {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

void ThresholdSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidSpec("threshold gamma must be non-negative");
  switch (kind) {
    case ThresholdKind::soft:
    case ThresholdKind::garotte:
      break;
    case ThresholdKind::reweighted_l1:
      if (!(epsilon > 0.0 && epsilon <= 0.1)) throw InvalidSpec("reweighted-l1 epsilon must lie in (0, 0.1]");
      break;
    case ThresholdKind::l0:
      if (!(beta > 0.0)) throw InvalidSpec("l0 beta must be positive");
      if (!(gamma * beta * beta < 1.0)) throw InvalidSpec("l0 threshold requires beta < sqrt(1/gamma)");
      break;
  }
}

double apply_threshold(const ThresholdSpec& spec, double x) {
  const double ax = std::abs(x);
  const double g = spec.gamma;
  switch (spec.kind) {
    case ThresholdKind::soft:
      return ax > g ? x - g * sign(x) : 0.0;
    case ThresholdKind::reweighted_l1: {
      const double y = spec.epsilon + ax;
      const double f = y <= 1.0 ? 1.0 / y : 1.0;
      return ax > g * f ? x - g * sign(x) : 0.0;
    }
    case ThresholdKind::garotte:
      return ax > g ? x - g * g / x : 0.0;
    case ThresholdKind::l0: {
      const double b = spec.beta;
      if (ax >= 1.0 / b) return x;
      if (ax > g * b) return (x - b * g * sign(x)) / (1.0 - g * b * b);
      return 0.0;
    }
  }
  return x;
}

Eigen::VectorXd apply_threshold(const ThresholdSpec& spec, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index m = 0; m < x.size(); ++m) out(m) = apply_threshold(spec, x(m));
  return out;
}

namespace {

void threshold_rows(const ThresholdSpec& spec, const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
  out.resize(in.rows(), in.cols());
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    for (Eigen::Index r = 0; r < in.rows(); ++r) out(r, c) = apply_threshold(spec, in(r, c));
  }
}

}  // namespace

void acs_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
              const ThresholdSpec& spec, const Snapshot& data, const PotentialField& field) {
  Eigen::MatrixXd psi;
  adapt(state.thetas, state.step_sizes, q, data, field, psi);
  combine(w, psi, state.scratch);
  threshold_rows(spec, state.scratch, state.thetas);
  check_finite(state.thetas);
}

void asc_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
              const ThresholdSpec& spec, const Snapshot& data, const PotentialField& field) {
  Eigen::MatrixXd psi;
  adapt(state.thetas, state.step_sizes, q, data, field, psi);
  threshold_rows(spec, psi, state.scratch);
  combine(w, state.scratch, state.thetas);
  check_finite(state.thetas);
}

std::vector<std::size_t> support(const Eigen::VectorXd& x, double tol) {
  if (tol < 0.0) throw InvalidParameter("support tolerance must be non-negative");
  std::vector<std::size_t> idx;
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    if (std::abs(x(m)) > tol) idx.push_back(static_cast<std::size_t>(m));
  }
  return idx;
}

double threshold_bound(const ThresholdSpec& spec, std::size_t m_dim) {
  const double root_m = std::sqrt(static_cast<double>(m_dim));
  return spec.kind == ThresholdKind::l0 ? spec.gamma * spec.beta * root_m : spec.gamma * root_m;
}

}  // namespace gmrfdiff

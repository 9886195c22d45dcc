#include "gmrfdiff/sigmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/random.hpp"

namespace gmrfdiff {

void RegressorStats::validate() const {
  if (m_dim == 0) throw InvalidParameter("regressor dimension must be positive");
  if (per_node_power.empty()) throw InvalidParameter("regressor powers are empty");
  for (std::size_t i = 0; i < per_node_power.size(); ++i) {
    if (!(per_node_power[i] > 0.0) || !std::isfinite(per_node_power[i])) {
      throw InvalidParameter("regressor power at node " + std::to_string(i) + " must be positive");
    }
  }
}

Eigen::MatrixXd draw_regressors(const RegressorStats& stats, RandomStream& stream) {
  const auto n = static_cast<Eigen::Index>(stats.n_nodes());
  const auto m = static_cast<Eigen::Index>(stats.m_dim);
  Eigen::MatrixXd u(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sd = std::sqrt(stats.per_node_power[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < m; ++c) u(i, c) = sd * stream.gaussian();
  }
  return u;
}

Eigen::VectorXd observe(const Eigen::VectorXd& theta, const Eigen::MatrixXd& regressors,
                        const Eigen::VectorXd& noise) {
  if (regressors.cols() != theta.size() || regressors.rows() != noise.size()) {
    throw DimensionMismatch("observe: regressors are " + std::to_string(regressors.rows()) + "x" +
                            std::to_string(regressors.cols()) + ", theta has " +
                            std::to_string(theta.size()) + " entries, noise has " +
                            std::to_string(noise.size()));
  }
  return regressors * theta + noise;
}

void ParameterProcess::validate() const {
  if (theta0.size() == 0) throw InvalidParameter("parameter dimension must be positive");
  if (kind == ParameterKind::static_sparse && support_size > m_dim()) {
    throw InvalidSupport("support size " + std::to_string(support_size) + " exceeds dimension " +
                         std::to_string(m_dim()));
  }
  if (kind == ParameterKind::ar_tracking) {
    if (!(std::abs(ar_coeff) < 1.0)) throw InvalidParameter("AR coefficient must satisfy |a| < 1");
    if (!(drive_var >= 0.0)) throw InvalidParameter("drive variance must be non-negative");
  }
  for (const auto& z : zero_intervals) {
    if (z.component >= m_dim()) throw InvalidParameter("zeroing interval component out of range");
    if (z.end < z.start) throw InvalidParameter("zeroing interval ends before it starts");
  }
}

Eigen::VectorXd make_sparse_parameter(std::size_t m_dim, std::size_t support_size, double value,
                                      RandomStream& stream) {
  if (support_size > m_dim) {
    throw InvalidSupport("support size " + std::to_string(support_size) + " exceeds dimension " +
                         std::to_string(m_dim));
  }
  // Partial Fisher-Yates: the first support_size slots become a uniform subset.
  std::vector<std::size_t> idx(m_dim);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t s = 0; s < support_size; ++s) {
    const std::size_t pick = s + static_cast<std::size_t>(stream.next() % (m_dim - s));
    std::swap(idx[s], idx[pick]);
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_dim));
  for (std::size_t s = 0; s < support_size; ++s) theta(static_cast<Eigen::Index>(idx[s])) = value;
  return theta;
}

namespace {

void apply_zeroing(const ParameterProcess& process, std::size_t k, Eigen::VectorXd& theta) {
  for (const auto& z : process.zero_intervals) {
    if (k >= z.start && k < z.end) theta(static_cast<Eigen::Index>(z.component)) = 0.0;
  }
}

}  // namespace

Eigen::VectorXd initial_parameter(const ParameterProcess& process, RandomStream& stream) {
  process.validate();
  Eigen::VectorXd theta = process.kind == ParameterKind::static_sparse
                              ? make_sparse_parameter(process.m_dim(), process.support_size,
                                                      process.sparse_value, stream)
                              : process.theta0;
  if (process.kind == ParameterKind::ar_tracking) apply_zeroing(process, 0, theta);
  return theta;
}

Eigen::VectorXd step_parameter(const ParameterProcess& process, const Eigen::VectorXd& previous,
                               std::size_t k, RandomStream& stream) {
  if (process.kind != ParameterKind::ar_tracking) return previous;
  const double sd = std::sqrt(process.drive_var);
  Eigen::VectorXd next(previous.size());
  for (Eigen::Index m = 0; m < previous.size(); ++m) {
    next(m) = process.ar_coeff * previous(m) + process.drive_mean + sd * stream.gaussian();
  }
  apply_zeroing(process, k, next);
  return next;
}

}  // namespace gmrfdiff

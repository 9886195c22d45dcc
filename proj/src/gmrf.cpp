#include "gmrfdiff/gmrf.hpp"

#include <cmath>
#include <string>

#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/random.hpp"

namespace gmrfdiff {

namespace {

constexpr double kDiagonalTolerance = 1e-8;

void check_params(const GmrfParams& p) {
  if (!(p.sigma2 > 0.0)) throw InvalidParameter("sigma2 must be positive");
  if (!(p.nugget > 0.0 && p.nugget < 1.0)) {
    throw InvalidParameter("nugget must lie in the open interval (0,1), got " + std::to_string(p.nugget));
  }
  if (!(p.kappa >= 0.0)) throw InvalidParameter("kappa must be non-negative");
}

}  // namespace

EdgeCovariances build_covariance_edges(const NetworkTopology& topology, const GmrfParams& params) {
  check_params(params);
  if (!is_acyclic_dependency(topology)) {
    throw InvalidParameter("the closed-form precision needs an acyclic dependency graph");
  }
  EdgeCovariances out;
  for (const auto& e : topology.dep_edges()) {
    out[e] = params.sigma2 * params.nugget * std::exp(-params.kappa * topology.distance(e.first, e.second));
  }
  return out;
}

Eigen::MatrixXd precision_from_tree_covariance(const NetworkTopology& topology,
                                               const EdgeCovariances& edge_covariances,
                                               double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidParameter("sigma2 must be positive");
  if (!is_acyclic_dependency(topology)) {
    throw InvalidParameter("the closed-form precision needs an acyclic dependency graph");
  }
  const auto n = static_cast<Eigen::Index>(topology.n_nodes());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) b(i, i) = 1.0 / sigma2;

  for (const auto& e : topology.dep_edges()) {
    auto it = edge_covariances.find(e);
    if (it == edge_covariances.end()) {
      throw InvalidParameter("missing covariance for dependency edge {" + std::to_string(e.first) +
                             "," + std::to_string(e.second) + "}");
    }
    const double c = it->second;
    const double det = sigma2 * sigma2 - c * c;
    if (!(det > 0.0)) {
      throw SingularPair("edge {" + std::to_string(e.first) + "," + std::to_string(e.second) +
                         "} has c_ii c_jj - c_ij^2 <= 0");
    }
    const auto i = static_cast<Eigen::Index>(e.first);
    const auto j = static_cast<Eigen::Index>(e.second);
    b(i, j) = b(j, i) = -c / det;
    const double diag_term = (c * c / sigma2) / det;
    b(i, i) += diag_term;
    b(j, j) += diag_term;
  }
  return b;
}

Eigen::MatrixXd full_covariance(const Eigen::MatrixXd& precision, std::optional<double> expected_diagonal) {
  if (precision.rows() != precision.cols()) throw DimensionMismatch("precision matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("precision matrix is not positive definite");
  Eigen::MatrixXd c = llt.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
  c = 0.5 * (c + c.transpose());
  if (expected_diagonal) {
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (std::abs(c(i, i) - *expected_diagonal) > kDiagonalTolerance) {
        throw InconsistentModel("implied variance at node " + std::to_string(i) + " is " +
                                std::to_string(c(i, i)) + ", expected " + std::to_string(*expected_diagonal));
      }
      c(i, i) = *expected_diagonal;
    }
  }
  return c;
}

GmrfModel GmrfModel::build(const NetworkTopology& topology, const GmrfParams& params) {
  GmrfModel m;
  m.params_ = params;
  const auto edges = build_covariance_edges(topology, params);
  m.precision_ = precision_from_tree_covariance(topology, edges, params.sigma2);
  m.covariance_ = full_covariance(m.precision_, params.sigma2);
  Eigen::LLT<Eigen::MatrixXd> llt(m.covariance_);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance is not positive definite");
  m.chol_factor_ = llt.matrixL();
  return m;
}

GmrfModel GmrfModel::from_covariance(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols()) throw DimensionMismatch("covariance must be square");
  GmrfModel m;
  m.covariance_ = 0.5 * (covariance + covariance.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(m.covariance_);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance is not positive definite");
  m.chol_factor_ = llt.matrixL();
  m.precision_ = llt.solve(Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols()));
  m.precision_ = 0.5 * (m.precision_ + m.precision_.transpose());
  m.params_.sigma2 = covariance.rows() > 0 ? covariance(0, 0) : 1.0;
  m.params_.nugget = 0.0;
  m.params_.kappa = 0.0;
  return m;
}

Eigen::MatrixXd GmrfModel::agnostic_precision() const {
  return covariance_.diagonal().cwiseInverse().asDiagonal();
}

Eigen::VectorXd GmrfModel::sample(RandomStream& stream) const {
  Eigen::VectorXd z(covariance_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = stream.gaussian();
  return chol_factor_.triangularView<Eigen::Lower>() * z;
}

MarkovReport validate_markov_structure(const Eigen::MatrixXd& precision, const Eigen::MatrixXd& covariance,
                                       const NetworkTopology& topology) {
  MarkovReport r;
  const auto n = precision.rows();
  if (n != covariance.rows() || static_cast<std::size_t>(n) != topology.n_nodes()) {
    throw DimensionMismatch("precision, covariance and topology disagree on the node count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || topology.depends(static_cast<NodeIndex>(i), static_cast<NodeIndex>(j))) continue;
      r.max_non_edge_precision = std::max(r.max_non_edge_precision, std::abs(precision(i, j)));
    }
  }
  r.max_identity_residual =
      (precision * covariance - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  r.positive_definite = Eigen::LLT<Eigen::MatrixXd>(covariance).info() == Eigen::Success &&
                        Eigen::LLT<Eigen::MatrixXd>(precision).info() == Eigen::Success;
  return r;
}

}  // namespace gmrfdiff

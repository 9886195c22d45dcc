#include "gmrfdiff/diffusion.hpp"

#include <cmath>
#include <string>

#include "gmrfdiff/errors.hpp"

namespace gmrfdiff {

PotentialField::PotentialField(const NetworkTopology& topology, const Eigen::MatrixXd& precision) {
  const std::size_t n = topology.n_nodes();
  if (static_cast<std::size_t>(precision.rows()) != n || precision.rows() != precision.cols()) {
    throw DimensionMismatch("precision matrix does not match the topology size");
  }
  diag_.resize(n);
  forward_.resize(n);
  for (NodeIndex i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    diag_[i] = precision(ii, ii);
    for (NodeIndex j : topology.forward_markov_neighborhood(i)) {
      const double b = precision(ii, static_cast<Eigen::Index>(j));
      if (b != 0.0) forward_[i].push_back({j, b});
    }
  }
}

void PotentialField::gradient(NodeIndex i, const Snapshot& data, const Eigen::Ref<const Eigen::VectorXd>& theta,
                              Eigen::Ref<Eigen::VectorXd> out) const {
  const auto& u = data.regressors;
  const auto& x = data.observations;
  const auto ii = static_cast<Eigen::Index>(i);
  const double e_i = x(ii) - u.row(ii).dot(theta);

  // -u_i (b_ii e_i + sum_j b_ij e_j) - e_i sum_j b_ij u_j, with e_l = x_l - u_l^T theta.
  double own = diag_[i] * e_i;
  out.setZero();
  for (const auto& t : forward_[i]) {
    const auto jj = static_cast<Eigen::Index>(t.node);
    const double e_j = x(jj) - u.row(jj).dot(theta);
    own += t.weight * e_j;
    out.noalias() -= (t.weight * e_i) * u.row(jj).transpose();
  }
  out.noalias() -= own * u.row(ii).transpose();
}

Eigen::VectorXd PotentialField::gradient(NodeIndex i, const Snapshot& data, const Eigen::VectorXd& theta) const {
  if (data.regressors.cols() != theta.size() ||
      static_cast<std::size_t>(data.regressors.rows()) != n_nodes() ||
      data.observations.size() != data.regressors.rows()) {
    throw DimensionMismatch("gradient: data and estimate dimensions disagree");
  }
  if (i >= n_nodes()) throw InvalidParameter("gradient: node index out of range");
  Eigen::VectorXd out(theta.size());
  gradient(i, data, theta, out);
  return out;
}

Eigen::VectorXd potential_gradient(NodeIndex i, const Snapshot& data, const Eigen::VectorXd& theta,
                                   const NetworkTopology& topology, const Eigen::MatrixXd& precision) {
  return PotentialField(topology, precision).gradient(i, data, theta);
}

Eigen::MatrixXd build_combination(const NetworkTopology& topology, CombinationRule rule) {
  const std::size_t n = topology.n_nodes();
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(nn, nn);
  switch (rule) {
    case CombinationRule::identity:
      w.setIdentity();
      break;
    case CombinationRule::uniform:
      for (NodeIndex i = 0; i < n; ++i) {
        const auto& hood = topology.spatial_neighborhood(i);
        for (NodeIndex j : hood) {
          w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(hood.size());
        }
      }
      break;
    case CombinationRule::metropolis:
      for (NodeIndex i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double off = 0.0;
        const double deg_i = static_cast<double>(topology.spatial_neighborhood(i).size() - 1);
        for (NodeIndex j : topology.spatial_neighborhood(i)) {
          if (j == i) continue;
          const double deg_j = static_cast<double>(topology.spatial_neighborhood(j).size() - 1);
          const double v = 1.0 / (1.0 + std::max(deg_i, deg_j));
          w(static_cast<Eigen::Index>(j), ii) = v;
          off += v;
        }
        w(ii, ii) = 1.0 - off;
      }
      break;
  }
  return w;
}

Eigen::MatrixXd adaptation_weights(const NetworkTopology& topology, CombinationRule rule) {
  return build_combination(topology, rule).transpose();
}

CombinationMatrices CombinationMatrices::atc(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w) {
  return {Eigen::MatrixXd::Identity(w.rows(), w.cols()), q, w};
}

CombinationMatrices CombinationMatrices::cta(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w) {
  return {w, q, Eigen::MatrixXd::Identity(w.rows(), w.cols())};
}

CombinationMatrices CombinationMatrices::standalone(std::size_t n_nodes) {
  const auto n = static_cast<Eigen::Index>(n_nodes);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  return {eye, eye, eye};
}

void CombinationMatrices::validate(const NetworkTopology& topology) const {
  constexpr double kTol = 1e-12;
  const auto n = static_cast<Eigen::Index>(topology.n_nodes());
  auto check = [&](const Eigen::MatrixXd& m, const char* name, bool columns) {
    if (m.rows() != n || m.cols() != n) throw DimensionMismatch(std::string(name) + " has the wrong size");
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (m(j, i) < 0.0) throw InvalidParameter(std::string(name) + " has a negative entry");
        if (m(j, i) != 0.0 && i != j &&
            !topology.communicates(static_cast<NodeIndex>(j), static_cast<NodeIndex>(i))) {
          throw InvalidParameter(std::string(name) + " weights a node outside the neighbourhood");
        }
      }
    }
    const Eigen::VectorXd sums = columns ? Eigen::VectorXd(m.colwise().sum().transpose())
                                         : Eigen::VectorXd(m.rowwise().sum());
    if ((sums.array() - 1.0).abs().maxCoeff() > kTol) {
      throw InvalidParameter(std::string(name) + (columns ? " columns" : " rows") + " do not sum to one");
    }
  };
  check(p1, "P1", true);
  check(s, "S", false);
  check(p2, "P2", true);
}

AlgorithmState::AlgorithmState(std::size_t n_nodes, std::size_t m_dim, Eigen::VectorXd steps)
    : thetas(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_nodes), static_cast<Eigen::Index>(m_dim))),
      scratch(thetas),
      step_sizes(std::move(steps)) {
  if (static_cast<std::size_t>(step_sizes.size()) != n_nodes) {
    throw DimensionMismatch("one step size per node is required");
  }
}

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& estimates) {
  for (Eigen::Index i = 0; i < estimates.size(); ++i) {
    const double v = estimates(i % estimates.rows(), i / estimates.rows());
    if (!std::isfinite(v) || std::abs(v) > kDivergenceBound) {
      throw Diverged("estimate left the finite range (|theta| > 1e12 or non-finite)");
    }
  }
}

void adapt(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& step_sizes, const Eigen::MatrixXd& q,
           const Snapshot& data, const PotentialField& field, Eigen::MatrixXd& psi) {
  const Eigen::Index n = estimates.rows();
  const Eigen::Index m = estimates.cols();
  if (data.regressors.rows() != n || data.regressors.cols() != m || data.observations.size() != n ||
      q.rows() != n || q.cols() != n || step_sizes.size() != n) {
    throw DimensionMismatch("adaptation: data, weights and estimates disagree in size");
  }
  psi.resize(n, m);
  Eigen::VectorXd theta(m);
  Eigen::VectorXd grad(m);
  Eigen::VectorXd acc(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    theta = estimates.row(i).transpose();
    acc.setZero();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double qji = q(j, i);
      if (qji == 0.0) continue;
      field.gradient(static_cast<NodeIndex>(j), data, theta, grad);
      acc.noalias() += qji * grad;
    }
    psi.row(i) = (theta - step_sizes(i) * acc).transpose();
  }
}

void combine(const Eigen::MatrixXd& w, const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
  if (w.rows() != in.rows() || w.cols() != in.rows()) throw DimensionMismatch("combination size mismatch");
  out.noalias() = w.transpose() * in;
}

void general_diffusion_step(AlgorithmState& state, const CombinationMatrices& weights, const Snapshot& data,
                            const PotentialField& field) {
  Eigen::MatrixXd chi;
  combine(weights.p1, state.thetas, chi);
  adapt(chi, state.step_sizes, weights.s, data, field, state.scratch);
  combine(weights.p2, state.scratch, state.thetas);
  check_finite(state.thetas);
}

void atc_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w, const Snapshot& data,
              const PotentialField& field) {
  adapt(state.thetas, state.step_sizes, q, data, field, state.scratch);
  combine(w, state.scratch, state.thetas);
  check_finite(state.thetas);
}

void cta_step(AlgorithmState& state, const Eigen::MatrixXd& q, const Eigen::MatrixXd& w, const Snapshot& data,
              const PotentialField& field) {
  combine(w, state.thetas, state.scratch);
  adapt(state.scratch, state.step_sizes, q, data, field, state.thetas);
  check_finite(state.thetas);
}

Eigen::VectorXd centralized_lms_step(const Eigen::VectorXd& theta, const Snapshot& data,
                                     const Eigen::MatrixXd& precision, double mu) {
  const auto& u = data.regressors;
  if (u.cols() != theta.size() || u.rows() != data.observations.size() || precision.rows() != u.rows() ||
      precision.cols() != u.rows()) {
    throw DimensionMismatch("centralized LMS: data, precision and estimate disagree in size");
  }
  const Eigen::VectorXd residual = data.observations - u * theta;
  Eigen::VectorXd next = theta + mu * (u.transpose() * (precision * residual));
  check_finite(next);
  return next;
}

}  // namespace gmrfdiff

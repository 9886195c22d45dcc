#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace gmrfdiff {

class RandomStream;

// Regressor statistics: node i draws u_i[k] ~ N(0, power_i * I_M), independent
// across nodes and time.
struct RegressorStats {
  std::size_t m_dim = 1;
  std::vector<double> per_node_power;

  std::size_t n_nodes() const { return per_node_power.size(); }
  // Throws InvalidParameter for a zero dimension or a non-positive power.
  void validate() const;
};

// N x M matrix whose row i is u_i^T[k].
Eigen::MatrixXd draw_regressors(const RegressorStats& stats, RandomStream& stream);

// x_i = u_i^T theta + v_i.
Eigen::VectorXd observe(const Eigen::VectorXd& theta, const Eigen::MatrixXd& regressors,
                        const Eigen::VectorXd& noise);

enum class ParameterKind { static_dense, static_sparse, ar_tracking };

// Component `component` of the true parameter is held at zero for
// start <= k < end.
struct ZeroInterval {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t component = 0;
};

struct ParameterProcess {
  ParameterKind kind = ParameterKind::static_dense;
  Eigen::VectorXd theta0;        // initial / static value; sparse kind draws its own
  std::size_t support_size = 0;  // static_sparse
  double sparse_value = 1.0;     // static_sparse
  double ar_coeff = 0.0;         // ar_tracking: theta[k] = a theta[k-1] + s[k]
  double drive_mean = 0.0;
  double drive_var = 0.0;
  std::vector<ZeroInterval> zero_intervals;

  std::size_t m_dim() const { return static_cast<std::size_t>(theta0.size()); }
  void validate() const;
};

// Vector of length m_dim with `support_size` entries equal to `value` at
// uniformly random distinct positions. Throws InvalidSupport when the support
// does not fit.
Eigen::VectorXd make_sparse_parameter(std::size_t m_dim, std::size_t support_size, double value,
                                      RandomStream& stream);

// Value of the true parameter at the start of a run. For the sparse kind the
// support is drawn from `stream`.
Eigen::VectorXd initial_parameter(const ParameterProcess& process, RandomStream& stream);

// theta0[k] given theta0[k-1]. Static kinds return `previous` unchanged; the
// tracking kind applies the AR(1) law and then the zeroing intervals active at k.
Eigen::VectorXd step_parameter(const ParameterProcess& process, const Eigen::VectorXd& previous,
                               std::size_t k, RandomStream& stream);

}  // namespace gmrfdiff

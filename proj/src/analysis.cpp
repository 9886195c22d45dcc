#include "gmrfdiff/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/KroneckerProduct>

#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/gmrf.hpp"
#include "gmrfdiff/random.hpp"

namespace gmrfdiff {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void require_square(const MatrixXd& a, Index n, const char* what) {
  if (a.rows() != n || a.cols() != n) {
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

void check_inputs(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& s,
                  const RegressorStats& stats) {
  const Index n = idx(topology.n_nodes());
  stats.validate();
  if (idx(stats.n_nodes()) != n) throw DimensionMismatch("regressor stats do not match the node count");
  require_square(precision, n, "precision");
  require_square(s, n, "S");
}

// Noise combinations behind g-hat: g-hat_i = sum_n u_n (alpha_{i,n}^T v).
// Returns, for node i, the N x N matrix whose row n is alpha_{i,n}.
std::vector<MatrixXd> noise_loadings(const NetworkTopology& topology, const MatrixXd& precision) {
  const std::size_t n = topology.n_nodes();
  std::vector<MatrixXd> alpha(n, MatrixXd::Zero(idx(n), idx(n)));
  for (std::size_t i = 0; i < n; ++i) {
    MatrixXd& a = alpha[i];
    a(idx(i), idx(i)) = precision(idx(i), idx(i));
    for (NodeIndex j : topology.forward_markov_neighborhood(i)) {
      const double b = precision(idx(i), idx(j));
      a(idx(i), idx(j)) += b;  // u_i b_ij v_j
      a(idx(j), idx(i)) += b;  // u_j b_ij v_i
    }
  }
  return alpha;
}

}  // namespace

MatrixXd extend(const MatrixXd& weights, std::size_t m_dim) {
  return Eigen::kroneckerProduct(weights, MatrixXd::Identity(idx(m_dim), idx(m_dim))).eval();
}

MatrixXd step_matrix(const VectorXd& step_sizes, std::size_t m_dim) {
  VectorXd diag(step_sizes.size() * idx(m_dim));
  for (Index i = 0; i < step_sizes.size(); ++i) diag.segment(i * idx(m_dim), idx(m_dim)).setConstant(step_sizes(i));
  return diag.asDiagonal();
}

MatrixXd expected_update_matrix(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& s,
                                const RegressorStats& stats) {
  check_inputs(topology, precision, s, stats);
  const Index n = idx(topology.n_nodes());
  const Index m = idx(stats.m_dim);
  MatrixXd d = MatrixXd::Zero(n * m, n * m);
  for (Index i = 0; i < n; ++i) {
    double scale = 0.0;
    for (Index j = 0; j < n; ++j) scale += s(j, i) * precision(j, j) * stats.per_node_power[static_cast<std::size_t>(j)];
    d.block(i * m, i * m, m, m).diagonal().setConstant(scale);
  }
  return d;
}

MatrixXd instantaneous_update_matrix(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& s,
                                     const MatrixXd& regressors) {
  const std::size_t n = topology.n_nodes();
  if (regressors.rows() != idx(n)) throw DimensionMismatch("regressors must have one row per node");
  require_square(precision, idx(n), "precision");
  require_square(s, idx(n), "S");
  const Index m = regressors.cols();
  std::vector<MatrixXd> local(n);
  for (std::size_t j = 0; j < n; ++j) {
    const VectorXd uj = regressors.row(idx(j)).transpose();
    MatrixXd dj = precision(idx(j), idx(j)) * uj * uj.transpose();
    for (NodeIndex l : topology.forward_markov_neighborhood(j)) {
      const VectorXd ul = regressors.row(idx(l)).transpose();
      const MatrixXd cross = ul * uj.transpose();
      dj += precision(idx(j), idx(l)) * (cross + cross.transpose());
    }
    local[j] = std::move(dj);
  }
  MatrixXd d = MatrixXd::Zero(idx(n) * m, idx(n) * m);
  for (std::size_t i = 0; i < n; ++i) {
    auto block = d.block(idx(i) * m, idx(i) * m, m, m);
    for (std::size_t j = 0; j < n; ++j) {
      if (s(idx(j), idx(i)) != 0.0) block += s(idx(j), idx(i)) * local[j];
    }
  }
  return d;
}

VectorXd instantaneous_noise_vector(const NetworkTopology& topology, const MatrixXd& precision,
                                    const MatrixXd& regressors, const VectorXd& noise) {
  const std::size_t n = topology.n_nodes();
  if (regressors.rows() != idx(n) || noise.size() != idx(n)) {
    throw DimensionMismatch("regressors and noise must have one entry per node");
  }
  const Index m = regressors.cols();
  VectorXd g = VectorXd::Zero(idx(n) * m);
  for (std::size_t i = 0; i < n; ++i) {
    auto gi = g.segment(idx(i) * m, m);
    const auto ui = regressors.row(idx(i)).transpose();
    gi = precision(idx(i), idx(i)) * noise(idx(i)) * ui;
    for (NodeIndex j : topology.forward_markov_neighborhood(i)) {
      const double b = precision(idx(i), idx(j));
      gi += b * (noise(idx(j)) * ui + noise(idx(i)) * regressors.row(idx(j)).transpose());
    }
  }
  return g;
}

MatrixXd noise_moment_blocks(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& covariance,
                             const RegressorStats& stats) {
  const std::size_t n = topology.n_nodes();
  check_inputs(topology, precision, MatrixXd::Identity(idx(n), idx(n)), stats);
  require_square(covariance, idx(n), "covariance");
  const Index m = idx(stats.m_dim);
  const auto alpha = noise_loadings(topology, precision);
  MatrixXd g = MatrixXd::Zero(idx(n) * m, idx(n) * m);
  for (std::size_t i = 0; i < n; ++i) {
    const MatrixXd ac = alpha[i] * covariance;
    for (std::size_t l = i; l < n; ++l) {
      // sum_n R_n alpha_{i,n}^T C alpha_{l,n}
      double value = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        value += stats.per_node_power[k] * ac.row(idx(k)).dot(alpha[l].row(idx(k)));
      }
      g.block(idx(i) * m, idx(l) * m, m, m).diagonal().setConstant(value);
      g.block(idx(l) * m, idx(i) * m, m, m).diagonal().setConstant(value);
    }
  }
  return g;
}

MatrixXd noise_moment_matrix(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& covariance,
                             const MatrixXd& s, const RegressorStats& stats, bool require_inverse) {
  check_inputs(topology, precision, s, stats);
  if (require_inverse) {
    const double residual =
        (precision * covariance - MatrixXd::Identity(precision.rows(), precision.cols())).cwiseAbs().maxCoeff();
    if (residual > 1e-6) throw InconsistentModel("B C deviates from I by " + std::to_string(residual));
  }
  const MatrixXd s_ext = extend(s, stats.m_dim);
  MatrixXd g = s_ext.transpose() * noise_moment_blocks(topology, precision, covariance, stats) * s_ext;
  return 0.5 * (g + g.transpose());
}

MatrixXd transition_matrix(const MatrixXd& p1, const MatrixXd& p2, const MatrixXd& d, const VectorXd& step_sizes) {
  const Index n = step_sizes.size();
  require_square(p1, n, "P1");
  require_square(p2, n, "P2");
  if (n == 0 || d.rows() != d.cols() || d.rows() % n != 0) throw DimensionMismatch("D does not match the node count");
  const std::size_t m = static_cast<std::size_t>(d.rows() / n);
  const MatrixXd inner = MatrixXd::Identity(d.rows(), d.cols()) - step_matrix(step_sizes, m) * d;
  return extend(p2, m).transpose() * inner * extend(p1, m).transpose();
}

VectorXd ApproxVarianceOperator::apply_vec(const VectorXd& sigma) const {
  const Index n = h_.rows();
  if (sigma.size() != n * n) throw DimensionMismatch("weighting vector has the wrong length");
  const MatrixXd out = apply(sigma.reshaped(n, n));
  return out.reshaped();
}

MatrixXd ApproxVarianceOperator::dense() const {
  if (static_cast<std::size_t>(h_.rows()) > kDenseVarianceCap) {
    throw TooLarge("dense variance matrix needs MN <= " + std::to_string(kDenseVarianceCap));
  }
  const MatrixXd ht = h_.transpose();
  return Eigen::kroneckerProduct(ht, ht).eval();
}

ExactVariance variance_matrix_exact(const MatrixXd& p1, const MatrixXd& p2, const MatrixXd& d,
                                    const VectorXd& step_sizes, const std::function<MatrixXd()>& draw_update,
                                    std::size_t n_samples) {
  const Index nm = d.rows();
  if (static_cast<std::size_t>(nm) > kDenseVarianceCap) {
    throw TooLarge("exact variance matrix needs MN <= " + std::to_string(kDenseVarianceCap));
  }
  if (n_samples < 2) throw InvalidParameter("exact variance matrix needs at least two samples");
  const Index n = step_sizes.size();
  if (n == 0 || nm % n != 0) throw DimensionMismatch("D does not match the node count");
  const std::size_t m = static_cast<std::size_t>(nm / n);
  const MatrixXd mu = step_matrix(step_sizes, m);
  const Index big = nm * nm;

  MatrixXd sum = MatrixXd::Zero(big, big);
  MatrixXd sum_sq = MatrixXd::Zero(big, big);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const MatrixXd dm = draw_update() * mu;
    const MatrixXd term = Eigen::kroneckerProduct(dm, dm).eval();
    sum += term;
    sum_sq += term.cwiseAbs2();
  }
  const double count = static_cast<double>(n_samples);
  const MatrixXd fourth = sum / count;
  const MatrixXd variance = ((sum_sq / count - fourth.cwiseAbs2()) * (count / (count - 1.0))).cwiseMax(0.0);

  const MatrixXd eye = MatrixXd::Identity(nm, nm);
  const MatrixXd dm = d * mu;
  const MatrixXd middle = MatrixXd::Identity(big, big) - Eigen::kroneckerProduct(eye, dm).eval() -
                          Eigen::kroneckerProduct(dm, eye).eval() + fourth;
  const MatrixXd p1e = extend(p1, m);
  const MatrixXd p2e = extend(p2, m);
  ExactVariance out;
  out.f = Eigen::kroneckerProduct(p1e, p1e).eval() * middle * Eigen::kroneckerProduct(p2e, p2e).eval();
  out.standard_error = (variance / count).cwiseSqrt();
  out.n_samples = n_samples;
  return out;
}

ExactVariance variance_matrix_exact_mc(const NetworkTopology& topology, const MatrixXd& precision,
                                       const CombinationMatrices& weights, const RegressorStats& stats,
                                       const VectorXd& step_sizes, std::size_t n_samples, RandomStream& stream) {
  const MatrixXd d = expected_update_matrix(topology, precision, weights.s, stats);
  auto draw = [&]() {
    return instantaneous_update_matrix(topology, precision, weights.s, draw_regressors(stats, stream));
  };
  return variance_matrix_exact(weights.p1, weights.p2, d, step_sizes, draw, n_samples);
}

VectorXd step_size_bounds(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& s,
                          const RegressorStats& stats) {
  check_inputs(topology, precision, s, stats);
  const Index n = idx(topology.n_nodes());
  VectorXd bounds(n);
  for (Index i = 0; i < n; ++i) {
    double lambda = 0.0;
    for (Index j = 0; j < n; ++j) lambda += s(j, i) * precision(j, j) * stats.per_node_power[static_cast<std::size_t>(j)];
    bounds(i) = lambda > 0.0 ? 2.0 / lambda : std::numeric_limits<double>::infinity();
  }
  return bounds;
}

double spectral_radius(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NoConvergence("eigenvalue solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double block_max_norm(const MatrixXd& x, std::size_t m_dim) {
  const Index m = idx(m_dim);
  if (m == 0 || x.rows() % m != 0 || x.cols() % m != 0) throw DimensionMismatch("block size does not divide X");
  double best = 0.0;
  for (Index i = 0; i < x.rows() / m; ++i) {
    double row = 0.0;
    for (Index j = 0; j < x.cols() / m; ++j) {
      const MatrixXd block = x.block(i * m, j * m, m, m);
      if (!block.isZero(0.0)) row += Eigen::JacobiSVD<MatrixXd>(block).singularValues()(0);
    }
    best = std::max(best, row);
  }
  return best;
}

MeanStability mean_stability_check(const MatrixXd& h, const MatrixXd& d, const VectorXd& step_sizes,
                                   std::size_t m_dim) {
  const Index m = idx(m_dim);
  const Index n = step_sizes.size();
  if (d.rows() != n * m || h.rows() != n * m) throw DimensionMismatch("H, D and step sizes disagree");
  MeanStability out;
  for (Index i = 0; i < n; ++i) {
    const MatrixXd block = MatrixXd::Identity(m, m) - step_sizes(i) * d.block(i * m, i * m, m, m);
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(0.5 * (block + block.transpose()), Eigen::EigenvaluesOnly);
    out.block_max_norm_i_minus_md = std::max(out.block_max_norm_i_minus_md, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  out.spectral_radius_h = spectral_radius(h);
  out.mean_stable = out.block_max_norm_i_minus_md < 1.0;
  return out;
}

SteinSolution solve_stein(const MatrixXd& a, const MatrixXd& q, const SteinOptions& options) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
    throw DimensionMismatch("Stein equation operands must be square and equal-sized");
  }
  const double rho = spectral_radius(a);
  if (rho >= 1.0) throw Unstable("spectral radius " + std::to_string(rho) + " >= 1");

  SteinSolution out;
  const double q_norm = q.norm();
  if (q_norm == 0.0) {
    out.x = MatrixXd::Zero(q.rows(), q.cols());
    return out;
  }
  MatrixXd x = q;
  if (options.method == SteinMethod::fixed_point) {
    // X <- Q + A X A^T; the increment is A^k Q A^kT.
    MatrixXd term = q;
    while (true) {
      if (out.iterations >= options.max_iterations) throw NoConvergence("Stein iteration cap reached");
      term = a * term * a.transpose();
      x += term;
      ++out.iterations;
      if (term.norm() <= options.rel_tol * x.norm()) break;
    }
  } else {
    // Smith doubling: X_{k+1} = X_k + A_k X_k A_k^T, A_{k+1} = A_k^2.
    MatrixXd ak = a;
    while (true) {
      if (out.iterations >= options.max_iterations) throw NoConvergence("Stein doubling cap reached");
      const MatrixXd term = ak * x * ak.transpose();
      x += term;
      ak = ak * ak;
      ++out.iterations;
      if (term.norm() <= options.rel_tol * x.norm()) break;
    }
    // Two plain sweeps tidy up rounding left by the doubling products.
    for (int sweep = 0; sweep < 2; ++sweep) x = q + a * x * a.transpose();
  }
  x = 0.5 * (x + x.transpose());
  out.residual = (x - q - a * x * a.transpose()).norm() / q_norm;
  out.x = std::move(x);
  return out;
}

namespace {

struct MsdSetup {
  MatrixXd weight;  // P2-hat^T M G M P2-hat
  std::size_t n = 0;
  std::size_t m = 0;
};

MsdSetup msd_setup(const MatrixXd& h, const MatrixXd& g, const MatrixXd& p2, const VectorXd& step_sizes) {
  MsdSetup s;
  s.n = static_cast<std::size_t>(step_sizes.size());
  if (s.n == 0 || h.rows() % idx(s.n) != 0) throw DimensionMismatch("H does not match the node count");
  s.m = static_cast<std::size_t>(h.rows()) / s.n;
  if (g.rows() != h.rows() || g.cols() != h.cols()) throw DimensionMismatch("G and H sizes differ");
  const MatrixXd mu = step_matrix(step_sizes, s.m);
  const MatrixXd p2e = extend(p2, s.m);
  s.weight = p2e.transpose() * mu * g * mu * p2e;
  s.weight = 0.5 * (s.weight + s.weight.transpose());
  return s;
}

}  // namespace

double theoretical_msd(const MatrixXd& h, const MatrixXd& g, const MatrixXd& p2, const VectorXd& step_sizes,
                       MsdTarget target, const SteinOptions& options) {
  const MsdSetup s = msd_setup(h, g, p2, step_sizes);
  const Index nm = h.rows();
  MatrixXd t = MatrixXd::Zero(nm, nm);
  if (target.node) {
    if (*target.node >= s.n) throw InvalidParameter("target node out of range");
    t.block(idx(*target.node * s.m), idx(*target.node * s.m), idx(s.m), idx(s.m)).setIdentity();
  } else {
    t.setIdentity();
    t /= static_cast<double>(s.n);
  }
  const SteinSolution dual = solve_stein(h.transpose(), t, options);
  return std::max(0.0, (s.weight.cwiseProduct(dual.x)).sum());
}

VectorXd theoretical_msd_per_node(const MatrixXd& h, const MatrixXd& g, const MatrixXd& p2, const VectorXd& step_sizes,
                                  const SteinOptions& options) {
  const MsdSetup s = msd_setup(h, g, p2, step_sizes);
  const SteinSolution primal = solve_stein(h, s.weight, options);
  VectorXd msd(idx(s.n));
  for (std::size_t i = 0; i < s.n; ++i) {
    msd(idx(i)) = std::max(0.0, primal.x.block(idx(i * s.m), idx(i * s.m), idx(s.m), idx(s.m)).trace());
  }
  return msd;
}

double operator_spectral_radius(const std::function<MatrixXd(const MatrixXd&)>& op, std::size_t dim,
                                std::size_t max_iterations, double tol) {
  MatrixXd x = MatrixXd::Identity(idx(dim), idx(dim)) / std::sqrt(static_cast<double>(dim));
  double estimate = 0.0;
  for (std::size_t k = 0; k < max_iterations; ++k) {
    MatrixXd y = op(x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    y /= norm;
    if (std::abs(norm - estimate) <= tol * norm && k > 0) return norm;
    estimate = norm;
    x = std::move(y);
  }
  return estimate;
}

TheoryReport analyze_strategy(const NetworkTopology& topology, const MatrixXd& precision, const MatrixXd& covariance,
                              const CombinationMatrices& weights, const VectorXd& step_sizes,
                              const RegressorStats& stats, const TheoryOptions& options) {
  if (step_sizes.size() != idx(topology.n_nodes())) throw DimensionMismatch("one step size per node required");
  TheoryReport r;
  r.f_mode = options.f_mode;
  r.d_matrix = expected_update_matrix(topology, precision, weights.s, stats);
  r.g_matrix = noise_moment_matrix(topology, precision, covariance, weights.s, stats, false);
  r.h_matrix = transition_matrix(weights.p1, weights.p2, r.d_matrix, step_sizes);
  r.step_bounds = step_size_bounds(topology, precision, weights.s, stats);
  const MeanStability ms = mean_stability_check(r.h_matrix, r.d_matrix, step_sizes, stats.m_dim);
  r.spectral_radius_h = ms.spectral_radius_h;
  r.block_max_norm_i_minus_md = ms.block_max_norm_i_minus_md;
  r.block_max_norm_h = block_max_norm(r.h_matrix, stats.m_dim);
  r.mean_stable = ms.mean_stable;

  if (options.f_mode == VarianceMode::approx) {
    r.spectral_radius_f = r.spectral_radius_h * r.spectral_radius_h;
    r.ms_stable = r.spectral_radius_f < 1.0;
    if (r.ms_stable) {
      r.msd_per_node = theoretical_msd_per_node(r.h_matrix, r.g_matrix, weights.p2, step_sizes, options.stein);
      r.msd_network = r.msd_per_node.mean();
    }
    return r;
  }

  RandomStream stream(options.mc_seed, 0, StreamRole::theory);
  const ExactVariance exact =
      variance_matrix_exact_mc(topology, precision, weights, stats, step_sizes, options.mc_samples, stream);
  r.spectral_radius_f = spectral_radius(exact.f);
  r.ms_stable = r.spectral_radius_f < 1.0;
  if (r.ms_stable) {
    const Index nm = r.h_matrix.rows();
    const std::size_t m = stats.m_dim;
    const MsdSetup s = msd_setup(r.h_matrix, r.g_matrix, weights.p2, step_sizes);
    const VectorXd rvec = s.weight.reshaped();
    const Eigen::PartialPivLU<MatrixXd> lu(MatrixXd::Identity(nm * nm, nm * nm) - exact.f);
    r.msd_per_node.resize(idx(topology.n_nodes()));
    for (std::size_t i = 0; i < topology.n_nodes(); ++i) {
      MatrixXd t = MatrixXd::Zero(nm, nm);
      t.block(idx(i * m), idx(i * m), idx(m), idx(m)).setIdentity();
      const VectorXd sigma = lu.solve(VectorXd(t.reshaped()));
      r.msd_per_node(idx(i)) = std::max(0.0, rvec.dot(sigma));
    }
    r.msd_network = r.msd_per_node.mean();
  }
  return r;
}

double rate_matched_step(const std::function<double(double)>& rho_of_step, double target_rho, double tol,
                         double initial_guess) {
  if (!(target_rho > 0.0 && target_rho < 1.0)) throw InvalidParameter("target spectral radius must lie in (0,1)");
  if (!(initial_guess > 0.0)) throw InvalidParameter("initial step guess must be positive");
  constexpr int kMaxScans = 200;
  // Bracket lo (rho > target) < hi (rho <= target) on the decreasing branch.
  double lo = 0.0;
  double hi = initial_guess;
  double rho_hi = rho_of_step(hi);
  int scans = 0;
  if (rho_hi <= target_rho) {
    lo = hi;
    while (rho_of_step(lo) <= target_rho) {
      hi = lo;
      lo *= 0.5;
      if (++scans > kMaxScans) throw NoConvergence("rate matching could not bracket the target");
    }
  } else {
    const bool increase = rho_of_step(2.0 * hi) < rho_hi;
    double probe = hi;
    while (true) {
      if (++scans > kMaxScans) throw NoConvergence("rate matching could not reach the target spectral radius");
      const double next = increase ? 2.0 * probe : 0.5 * probe;
      const double rho = rho_of_step(next);
      if (rho <= target_rho) {
        lo = increase ? probe : 0.5 * next;
        hi = next;
        if (!increase) {
          while (rho_of_step(lo) <= target_rho) {
            hi = lo;
            lo *= 0.5;
            if (++scans > kMaxScans) throw NoConvergence("rate matching could not bracket the target");
          }
        }
        break;
      }
      if (increase && rho > rho_hi) throw NoConvergence("target spectral radius below the attainable minimum");
      rho_hi = rho;
      probe = next;
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rho = rho_of_step(mid);
    if (std::abs(rho - target_rho) <= tol) return mid;
    if (rho > target_rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double diffusion_spectral_radius(const NetworkTopology& topology, const MatrixXd& precision,
                                 const CombinationMatrices& weights, const RegressorStats& stats, double mu) {
  // Every block of H is a multiple of I_M, so the N x N reduction has the same spectrum.
  RegressorStats scalar = stats;
  scalar.m_dim = 1;
  const MatrixXd d = expected_update_matrix(topology, precision, weights.s, scalar);
  const VectorXd steps = VectorXd::Constant(idx(topology.n_nodes()), mu);
  return spectral_radius(transition_matrix(weights.p1, weights.p2, d, steps));
}

double centralized_spectral_radius(const MatrixXd& precision, const RegressorStats& stats, double mu) {
  stats.validate();
  if (precision.rows() != idx(stats.n_nodes())) throw DimensionMismatch("precision does not match the node count");
  double lambda = 0.0;
  for (std::size_t i = 0; i < stats.n_nodes(); ++i) lambda += precision(idx(i), idx(i)) * stats.per_node_power[i];
  return std::abs(1.0 - mu * lambda);
}

std::vector<GainPoint> msd_gain_surface(const NetworkTopology& topology, double sigma2, const RegressorStats& stats,
                                        const MatrixXd& q, const MatrixXd& w, double gmrf_step,
                                        const std::vector<double>& nu_grid, const std::vector<double>& kappa_grid) {
  const auto weights = CombinationMatrices::atc(q, w);
  weights.validate(topology);
  const VectorXd ones = VectorXd::Ones(idx(topology.n_nodes()));
  std::vector<GainPoint> table;
  for (double kappa : kappa_grid) {
    for (double nu : nu_grid) {
      const GmrfModel model = GmrfModel::build(topology, GmrfParams{sigma2, nu, kappa});
      const MatrixXd agnostic = model.agnostic_precision();
      const TheoryReport aware = analyze_strategy(topology, model.precision(), model.covariance(), weights,
                                                  gmrf_step * ones, stats);
      if (!aware.ms_stable) throw Unstable("GMRF-aware strategy unstable at the given step");
      GainPoint p;
      p.nu = nu;
      p.kappa = kappa;
      p.agnostic_step = rate_matched_step(
          [&](double mu) { return diffusion_spectral_radius(topology, agnostic, weights, stats, mu); },
          aware.spectral_radius_h, 1e-4, gmrf_step);
      const TheoryReport blind =
          analyze_strategy(topology, agnostic, model.covariance(), weights, p.agnostic_step * ones, stats);
      if (!blind.ms_stable) throw Unstable("agnostic strategy unstable at the matched step");
      p.gmrf_msd_db = to_db(aware.msd_network);
      p.agnostic_msd_db = to_db(blind.msd_network);
      p.gain_db = p.agnostic_msd_db - p.gmrf_msd_db;
      table.push_back(p);
    }
  }
  return table;
}

}  // namespace gmrfdiff

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmrfdiff/diffusion.hpp"
#include "gmrfdiff/graph.hpp"
#include "gmrfdiff/sigmodel.hpp"

namespace gmrfdiff {

class RandomStream;

// Largest M*N handled by dense Kronecker materializations of F.
inline constexpr std::size_t kDenseVarianceCap = 60;

// P (x) I_M.
Eigen::MatrixXd extend(const Eigen::MatrixXd& weights, std::size_t m_dim);
// diag{mu_i I_M}.
Eigen::MatrixXd step_matrix(const Eigen::VectorXd& step_sizes, std::size_t m_dim);

// D = E{D[k]}: block i is sum_j s_ji b_jj R_uj (cross terms vanish in expectation).
Eigen::MatrixXd expected_update_matrix(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                       const Eigen::MatrixXd& s, const RegressorStats& stats);

// D[k] for one regressor draw (N x M, rows u_i^T).
Eigen::MatrixXd instantaneous_update_matrix(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                            const Eigen::MatrixXd& s, const Eigen::MatrixXd& regressors);

// g-hat[k] = col{b_ii u_i v_i + sum_{j in A_i} b_ij (u_i v_j + u_j v_i)}; the
// driving noise of the error recursion is g[k] = (S (x) I)^T g-hat[k].
Eigen::VectorXd instantaneous_noise_vector(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                           const Eigen::MatrixXd& regressors, const Eigen::VectorXd& noise);

// G-hat = E[g-hat g-hat^T] in closed form. `precision` holds the weights the
// algorithm uses and `covariance` the true noise covariance, so the two need not
// be inverses of each other (agnostic baselines).
Eigen::MatrixXd noise_moment_blocks(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                    const Eigen::MatrixXd& covariance, const RegressorStats& stats);

// G = S-hat^T G-hat S-hat. With require_inverse, throws InconsistentModel when
// B C deviates from I by more than 1e-6.
Eigen::MatrixXd noise_moment_matrix(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                    const Eigen::MatrixXd& covariance, const Eigen::MatrixXd& s,
                                    const RegressorStats& stats, bool require_inverse = true);

// H = P2-hat^T (I - M D) P1-hat^T.
Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const Eigen::MatrixXd& d,
                                  const Eigen::VectorXd& step_sizes);

// Mean-square transition of the weighting vector under the small-step
// approximation, sigma' = vec(H^T Sigma H). Applied implicitly; the dense
// (MN)^2 x (MN)^2 Kronecker form is only built on request.
class ApproxVarianceOperator {
 public:
  explicit ApproxVarianceOperator(Eigen::MatrixXd h) : h_(std::move(h)) {}

  std::size_t dim() const { return static_cast<std::size_t>(h_.rows() * h_.rows()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& sigma) const { return h_.transpose() * sigma * h_; }
  Eigen::VectorXd apply_vec(const Eigen::VectorXd& sigma) const;
  // Throws TooLarge when MN exceeds kDenseVarianceCap.
  Eigen::MatrixXd dense() const;
  const Eigen::MatrixXd& transition() const { return h_; }

 private:
  Eigen::MatrixXd h_;
};

inline ApproxVarianceOperator variance_matrix_approx(const Eigen::MatrixXd& h) { return ApproxVarianceOperator(h); }

struct ExactVariance {
  Eigen::MatrixXd f;
  Eigen::MatrixXd standard_error;  // per-entry Monte Carlo standard error
  std::size_t n_samples = 0;
};

// Full variance-propagation matrix with E[(D[k]M) (x) (D[k]M)] estimated from
// `n_samples` calls to `draw_update`. Throws TooLarge above kDenseVarianceCap.
ExactVariance variance_matrix_exact(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2,
                                    const Eigen::MatrixXd& d, const Eigen::VectorXd& step_sizes,
                                    const std::function<Eigen::MatrixXd()>& draw_update, std::size_t n_samples);

ExactVariance variance_matrix_exact_mc(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                       const CombinationMatrices& weights, const RegressorStats& stats,
                                       const Eigen::VectorXd& step_sizes, std::size_t n_samples,
                                       RandomStream& stream);

// Mean-stability step bound per node: 2 / lambda_max(sum_j s_ji b_jj R_uj).
Eigen::VectorXd step_size_bounds(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                 const Eigen::MatrixXd& s, const RegressorStats& stats);

double spectral_radius(const Eigen::MatrixXd& a);

// max_i sum_j ||X_ij||_2 over M x M blocks; equals the induced block-maximum
// norm when every block is a multiple of the identity.
double block_max_norm(const Eigen::MatrixXd& x, std::size_t m_dim);

struct MeanStability {
  double block_max_norm_i_minus_md = 0.0;  // max over blocks of rho(I - mu_i D_i)
  double spectral_radius_h = 0.0;
  bool mean_stable = false;  // block_max_norm_i_minus_md < 1
};

MeanStability mean_stability_check(const Eigen::MatrixXd& h, const Eigen::MatrixXd& d,
                                   const Eigen::VectorXd& step_sizes, std::size_t m_dim);

enum class SteinMethod { fixed_point, doubling };

struct SteinOptions {
  SteinMethod method = SteinMethod::doubling;
  double rel_tol = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

struct SteinSolution {
  Eigen::MatrixXd x;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||X - Q - A X A^T||_F / ||Q||_F
};

// Solves X = Q + A X A^T for rho(A) < 1. Throws Unstable when rho(A) >= 1 and
// NoConvergence when the iteration cap is hit.
SteinSolution solve_stein(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q, const SteinOptions& options = {});

// Which MSD to evaluate.
struct MsdTarget {
  std::optional<NodeIndex> node;  // empty: network average
  static MsdTarget network() { return {}; }
  static MsdTarget at(NodeIndex i) { return {i}; }
};

// Steady-state MSD r^T (I - F)^{-1} t with F = H^T (x) H^T, evaluated through
// the weighting recursion X = T + H^T X H. r = vec(P2-hat^T M G M P2-hat).
double theoretical_msd(const Eigen::MatrixXd& h, const Eigen::MatrixXd& g, const Eigen::MatrixXd& p2,
                       const Eigen::VectorXd& step_sizes, MsdTarget target, const SteinOptions& options = {});

// All per-node MSDs from one solve of the error-covariance recursion
// P = H P H^T + P2-hat^T M G M P2-hat.
Eigen::VectorXd theoretical_msd_per_node(const Eigen::MatrixXd& h, const Eigen::MatrixXd& g,
                                         const Eigen::MatrixXd& p2, const Eigen::VectorXd& step_sizes,
                                         const SteinOptions& options = {});

// Power iteration for the Perron root of a positive linear map on symmetric
// matrices (e.g. the implicit variance operator).
double operator_spectral_radius(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& op,
                                std::size_t dim, std::size_t max_iterations = 20000, double tol = 1e-12);

enum class VarianceMode { approx, exact_mc };

struct TheoryReport {
  Eigen::MatrixXd d_matrix;
  Eigen::MatrixXd g_matrix;
  Eigen::MatrixXd h_matrix;
  VarianceMode f_mode = VarianceMode::approx;
  Eigen::VectorXd step_bounds;
  double spectral_radius_h = 0.0;
  double block_max_norm_h = 0.0;
  double block_max_norm_i_minus_md = 0.0;
  double spectral_radius_f = 0.0;
  Eigen::VectorXd msd_per_node;  // linear scale; empty when unstable
  double msd_network = 0.0;
  bool mean_stable = false;
  bool ms_stable = false;
};

struct TheoryOptions {
  VarianceMode f_mode = VarianceMode::approx;
  std::size_t mc_samples = 2000;  // exact_mc only
  std::uint64_t mc_seed = 1;
  SteinOptions stein;
};

// Full theory for one linear strategy. `precision` is what the algorithm uses,
// `covariance` is the true noise covariance.
TheoryReport analyze_strategy(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                              const Eigen::MatrixXd& covariance, const CombinationMatrices& weights,
                              const Eigen::VectorXd& step_sizes, const RegressorStats& stats,
                              const TheoryOptions& options = {});

// Smallest positive scalar step whose spectral radius equals `target_rho`
// (within `tol`), found by bisection on the decreasing branch of rho(step).
// `initial_guess` seeds the bracketing scan.
double rate_matched_step(const std::function<double(double)>& rho_of_step, double target_rho,
                         double tol = 1e-4, double initial_guess = 1e-4);

// Spectral radius of the mean recursion of a linear diffusion strategy with a
// uniform step mu.
double diffusion_spectral_radius(const NetworkTopology& topology, const Eigen::MatrixXd& precision,
                                 const CombinationMatrices& weights, const RegressorStats& stats, double mu);

// Same for the fusion-centre LMS: rho(I - mu E[U^T B U]).
double centralized_spectral_radius(const Eigen::MatrixXd& precision, const RegressorStats& stats, double mu);

struct GainPoint {
  double nu = 0.0;
  double kappa = 0.0;
  double gmrf_msd_db = 0.0;
  double agnostic_msd_db = 0.0;
  double agnostic_step = 0.0;
  double gain_db = 0.0;  // agnostic minus GMRF-aware
};

// Theoretical network-MSD gain of ATC-GMRF over agnostic ATC on a (nu, kappa)
// grid, with the agnostic step rate-matched to the GMRF step.
std::vector<GainPoint> msd_gain_surface(const NetworkTopology& topology, double sigma2, const RegressorStats& stats,
                                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& w, double gmrf_step,
                                        const std::vector<double>& nu_grid, const std::vector<double>& kappa_grid);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace gmrfdiff

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "difflab/rng.hpp"

namespace difflab::models {

struct Sample {
  Eigen::VectorXd h;
  double y = 0.0;
};

/// How regressors are drawn in the quadratic model. Both have covariance
/// R_h; with Rademacher signs and M = 1 the outer product h hᵀ is exactly
/// R_h, so the gradient carries no noise when σ_v² = 0.
enum class FeatureDistribution { Gaussian, Rademacher };

/// Linear observation model y = hᵀw° + v with Gaussian v of variance σ_v².
/// Risk J(w) = E|y − hᵀw|², Hessian 2R_h.
class QuadraticModel {
 public:
  QuadraticModel(Eigen::VectorXd w_opt, double sigma_v_sq, Eigen::MatrixXd feature_cov,
                 FeatureDistribution features = FeatureDistribution::Gaussian);
  /// R_h = I.
  static QuadraticModel isotropic(Eigen::VectorXd w_opt, double sigma_v_sq,
                                  FeatureDistribution features = FeatureDistribution::Gaussian);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(w_opt_.size()); }
  const Eigen::VectorXd& w_opt() const noexcept { return w_opt_; }
  double sigma_v_sq() const noexcept { return sigma_v_sq_; }
  const Eigen::MatrixXd& feature_cov() const noexcept { return feature_cov_; }
  FeatureDistribution features() const noexcept { return features_; }
  /// Lower Cholesky factor of R_h, used to color the regressors.
  const Eigen::MatrixXd& feature_factor() const noexcept { return factor_; }

 private:
  Eigen::VectorXd w_opt_;
  double sigma_v_sq_;
  Eigen::MatrixXd feature_cov_;
  Eigen::MatrixXd factor_;
  FeatureDistribution features_;
};

/// Labeled samples stored row-wise: features is n×M, labels ∈ {+1, −1}.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

/// Thrown when full-gradient descent for w° stalls.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double grad_norm)
      : std::runtime_error(what), grad_norm_(grad_norm) {}
  double grad_norm() const noexcept { return grad_norm_; }

 private:
  double grad_norm_;
};

struct WOptResult {
  Eigen::VectorXd w_opt;
  double risk = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

/// Minimizes the regularized logistic empirical risk by gradient descent with
/// Armijo backtracking until ‖∇J_emp‖₂ < tol.
WOptResult compute_w_opt_logistic(const Dataset& data, double rho, double tol = 1e-8,
                                  std::size_t max_iters = 100'000);

/// Regularized logistic regression over a fixed dataset. Streaming samples
/// are drawn from the dataset uniformly with replacement; w° minimizes the
/// empirical risk.
class LogisticModel {
 public:
  LogisticModel(Dataset data, double rho, double tol = 1e-8, std::size_t max_iters = 100'000);

  std::size_t dim() const noexcept { return data_.dim(); }
  double regularizer() const noexcept { return rho_; }
  const Dataset& dataset() const noexcept { return data_; }
  const Eigen::VectorXd& w_opt() const noexcept { return w_opt_; }
  double w_opt_risk() const noexcept { return w_opt_risk_; }

 private:
  Dataset data_;
  double rho_;
  Eigen::VectorXd w_opt_;
  double w_opt_risk_;
};

using RiskModel = std::variant<QuadraticModel, LogisticModel>;

struct NoiseStats {
  Eigen::MatrixXd r_v;
  double trace = 0.0;
  /// (Φᵀ R_v Φ)_mm in the Hessian eigenbasis.
  Eigen::VectorXd projected_diag;
};

struct HessianSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns are Φ
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// Quadratic model.
Sample quad_sample(const QuadraticModel& m, Stream& rng);
/// −2h(y − hᵀw).
Eigen::VectorXd quad_gradient(const QuadraticModel& m, const Eigen::VectorXd& w, const Sample& s);
/// σ_v² + (w − w°)ᵀR_h(w − w°).
double quad_risk(const QuadraticModel& m, const Eigen::VectorXd& w);
/// Closed form R_v = 4σ_v² R_h.
NoiseStats quad_noise_stats(const QuadraticModel& m);
HessianSpectrum quad_spectrum(const QuadraticModel& m);

// Logistic model.
/// (ρ/2)‖w‖² + log(1 + exp(−y hᵀw)).
double logistic_loss(double rho, const Eigen::VectorXd& w, const Eigen::VectorXd& h, double y);
Eigen::VectorXd logistic_gradient(const LogisticModel& m, const Eigen::VectorXd& w, const Sample& s);
Eigen::VectorXd logistic_gradient(double rho, const Eigen::VectorXd& w, const Eigen::VectorXd& h, double y);
/// Mean loss over the dataset, accumulated in index order.
double logistic_empirical_risk(const LogisticModel& m, const Eigen::VectorXd& w);
double logistic_empirical_risk(const Dataset& data, double rho, const Eigen::VectorXd& w);
Eigen::VectorXd logistic_empirical_gradient(const Dataset& data, double rho, const Eigen::VectorXd& w);
Eigen::MatrixXd logistic_empirical_hessian(const Dataset& data, double rho, const Eigen::VectorXd& w);
Sample logistic_sample(const LogisticModel& m, Stream& rng);
HessianSpectrum logistic_spectrum(const LogisticModel& m);

/// Synthetic classification data: h ~ N(0, I_M), planted w* ~ N(0, I/M),
/// y = sign(hᵀw* + label_noise·ε).
Dataset synthetic_logistic_dataset(std::size_t n_samples, std::size_t dim, double label_noise, Stream& rng);

// Dispatch over RiskModel.
std::size_t dim(const RiskModel& m);
const Eigen::VectorXd& w_opt(const RiskModel& m);
Sample sample(const RiskModel& m, Stream& rng);
Eigen::VectorXd gradient(const RiskModel& m, const Eigen::VectorXd& w, const Sample& s);
HessianSpectrum spectrum(const RiskModel& m);

/// Eigendecomposition of a symmetric Hessian.
HessianSpectrum spectrum_of(const Eigen::MatrixXd& hessian);
/// Builds NoiseStats from a covariance, projecting into `basis`.
NoiseStats noise_stats_from(const Eigen::MatrixXd& r_v, const HessianSpectrum& basis);

/// Sample covariance of stochastic gradients at `w`, projected into the
/// spectrum's eigenbasis. Requires n_samples ≥ 1000.
NoiseStats estimate_noise_stats(const RiskModel& m, const Eigen::VectorXd& w, const HessianSpectrum& basis,
                                std::size_t n_samples, Stream& rng);

}  // namespace difflab::models

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "difflab/models.hpp"
#include "difflab/special.hpp"

namespace difflab::theory {

/// Regime of a Hessian mode under μ(i) = μ/i, decided by 2λμ against 1.
enum class RateCase { Supercritical, Critical, Subcritical };

std::string_view to_string(RateCase c) noexcept;

/// Width of the band around 2λμ = 1 treated as Critical.
inline constexpr double kCriticalBand = 1e-12;

RateCase rate_case(double lambda, double mu);

/// Constant α_m(i) multiplying λ_m (ΦᵀR_vΦ)_mm in the asymptotic excess-risk:
///   2λμ > 1: 1/((2λμ−1) i)
///   2λμ = 1: ln(i)/i
///   2λμ < 1: S(λμ) i^{−2λμ}, with S the Gamma-ratio series constant.
/// `forced` overrides the classification, e.g. to exercise the critical
/// branch without relying on floating-point equality.
double alpha_m(std::size_t i, double lambda, double mu, std::optional<RateCase> forced = std::nullopt);

/// Inputs of the asymptotic excess-risk predictor.
struct RateParams {
  Eigen::VectorXd eigenvalues;
  double mu = 0.0;
  Eigen::VectorXd projected_noise;
  double perron_norm_sq = 1.0;
  std::size_t n_nodes = 1;

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

RateParams make_rate_params(const models::HessianSpectrum& spectrum, const models::NoiseStats& noise, double mu,
                            double perron_norm_sq, std::size_t n_nodes);

/// (μ²/2) Σ_m λ_m α_m(i) (ΦᵀR_vΦ)_mm · ‖p‖₂², identical at every node.
double asymptotic_er_predictor(const RateParams& params, std::size_t i);

/// μ Tr(R_v) ‖p‖₂² / (4i), the large-μ form of the predictor.
double mlsp_approx(double mu, double trace_rv, double perron_norm_sq, std::size_t i);

/// Initial error energy per Hessian mode, E[(w̃′₀)_m²] with
/// w̃′₀ = (p ⊗ Φ)ᵀ w̃₀.
struct TransientParams {
  Eigen::VectorXd initial_mode_energy;
  Eigen::VectorXd eigenvalues;
  double mu = 0.0;
};

struct TransientBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Smallest i accepted by transient_bounds for this (λ, μ).
std::size_t transient_min_iteration(double lambda, double mu);

/// Two-sided bracket on the transient excess-risk at iteration i (measured
/// on w_{i−1}). Each mode contributes ½λ_m·E_m times the integral-comparison
/// bounds on ∏_{j=1}^{i−1}(1−λ_mμ/j)².
///
/// When λ_mμ is a positive integer the product contains an exact zero; the
/// bound is then anchored one index later and brackets the product with the
/// zero factor removed. Throws std::invalid_argument when i is below the
/// validity threshold of any mode.
TransientBounds transient_bounds(const TransientParams& t, std::size_t i);

/// (1/(N i)) Tr(FIM⁻¹). Throws std::invalid_argument for a singular or
/// indefinite FIM.
double cramer_rao_msd(const Eigen::MatrixXd& fim_sample, std::size_t n_nodes, std::size_t i);

/// Per-sample Fisher information of the Gaussian linear model, R_h / σ_v².
Eigen::MatrixXd fim_quadratic(const models::QuadraticModel& m);

/// Level exceeded with probability at most ν (Markov): prediction / ν.
double high_prob_bound(double er_prediction, double nu);

struct ModeBracket {
  double diff_upper = 0.0;
  double cons_lower = 0.0;
};

/// Shared pivot i⁻² / ln(d⁻²) separating the diffusion and consensus mode
/// sums for a combination-matrix eigenvalue d ∈ (0, 1). Requires 2λμ > 1.
ModeBracket consensus_mode_bracket(double d_kk, double lambda, double mu, std::size_t i);

}  // namespace difflab::theory

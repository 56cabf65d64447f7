#include "difflab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace difflab::theory {

std::string_view to_string(RateCase c) noexcept {
  switch (c) {
    case RateCase::Supercritical: return "supercritical";
    case RateCase::Critical: return "critical";
    case RateCase::Subcritical: return "subcritical";
  }
  return "unknown";
}

RateCase rate_case(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw std::invalid_argument("rate_case: lambda and mu must be positive");
  const double x = 2.0 * lambda * mu;
  if (std::abs(x - 1.0) <= kCriticalBand) return RateCase::Critical;
  return x > 1.0 ? RateCase::Supercritical : RateCase::Subcritical;
}

double alpha_m(std::size_t i, double lambda, double mu, std::optional<RateCase> forced) {
  if (i < 2) throw std::invalid_argument("alpha_m: requires i >= 2");
  const double id = static_cast<double>(i);
  const double lm = lambda * mu;
  switch (forced.value_or(rate_case(lambda, mu))) {
    case RateCase::Supercritical: return 1.0 / ((2.0 * lm - 1.0) * id);
    case RateCase::Critical: return std::log(id) / id;
    case RateCase::Subcritical: return series_constant(lm) * std::pow(id, -2.0 * lm);
  }
  return 0.0;
}

void RateParams::validate() const {
  if (eigenvalues.size() == 0 || eigenvalues.size() != projected_noise.size()) {
    throw std::invalid_argument("rate params: eigenvalue and projected-noise lengths differ or are empty");
  }
  if ((eigenvalues.array() <= 0.0).any()) throw std::invalid_argument("rate params: eigenvalues must be positive");
  if ((projected_noise.array() < 0.0).any()) {
    throw std::invalid_argument("rate params: projected noise must be non-negative");
  }
  if (!(mu > 0.0)) throw std::invalid_argument("rate params: mu must be positive");
  if (n_nodes == 0) throw std::invalid_argument("rate params: n_nodes must be >= 1");
  const double floor = 1.0 / static_cast<double>(n_nodes);
  if (perron_norm_sq < floor - 1e-12 || perron_norm_sq > 1.0 + 1e-12) {
    throw std::invalid_argument("rate params: perron_norm_sq must lie in [1/N, 1]");
  }
}

RateParams make_rate_params(const models::HessianSpectrum& spectrum, const models::NoiseStats& noise, double mu,
                            double perron_norm_sq, std::size_t n_nodes) {
  RateParams p;
  p.eigenvalues = spectrum.eigenvalues;
  // Tiny negative projections come from roundoff in ΦᵀR_vΦ.
  p.projected_noise = noise.projected_diag.cwiseMax(0.0);
  p.mu = mu;
  p.perron_norm_sq = perron_norm_sq;
  p.n_nodes = n_nodes;
  p.validate();
  return p;
}

double asymptotic_er_predictor(const RateParams& params, std::size_t i) {
  params.validate();
  double acc = 0.0;
  for (Eigen::Index m = 0; m < params.eigenvalues.size(); ++m) {
    const double lambda = params.eigenvalues(m);
    if (params.projected_noise(m) == 0.0) continue;
    acc += lambda * alpha_m(i, lambda, params.mu) * params.projected_noise(m);
  }
  return 0.5 * params.mu * params.mu * acc * params.perron_norm_sq;
}

double mlsp_approx(double mu, double trace_rv, double perron_norm_sq, std::size_t i) {
  if (i == 0) throw std::invalid_argument("mlsp_approx: requires i >= 1");
  return mu * trace_rv * perron_norm_sq / (4.0 * static_cast<double>(i));
}

namespace {

struct Anchor {
  double c;          // anchor index; bounds compare Σ_{j>c+1} against integrals
  double prefactor;  // ∏_{j=1}^{c+1} (1 − a/j)², exact zeros skipped
};

Anchor transient_anchor(double a) {
  double c = std::ceil(a);
  if (c == a) c += 1.0;
  double log_sum = 0.0;
  for (double j = 1.0; j <= c + 1.0; j += 1.0) {
    const double f = 1.0 - a / j;
    if (f == 0.0) continue;
    log_sum += std::log(std::abs(f));
  }
  return {c, std::exp(2.0 * log_sum)};
}

// (1 − a/x)^{2x} / (x − a)^{2a}
double integral_edge(double a, double x) {
  return std::exp(2.0 * x * std::log1p(-a / x) - 2.0 * a * std::log(x - a));
}

}  // namespace

std::size_t transient_min_iteration(double lambda, double mu) {
  return static_cast<std::size_t>(transient_anchor(lambda * mu).c) + 3;
}

TransientBounds transient_bounds(const TransientParams& t, std::size_t i) {
  if (t.eigenvalues.size() != t.initial_mode_energy.size()) {
    throw std::invalid_argument("transient_bounds: eigenvalue and energy lengths differ");
  }
  if (!(t.mu > 0.0)) throw std::invalid_argument("transient_bounds: mu must be positive");
  if ((t.initial_mode_energy.array() < 0.0).any()) {
    throw std::invalid_argument("transient_bounds: mode energies must be non-negative");
  }
  TransientBounds out;
  const double id = static_cast<double>(i);
  for (Eigen::Index m = 0; m < t.eigenvalues.size(); ++m) {
    const double lambda = t.eigenvalues(m);
    if (!(lambda > 0.0)) throw std::invalid_argument("transient_bounds: eigenvalues must be positive");
    const std::size_t need = transient_min_iteration(lambda, t.mu);
    if (i < need) {
      throw std::invalid_argument("transient_bounds: i = " + std::to_string(i) + " below validity threshold " +
                                  std::to_string(need));
    }
    const double energy = t.initial_mode_energy(m);
    if (energy == 0.0) continue;
    const double a = lambda * t.mu;
    const Anchor anc = transient_anchor(a);
    const double c = anc.c;
    const double upper = integral_edge(a, id) / integral_edge(a, c + 2.0);
    const double lower = integral_edge(a, id - 1.0) / integral_edge(a, c + 1.0);
    const double scale = 0.5 * lambda * anc.prefactor * energy;
    out.upper += scale * upper;
    out.lower += scale * lower;
  }
  return out;
}

double cramer_rao_msd(const Eigen::MatrixXd& fim_sample, std::size_t n_nodes, std::size_t i) {
  if (n_nodes == 0 || i == 0) throw std::invalid_argument("cramer_rao_msd: n_nodes and i must be >= 1");
  if (fim_sample.rows() == 0 || fim_sample.rows() != fim_sample.cols()) {
    throw std::invalid_argument("cramer_rao_msd: FIM must be square and non-empty");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (fim_sample + fim_sample.transpose()));
  if (llt.info() != Eigen::Success) throw std::invalid_argument("cramer_rao_msd: FIM is not positive-definite");
  const auto m = fim_sample.rows();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
  return inv.trace() / (static_cast<double>(n_nodes) * static_cast<double>(i));
}

Eigen::MatrixXd fim_quadratic(const models::QuadraticModel& m) {
  if (!(m.sigma_v_sq() > 0.0)) throw std::invalid_argument("fim_quadratic: requires sigma_v_sq > 0");
  return m.feature_cov() / m.sigma_v_sq();
}

double high_prob_bound(double er_prediction, double nu) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("high_prob_bound: nu must lie in (0, 1)");
  return er_prediction / nu;
}

ModeBracket consensus_mode_bracket(double d_kk, double lambda, double mu, std::size_t i) {
  if (!(d_kk > 0.0 && d_kk < 1.0)) throw std::invalid_argument("consensus_mode_bracket: d_kk must lie in (0, 1)");
  if (rate_case(lambda, mu) != RateCase::Supercritical) {
    throw std::invalid_argument("consensus_mode_bracket: requires 2*lambda*mu > 1");
  }
  if (i == 0) throw std::invalid_argument("consensus_mode_bracket: requires i >= 1");
  const double id = static_cast<double>(i);
  const double pivot = 1.0 / (id * id * std::log(1.0 / (d_kk * d_kk)));
  return {pivot, pivot};
}

}  // namespace difflab::theory

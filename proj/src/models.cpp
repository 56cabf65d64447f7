#include "difflab/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace difflab::models {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// 1 / (1 + e^z) without overflow.
double logistic_weight(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_dataset(const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("dataset is empty");
  if (static_cast<std::size_t>(d.labels.size()) != d.size()) {
    throw std::invalid_argument("dataset label count does not match feature rows");
  }
  for (Eigen::Index j = 0; j < d.labels.size(); ++j) {
    if (d.labels(j) != 1.0 && d.labels(j) != -1.0) {
      throw std::invalid_argument("dataset label at row " + std::to_string(j) + " is not +1/-1");
    }
  }
}

}  // namespace

QuadraticModel::QuadraticModel(Eigen::VectorXd w_opt, double sigma_v_sq, Eigen::MatrixXd feature_cov,
                               FeatureDistribution features)
    : w_opt_(std::move(w_opt)), sigma_v_sq_(sigma_v_sq), feature_cov_(std::move(feature_cov)), features_(features) {
  if (w_opt_.size() == 0) throw std::invalid_argument("quadratic model needs dim >= 1");
  if (!(sigma_v_sq_ >= 0.0) || !std::isfinite(sigma_v_sq_)) {
    throw std::invalid_argument("sigma_v_sq must be finite and non-negative");
  }
  if (feature_cov_.rows() != w_opt_.size() || feature_cov_.cols() != w_opt_.size()) {
    throw std::invalid_argument("feature covariance must be M x M");
  }
  if (!feature_cov_.isApprox(feature_cov_.transpose(), 1e-12)) {
    throw std::invalid_argument("feature covariance must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(feature_cov_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("feature covariance must be positive-definite");
  factor_ = llt.matrixL();
}

QuadraticModel QuadraticModel::isotropic(Eigen::VectorXd w_opt, double sigma_v_sq, FeatureDistribution features) {
  const auto m = w_opt.size();
  return QuadraticModel(std::move(w_opt), sigma_v_sq, Eigen::MatrixXd::Identity(m, m), features);
}

Sample quad_sample(const QuadraticModel& m, Stream& rng) {
  const auto dim = static_cast<Eigen::Index>(m.dim());
  Eigen::VectorXd z(dim);
  if (m.features() == FeatureDistribution::Gaussian) {
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
  } else {
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.sign();
  }
  Sample s;
  s.h = m.feature_factor() * z;
  const double v = m.sigma_v_sq() > 0.0 ? std::sqrt(m.sigma_v_sq()) * rng.normal() : 0.0;
  s.y = s.h.dot(m.w_opt()) + v;
  return s;
}

Eigen::VectorXd quad_gradient(const QuadraticModel& m, const Eigen::VectorXd& w, const Sample& s) {
  if (static_cast<std::size_t>(w.size()) != m.dim() || s.h.size() != w.size()) {
    throw std::invalid_argument("quad_gradient: dimension mismatch");
  }
  return -2.0 * (s.y - s.h.dot(w)) * s.h;
}

double quad_risk(const QuadraticModel& m, const Eigen::VectorXd& w) {
  const Eigen::VectorXd e = w - m.w_opt();
  return m.sigma_v_sq() + e.dot(m.feature_cov() * e);
}

HessianSpectrum spectrum_of(const Eigen::MatrixXd& hessian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian);
  if (es.info() != Eigen::Success) throw std::runtime_error("Hessian eigendecomposition failed");
  HessianSpectrum out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.lambda_min = out.eigenvalues.minCoeff();
  out.lambda_max = out.eigenvalues.maxCoeff();
  return out;
}

NoiseStats noise_stats_from(const Eigen::MatrixXd& r_v, const HessianSpectrum& basis) {
  NoiseStats out;
  out.r_v = r_v;
  out.trace = r_v.trace();
  out.projected_diag = (basis.eigenvectors.transpose() * r_v * basis.eigenvectors).diagonal();
  return out;
}

HessianSpectrum quad_spectrum(const QuadraticModel& m) { return spectrum_of(2.0 * m.feature_cov()); }

NoiseStats quad_noise_stats(const QuadraticModel& m) {
  return noise_stats_from(4.0 * m.sigma_v_sq() * m.feature_cov(), quad_spectrum(m));
}

double logistic_loss(double rho, const Eigen::VectorXd& w, const Eigen::VectorXd& h, double y) {
  return 0.5 * rho * w.squaredNorm() + softplus(-y * h.dot(w));
}

Eigen::VectorXd logistic_gradient(double rho, const Eigen::VectorXd& w, const Eigen::VectorXd& h, double y) {
  if (h.size() != w.size()) throw std::invalid_argument("logistic_gradient: dimension mismatch");
  return rho * w - (y * logistic_weight(y * h.dot(w))) * h;
}

Eigen::VectorXd logistic_gradient(const LogisticModel& m, const Eigen::VectorXd& w, const Sample& s) {
  return logistic_gradient(m.regularizer(), w, s.h, s.y);
}

double logistic_empirical_risk(const Dataset& data, double rho, const Eigen::VectorXd& w) {
  if (data.size() == 0) throw std::invalid_argument("empirical risk of an empty dataset");
  const Eigen::VectorXd margins = data.features * w;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) acc += softplus(-data.labels(j) * margins(j));
  return 0.5 * rho * w.squaredNorm() + acc / static_cast<double>(data.size());
}

double logistic_empirical_risk(const LogisticModel& m, const Eigen::VectorXd& w) {
  return logistic_empirical_risk(m.dataset(), m.regularizer(), w);
}

Eigen::VectorXd logistic_empirical_gradient(const Dataset& data, double rho, const Eigen::VectorXd& w) {
  const Eigen::VectorXd margins = data.features * w;
  Eigen::VectorXd coeff(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    coeff(j) = data.labels(j) * logistic_weight(data.labels(j) * margins(j));
  }
  return rho * w - data.features.transpose() * coeff / static_cast<double>(data.size());
}

Eigen::MatrixXd logistic_empirical_hessian(const Dataset& data, double rho, const Eigen::VectorXd& w) {
  const Eigen::VectorXd margins = data.features * w;
  Eigen::VectorXd curv(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    curv(j) = logistic_weight(margins(j)) * logistic_weight(-margins(j));
  }
  const auto m = static_cast<Eigen::Index>(data.dim());
  Eigen::MatrixXd h = data.features.transpose() * curv.asDiagonal() * data.features;
  h /= static_cast<double>(data.size());
  h += rho * Eigen::MatrixXd::Identity(m, m);
  return 0.5 * (h + h.transpose());
}

WOptResult compute_w_opt_logistic(const Dataset& data, double rho, double tol, std::size_t max_iters) {
  check_dataset(data);
  if (!(tol > 0.0)) throw std::invalid_argument("compute_w_opt_logistic: tol must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("compute_w_opt_logistic: regularizer must be positive");

  constexpr double kArmijo = 0.5;
  const auto dim = static_cast<Eigen::Index>(data.dim());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double risk = logistic_empirical_risk(data, rho, w);
  Eigen::VectorXd g = logistic_empirical_gradient(data, rho, w);
  double step = 1.0;

  for (std::size_t it = 0; it < max_iters; ++it) {
    const double gnorm_sq = g.squaredNorm();
    if (std::sqrt(gnorm_sq) < tol) return {w, risk, std::sqrt(gnorm_sq), it};

    // Near the optimum the sufficient-decrease margin drops below the
    // resolution of the risk; the slack admits such steps but they never
    // enlarge the step size.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(risk));
    double t = step;
    Eigen::VectorXd trial;
    double trial_risk = 0.0;
    while (true) {
      trial = w - t * g;
      trial_risk = logistic_empirical_risk(data, rho, trial);
      if (trial_risk <= risk - kArmijo * t * gnorm_sq + slack) break;
      t *= 0.5;
      if (t < 1e-30) {
        throw ConvergenceError("compute_w_opt_logistic: line search failed", std::sqrt(gnorm_sq));
      }
    }
    const bool resolved = kArmijo * t * gnorm_sq > slack;
    step = resolved ? 2.0 * t : t;
    w = std::move(trial);
    risk = trial_risk;
    g = logistic_empirical_gradient(data, rho, w);
  }
  const double gnorm = g.norm();
  if (gnorm < tol) return {w, risk, gnorm, max_iters};
  throw ConvergenceError("compute_w_opt_logistic: no convergence after " + std::to_string(max_iters) +
                             " iterations (gradient norm " + std::to_string(gnorm) + ")",
                         gnorm);
}

LogisticModel::LogisticModel(Dataset data, double rho, double tol, std::size_t max_iters)
    : data_(std::move(data)), rho_(rho) {
  auto r = compute_w_opt_logistic(data_, rho_, tol, max_iters);
  w_opt_ = std::move(r.w_opt);
  w_opt_risk_ = r.risk;
}

Sample logistic_sample(const LogisticModel& m, Stream& rng) {
  const auto j = static_cast<Eigen::Index>(rng.index(m.dataset().size()));
  return {m.dataset().features.row(j).transpose(), m.dataset().labels(j)};
}

HessianSpectrum logistic_spectrum(const LogisticModel& m) {
  return spectrum_of(logistic_empirical_hessian(m.dataset(), m.regularizer(), m.w_opt()));
}

Dataset synthetic_logistic_dataset(std::size_t n_samples, std::size_t dim, double label_noise, Stream& rng) {
  if (n_samples == 0 || dim == 0) throw std::invalid_argument("synthetic dataset needs n >= 1 and dim >= 1");
  const auto n = static_cast<Eigen::Index>(n_samples);
  const auto m = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd planted(m);
  for (Eigen::Index i = 0; i < m; ++i) planted(i) = rng.normal() / std::sqrt(static_cast<double>(dim));
  Dataset d;
  d.features.resize(n, m);
  d.labels.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) d.features(j, i) = rng.normal();
    const double score = d.features.row(j).dot(planted) + label_noise * rng.normal();
    d.labels(j) = score >= 0.0 ? 1.0 : -1.0;
  }
  return d;
}

std::size_t dim(const RiskModel& m) {
  return std::visit([](const auto& x) { return x.dim(); }, m);
}

const Eigen::VectorXd& w_opt(const RiskModel& m) {
  return std::visit([](const auto& x) -> const Eigen::VectorXd& { return x.w_opt(); }, m);
}

Sample sample(const RiskModel& m, Stream& rng) {
  return std::visit(overloaded{[&](const QuadraticModel& q) { return quad_sample(q, rng); },
                               [&](const LogisticModel& l) { return logistic_sample(l, rng); }},
                    m);
}

Eigen::VectorXd gradient(const RiskModel& m, const Eigen::VectorXd& w, const Sample& s) {
  return std::visit(overloaded{[&](const QuadraticModel& q) { return quad_gradient(q, w, s); },
                               [&](const LogisticModel& l) { return logistic_gradient(l, w, s); }},
                    m);
}

HessianSpectrum spectrum(const RiskModel& m) {
  return std::visit(overloaded{[](const QuadraticModel& q) { return quad_spectrum(q); },
                               [](const LogisticModel& l) { return logistic_spectrum(l); }},
                    m);
}

NoiseStats estimate_noise_stats(const RiskModel& m, const Eigen::VectorXd& w, const HessianSpectrum& basis,
                                std::size_t n_samples, Stream& rng) {
  if (n_samples < 1000) throw std::invalid_argument("estimate_noise_stats needs at least 1000 samples");
  const auto d = static_cast<Eigen::Index>(dim(m));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const Eigen::VectorXd g = gradient(m, w, sample(m, rng));
    mean += g;
    second.noalias() += g * g.transpose();
  }
  const double count = static_cast<double>(n_samples);
  mean /= count;
  Eigen::MatrixXd cov = (second - count * mean * mean.transpose()) / (count - 1.0);
  cov = 0.5 * (cov + cov.transpose());
  return noise_stats_from(cov, basis);
}

}  // namespace difflab::models

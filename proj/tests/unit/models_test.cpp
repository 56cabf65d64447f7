#include <cmath>
#include <numeric>

#include "doctest.h"
#include "difflab/models.hpp"
#include "gen.hpp"

using namespace difflab;
using namespace difflab::models;

namespace {

Eigen::MatrixXd sample_cov(const std::vector<Eigen::VectorXd>& xs) {
  const auto m = xs.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
  for (const auto& x : xs) c += (x - mean) * (x - mean).transpose();
  return c / static_cast<double>(xs.size() - 1);
}

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) return std::accumulate(v.begin() + static_cast<long>(lo), v.begin() + static_cast<long>(hi), 0.0);
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double naive_logistic_loss(double rho, const Eigen::VectorXd& w, const Eigen::VectorXd& h, double y) {
  return 0.5 * rho * w.squaredNorm() + std::log(1.0 + std::exp(-y * h.dot(w)));
}

Dataset random_dataset(gen::Rng& g, std::size_t n, Eigen::Index m) {
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(n), m);
  d.labels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    d.features.row(static_cast<Eigen::Index>(j)) = gen::vector(g, m).transpose();
    d.labels(static_cast<Eigen::Index>(j)) = gen::uniform(g, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  }
  return d;
}

}  // namespace

TEST_CASE("quadratic model rejects bad inputs") {
  CHECK_THROWS_AS(QuadraticModel(Eigen::VectorXd::Ones(2), 1.0, -Eigen::MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(QuadraticModel(Eigen::VectorXd::Ones(2), -1.0, Eigen::MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(QuadraticModel(Eigen::VectorXd::Ones(3), 1.0, Eigen::MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("quad_sample: noiseless zero model gives zero labels") {
  const auto m = QuadraticModel::isotropic(Eigen::VectorXd::Zero(3), 0.0);
  Stream rng(1);
  for (int t = 0; t < 100; ++t) CHECK(quad_sample(m, rng).y == 0.0);
}

TEST_CASE("quad_sample: label mean and regressor covariance") {
  constexpr int kN = 100'000;
  const auto m = QuadraticModel::isotropic(Eigen::VectorXd::Ones(2), 1.0);
  Stream rng(2);
  double ysum = 0.0;
  std::vector<Eigen::VectorXd> hs;
  hs.reserve(kN);
  for (int t = 0; t < kN; ++t) {
    const auto s = quad_sample(m, rng);
    ysum += s.y;
    hs.push_back(s.h);
  }
  CHECK(std::abs(ysum / kN) < 4.0 * std::sqrt((2.0 + 1.0) / kN));
  CHECK((sample_cov(hs) - Eigen::MatrixXd::Identity(2, 2)).norm() < 0.05 * std::sqrt(2.0));

  gen::Rng g(5);
  const Eigen::MatrixXd rh = gen::spd(g, 3);
  const QuadraticModel colored(Eigen::VectorXd::Ones(3), 1.0, rh);
  hs.clear();
  for (int t = 0; t < kN; ++t) hs.push_back(quad_sample(colored, rng).h);
  CHECK((sample_cov(hs) - rh).norm() < 0.05 * rh.norm());
}

TEST_CASE("rademacher regressors have h h^T = R_h when M = 1") {
  const QuadraticModel m(Eigen::VectorXd::Ones(1), 0.0, 4.0 * Eigen::MatrixXd::Identity(1, 1),
                         FeatureDistribution::Rademacher);
  Stream rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto s = quad_sample(m, rng);
    CHECK(s.h(0) * s.h(0) == 4.0);
    CHECK(s.y == s.h(0));
  }
}

TEST_CASE("quad_gradient examples") {
  const auto m = QuadraticModel::isotropic(Eigen::VectorXd::Ones(2), 1.0);
  const Sample noiseless{Eigen::Vector2d(0.3, -1.2), Eigen::Vector2d(0.3, -1.2).dot(Eigen::Vector2d::Ones())};
  CHECK(quad_gradient(m, m.w_opt(), noiseless).norm() == doctest::Approx(0.0));

  const Sample s{Eigen::Vector2d(1.0, 0.0), 2.0};
  const Eigen::VectorXd g = quad_gradient(m, Eigen::Vector2d::Zero(), s);
  CHECK(g(0) == -4.0);
  CHECK(g(1) == 0.0);
  // Central difference of (y - h'w)^2.
  const double step = 1e-6;
  const double fd = (std::pow(2.0 - step, 2) - std::pow(2.0 + step, 2)) / (2.0 * step);
  CHECK(fd == doctest::Approx(-4.0).epsilon(1e-8));
}

TEST_CASE("quad_gradient is unbiased for the risk gradient") {
  constexpr int kN = 100'000;
  gen::Rng g(9);
  const Eigen::MatrixXd rh = gen::spd(g, 2);
  const QuadraticModel m(Eigen::Vector2d(1.0, -0.5), 1.0, rh);
  const Eigen::VectorXd w = Eigen::Vector2d(0.2, 0.7);
  const Eigen::VectorXd truth = 2.0 * rh * (w - m.w_opt());
  Stream rng(10);
  std::vector<Eigen::VectorXd> gs;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (int t = 0; t < kN; ++t) {
    gs.push_back(quad_gradient(m, w, quad_sample(m, rng)));
    mean += gs.back();
  }
  mean /= kN;
  const double tr = sample_cov(gs).trace();
  CHECK((mean - truth).norm() < 5.0 * std::sqrt(tr / kN));
}

TEST_CASE("quad_risk") {
  const auto m = QuadraticModel::isotropic(Eigen::VectorXd::Ones(2), 1.0);
  CHECK(quad_risk(m, m.w_opt()) == 1.0);
  CHECK(quad_risk(m, m.w_opt() + Eigen::Vector2d(1.0, 0.0)) == doctest::Approx(2.0));

  constexpr int kN = 1'000'000;
  const Eigen::VectorXd w = Eigen::Vector2d(0.5, 2.0);
  Stream rng(4);
  double acc = 0.0;
  for (int t = 0; t < kN; ++t) {
    const auto s = quad_sample(m, rng);
    const double e = s.y - s.h.dot(w);
    acc += e * e;
  }
  CHECK(acc / kN == doctest::Approx(quad_risk(m, w)).epsilon(0.01));
}

TEST_CASE("property: quadratic excess risk is non-negative and zero only at the optimum") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    gen::Rng g(seed);
    const Eigen::Index dim = static_cast<Eigen::Index>(gen::integer(g, 1, 6));
    const QuadraticModel m(gen::vector(g, dim), gen::uniform(g, 0.0, 2.0), gen::spd(g, dim));
    const Eigen::VectorXd w = m.w_opt() + gen::vector(g, dim, 0.1);
    CHECK(quad_risk(m, w) - quad_risk(m, m.w_opt()) > 0.0);
    CHECK(quad_risk(m, m.w_opt()) == m.sigma_v_sq());
  }
}

TEST_CASE("quad_noise_stats") {
  const auto m = QuadraticModel::isotropic(Eigen::VectorXd::Ones(2), 1.0);
  const auto ns = quad_noise_stats(m);
  CHECK(ns.r_v.isApprox(4.0 * Eigen::MatrixXd::Identity(2, 2)));
  CHECK(ns.trace == doctest::Approx(8.0));
  CHECK(quad_noise_stats(QuadraticModel::isotropic(Eigen::VectorXd::Ones(2), 0.0)).r_v.norm() == 0.0);

  gen::Rng g(6);
  const Eigen::MatrixXd rh = gen::spd(g, 2);
  const QuadraticModel c(Eigen::Vector2d(1.0, 2.0), 0.7, rh);
  Stream rng(7);
  std::vector<Eigen::VectorXd> gs;
  for (int t = 0; t < 100'000; ++t) gs.push_back(quad_gradient(c, c.w_opt(), quad_sample(c, rng)));
  const Eigen::MatrixXd expected = 4.0 * 0.7 * rh;
  CHECK((sample_cov(gs) - expected).norm() < 0.05 * expected.norm());
}

TEST_CASE("quad_spectrum") {
  const auto iso = quad_spectrum(QuadraticModel::isotropic(Eigen::VectorXd::Ones(2), 1.0));
  CHECK(iso.eigenvalues(0) == doctest::Approx(2.0));
  CHECK(iso.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(iso.lambda_min == doctest::Approx(2.0));
  CHECK(iso.lambda_max == doctest::Approx(2.0));

  const QuadraticModel diag(Eigen::VectorXd::Ones(2), 1.0, Eigen::Vector2d(0.5, 2.0).asDiagonal());
  const auto sd = quad_spectrum(diag);
  CHECK(sd.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(sd.eigenvalues(1) == doctest::Approx(4.0));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::Rng g(seed);
    const Eigen::Index dim = static_cast<Eigen::Index>(gen::integer(g, 1, 8));
    const Eigen::MatrixXd rh = gen::spd(g, dim);
    const auto s = quad_spectrum(QuadraticModel(Eigen::VectorXd::Zero(dim), 1.0, rh));
    const Eigen::MatrixXd rebuilt = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    CHECK((rebuilt - 2.0 * rh).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index k = 1; k < dim; ++k) CHECK(s.eigenvalues(k - 1) <= s.eigenvalues(k));
  }
}

TEST_CASE("logistic gradient examples") {
  const Eigen::VectorXd h = Eigen::Vector3d(1.0, -2.0, 0.5);
  const Eigen::VectorXd g = logistic_gradient(0.3, Eigen::VectorXd::Zero(3), h, -1.0);
  CHECK((g - 0.5 * h).norm() < 1e-15);

  const Eigen::VectorXd w = Eigen::Vector3d(50.0, 0.0, 0.0);
  const Eigen::VectorXd sat = logistic_gradient(0.3, w, Eigen::Vector3d(1.0, 0.0, 0.0), 1.0);
  CHECK(sat.allFinite());
  CHECK((sat - 0.3 * w).norm() < 1e-15 * 50.0 + 1e-20);
  const Eigen::VectorXd big = Eigen::Vector3d(1e4, 0.0, 0.0);
  CHECK(logistic_gradient(0.3, big, Eigen::Vector3d(1.0, 0.0, 0.0), -1.0).allFinite());
  CHECK(std::isfinite(logistic_loss(0.3, big, Eigen::Vector3d(1.0, 0.0, 0.0), -1.0)));
}

TEST_CASE("property: gradients match central finite differences") {
  constexpr double kStep = 1e-6;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::Rng g(seed);
    const Eigen::Index dim = static_cast<Eigen::Index>(gen::integer(g, 1, 6));
    const double rho = gen::uniform(g, 0.1, 2.0);
    const Eigen::VectorXd w = gen::vector(g, dim);
    const Eigen::VectorXd h = gen::vector(g, dim, 2.0);
    const double y = gen::uniform(g, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const Eigen::VectorXd lg = logistic_gradient(rho, w, h, y);

    const QuadraticModel qm(gen::vector(g, dim), 1.0, gen::spd(g, dim));
    const Sample s{h, gen::uniform(g, -2.0, 2.0)};
    const Eigen::VectorXd qg = quad_gradient(qm, w, s);

    for (Eigen::Index m = 0; m < dim; ++m) {
      Eigen::VectorXd up = w, dn = w;
      up(m) += kStep;
      dn(m) -= kStep;
      const double lfd = (naive_logistic_loss(rho, up, h, y) - naive_logistic_loss(rho, dn, h, y)) / (2.0 * kStep);
      CHECK(std::abs(lfd - lg(m)) <= 1e-5 * std::max(1.0, std::abs(lg(m))));
      const double qfd =
          (std::pow(s.y - h.dot(up), 2) - std::pow(s.y - h.dot(dn), 2)) / (2.0 * kStep);
      CHECK(std::abs(qfd - qg(m)) <= 1e-5 * std::max(1.0, std::abs(qg(m))));
    }
  }
}

TEST_CASE("logistic empirical risk") {
  gen::Rng g(21);
  const Dataset d = random_dataset(g, 500, 4);
  CHECK(logistic_empirical_risk(d, 0.7, Eigen::VectorXd::Zero(4)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const Eigen::VectorXd w = gen::vector(g, 4);
  std::vector<double> terms;
  for (Eigen::Index j = 0; j < 500; ++j) {
    terms.push_back(std::log1p(std::exp(-d.labels(j) * d.features.row(j).dot(w))));
  }
  const double oracle = 0.5 * 0.7 * w.squaredNorm() + pairwise_sum(terms, 0, terms.size()) / 500.0;
  CHECK(std::abs(logistic_empirical_risk(d, 0.7, w) - oracle) <= 1e-12 * std::abs(oracle));

  const LogisticModel m(d, 0.7);
  for (int t = 0; t < 20; ++t) {
    CHECK(logistic_empirical_risk(m, m.w_opt()) <= logistic_empirical_risk(m, m.w_opt() + gen::vector(g, 4, 0.3)));
  }
}

TEST_CASE("compute_w_opt_logistic: one-sample fixed point") {
  Dataset d;
  d.features = Eigen::MatrixXd::Ones(1, 1);
  d.labels = Eigen::VectorXd::Ones(1);
  const auto r = compute_w_opt_logistic(d, 1.0, 1e-12);
  // Bisection on w = 1 / (1 + e^w).
  double lo = 0.0, hi = 1.0;
  for (int t = 0; t < 200; ++t) {
    const double mid = 0.5 * (lo + hi);
    (mid - 1.0 / (1.0 + std::exp(mid)) > 0.0 ? hi : lo) = mid;
  }
  CHECK(r.w_opt(0) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
  CHECK(r.grad_norm < 1e-12);
}

TEST_CASE("compute_w_opt_logistic: separable data stays finite and meets tolerance") {
  gen::Rng g(31);
  Dataset d = random_dataset(g, 200, 3);
  const Eigen::Vector3d dir(1.0, -1.0, 2.0);
  for (Eigen::Index j = 0; j < 200; ++j) d.labels(j) = d.features.row(j).dot(dir) > 0 ? 1.0 : -1.0;
  const auto r = compute_w_opt_logistic(d, 10.0);
  CHECK(r.w_opt.allFinite());
  CHECK(r.grad_norm < 1e-8);
  CHECK(logistic_empirical_gradient(d, 10.0, r.w_opt).norm() < 1e-8);
  CHECK_THROWS_AS(compute_w_opt_logistic(d, 10.0, 1e-8, 1), ConvergenceError);
}

TEST_CASE("property: logistic empirical Hessian is at least rho") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::Rng g(seed);
    const Eigen::Index dim = static_cast<Eigen::Index>(gen::integer(g, 1, 6));
    const double rho = gen::uniform(g, 0.05, 2.0);
    const Dataset d = random_dataset(g, 100, dim);
    const Eigen::MatrixXd h = logistic_empirical_hessian(d, rho, gen::vector(g, dim, 3.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    CHECK(es.eigenvalues().minCoeff() >= rho - 1e-9);
  }
}

TEST_CASE("synthetic dataset labels are +-1 and sampling stays in the dataset") {
  Stream rng(5);
  const Dataset d = synthetic_logistic_dataset(300, 5, 0.5, rng);
  CHECK(d.size() == 300);
  CHECK(d.dim() == 5);
  for (Eigen::Index j = 0; j < 300; ++j) CHECK(std::abs(d.labels(j)) == 1.0);
  const LogisticModel m(d, 1.0);
  for (int t = 0; t < 50; ++t) {
    const auto s = logistic_sample(m, rng);
    bool found = false;
    for (Eigen::Index j = 0; j < 300 && !found; ++j)
      found = d.features.row(j).transpose() == s.h && d.labels(j) == s.y;
    CHECK(found);
  }
}

TEST_CASE("estimate_noise_stats on the quadratic model") {
  const RiskModel m = QuadraticModel::isotropic(Eigen::Vector2d(1.0, -1.0), 1.0);
  const auto spec = spectrum(m);
  Stream r1(1), r2(2), r3(3);
  const auto big = estimate_noise_stats(m, w_opt(m), spec, 100'000, r1);
  CHECK(big.trace == doctest::Approx(8.0).epsilon(0.05));
  const auto small = estimate_noise_stats(m, w_opt(m), spec, 1000, r2);
  CHECK(small.trace == doctest::Approx(big.trace).epsilon(0.15));

  const RiskModel doubled = QuadraticModel::isotropic(Eigen::Vector2d(1.0, -1.0), 2.0);
  const auto dbl = estimate_noise_stats(doubled, w_opt(doubled), spectrum(doubled), 100'000, r3);
  CHECK(dbl.trace / big.trace == doctest::Approx(2.0).epsilon(0.05));
  CHECK_THROWS_AS(estimate_noise_stats(m, w_opt(m), spec, 999, r1), std::invalid_argument);
}

TEST_CASE("property: gradient noise is zero-mean at fixed w") {
  gen::Rng g(41);
  Stream rng(8);
  const Dataset d = random_dataset(g, 400, 3);
  const RiskModel lm = LogisticModel(d, 0.5);
  const RiskModel qm = QuadraticModel(Eigen::Vector3d(1.0, 0.0, -1.0), 1.0, gen::spd(g, 3));
  for (const RiskModel* m : {&lm, &qm}) {
    const Eigen::VectorXd w = gen::vector(g, 3);
    Eigen::VectorXd truth;
    if (const auto* q = std::get_if<QuadraticModel>(m)) {
      truth = 2.0 * q->feature_cov() * (w - q->w_opt());
    } else {
      truth = logistic_empirical_gradient(d, 0.5, w);
    }
    constexpr int kN = 50'000;
    std::vector<Eigen::VectorXd> noise;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    for (int t = 0; t < kN; ++t) {
      noise.push_back(gradient(*m, w, sample(*m, rng)) - truth);
      mean += noise.back();
    }
    mean /= kN;
    CHECK(mean.norm() < 5.0 * std::sqrt(sample_cov(noise).trace() / kN));
  }
}

TEST_CASE("property: gradient noise variance grows at most quadratically in the error") {
  gen::Rng g(51);
  const QuadraticModel m(Eigen::Vector2d(1.0, 1.0), 1.0, gen::spd(g, 2));
  const RiskModel rm = m;
  Stream rng(9);
  std::vector<double> dist, var;
  for (double r : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const Eigen::VectorXd w = m.w_opt() + r * Eigen::Vector2d(0.6, 0.8);
    const Eigen::VectorXd truth = 2.0 * m.feature_cov() * (w - m.w_opt());
    double acc = 0.0;
    for (int t = 0; t < 20'000; ++t) acc += (gradient(rm, w, sample(rm, rng)) - truth).squaredNorm();
    dist.push_back(r * r);
    var.push_back(acc / 20'000);
  }
  // Fit var = alpha * dist + sigma2 through the first and last point, then check the rest lie below 1.1x.
  const double alpha = (var.back() - var.front()) / (dist.back() - dist.front());
  for (std::size_t k = 0; k < var.size(); ++k) CHECK(var[k] <= 1.1 * (alpha * dist[k] + var.front()));
}

#include "difflab/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "difflab/models.hpp"
#include "difflab/rng.hpp"
#include "difflab/special.hpp"

namespace difflab::selftest {

namespace {

std::string describe(double err, double tol) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "max error %.3e (tolerance %.1e)", err, tol);
  return buf;
}

CheckResult check(std::string name, double err, double tol) {
  return {std::move(name), err < tol, describe(err, tol)};
}

CheckResult gamma_products() {
  constexpr std::size_t kMaxI = 1000;
  double worst = 0.0;
  for (double lm : {0.3, 0.7, 1.5, 3.0}) {
    for (std::size_t j = 0; j < kMaxI; ++j) {
      double direct = 1.0;
      for (std::size_t i = j + 1; i <= kMaxI; ++i) {
        const double f = 1.0 - lm / static_cast<double>(i);
        direct *= f * f;
        const double got = theory::gamma_ratio_product(lm, j, i);
        const double err = direct == 0.0 ? std::abs(got) : std::abs(got - direct) / direct;
        worst = std::max(worst, err);
      }
    }
  }
  return check("gamma_ratio_product vs direct product", worst, 1e-10);
}

CheckResult series_zero() {
  const double err = std::abs(theory::series_constant(0.0) - std::numbers::pi * std::numbers::pi / 6.0);
  return check("series_constant(0) vs pi^2/6", err, 1e-9);
}

CheckResult log_gamma_spots() {
  const double half = std::abs(theory::log_gamma(0.5) - 0.5 * std::log(std::numbers::pi));
  const double ten = std::abs(theory::log_gamma(10.0) - std::log(362880.0));
  const double one = std::abs(theory::log_gamma(1.0));
  return check("log_gamma at 1/2, 1, 10", std::max({half, ten, one}), 1e-10);
}

double fd_error(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& w,
                const Eigen::VectorXd& grad) {
  constexpr double kStep = 1e-6;
  double worst = 0.0;
  for (Eigen::Index m = 0; m < w.size(); ++m) {
    Eigen::VectorXd up = w, down = w;
    up(m) += kStep;
    down(m) -= kStep;
    const double fd = (f(up) - f(down)) / (2.0 * kStep);
    worst = std::max(worst, std::abs(fd - grad(m)) / std::max(1.0, std::abs(grad(m))));
  }
  return worst;
}

CheckResult quadratic_gradient() {
  Stream rng(derive_seed(7, 0, 0));
  const auto model = models::QuadraticModel::isotropic(Eigen::VectorXd::Ones(3), 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto s = models::quad_sample(model, rng);
    Eigen::VectorXd w(3);
    for (Eigen::Index m = 0; m < 3; ++m) w(m) = rng.normal();
    auto loss = [&](const Eigen::VectorXd& x) {
      const double e = s.y - s.h.dot(x);
      return e * e;
    };
    worst = std::max(worst, fd_error(loss, w, models::quad_gradient(model, w, s)));
  }
  return check("quadratic loss gradient vs finite differences", worst, 1e-6);
}

CheckResult logistic_gradient() {
  Stream rng(derive_seed(7, 0, 1));
  constexpr double kRho = 0.7;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd h(4), w(4);
    for (Eigen::Index m = 0; m < 4; ++m) {
      h(m) = 2.0 * rng.normal();
      w(m) = rng.normal();
    }
    const double y = rng.sign();
    auto loss = [&](const Eigen::VectorXd& x) { return models::logistic_loss(kRho, x, h, y); };
    worst = std::max(worst, fd_error(loss, w, models::logistic_gradient(kRho, w, h, y)));
  }
  return check("logistic loss gradient vs finite differences", worst, 1e-6);
}

}  // namespace

std::vector<CheckResult> run_all() {
  return {gamma_products(), series_zero(), log_gamma_spots(), quadratic_gradient(), logistic_gradient()};
}

bool report(const std::vector<CheckResult>& results, std::ostream& out) {
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok;
}

}  // namespace difflab::selftest

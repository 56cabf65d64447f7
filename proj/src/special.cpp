#include "difflab/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace difflab::theory {

namespace {

constexpr double kStirlingFloor = 15.0;

// B_{2k} / (2k(2k−1)) for k = 1..7.
constexpr std::array<double, 7> kStirlingCoeff = {
    1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0};

// Σ_k c_k x^{1−2k}
double stirling_correction(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double acc = 0.0;
  for (auto it = kStirlingCoeff.rbegin(); it != kStirlingCoeff.rend(); ++it) acc = acc * inv2 + *it;
  return acc * inv;
}

double stirling(double x) {
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + stirling_correction(x);
}

// ln Γ(x+s) − ln Γ(x) for x ≥ kStirlingFloor and x + s ≥ kStirlingFloor,
// arranged so the large (x − ½)ln x parts cancel analytically.
double stirling_ratio(double x, double s) {
  return (x - 0.5) * std::log1p(s / x) + s * std::log(x + s) - s + stirling_correction(x + s) -
         stirling_correction(x);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("log_gamma: argument must be positive and finite");
  if (x >= kStirlingFloor) return stirling(x);
  double shift_log = 0.0;
  double prod = 1.0;
  while (x < kStirlingFloor) {
    prod *= x;
    x += 1.0;
  }
  shift_log = std::log(prod);
  return stirling(x) - shift_log;
}

/// ln Γ(x+s) − ln Γ(x); requires x > 0 and x + s > 0.
double log_gamma_ratio(double x, double s) {
  if (!(x > 0.0) || !(x + s > 0.0)) throw std::domain_error("log_gamma_ratio: arguments must be positive");
  double adjust = 0.0;
  while (x < kStirlingFloor || x + s < kStirlingFloor) {
    // Γ(x+s)/Γ(x) = Γ(x+1+s)/Γ(x+1) · x/(x+s)
    adjust -= std::log1p(s / x);
    x += 1.0;
  }
  return stirling_ratio(x, s) + adjust;
}

double gamma_ratio_product(double lm, std::size_t j, std::size_t i) {
  if (j > i) throw std::invalid_argument("gamma_ratio_product: requires j <= i");
  if (!std::isfinite(lm) || lm < 0.0) throw std::invalid_argument("gamma_ratio_product: lm must be finite and >= 0");
  if (j == i) return 1.0;
  const double jd = static_cast<double>(j);
  const double id = static_cast<double>(i);
  if (jd + 1.0 > lm) {
    // Γ(i+1−lm)/Γ(i+1) · Γ(j+1)/Γ(j+1−lm), squared.
    const double log_ratio = -log_gamma_ratio(id + 1.0 - lm, lm) + log_gamma_ratio(jd + 1.0 - lm, lm);
    return std::exp(2.0 * log_ratio);
  }
  double p = 1.0;
  for (std::size_t t = j + 1; t <= i; ++t) {
    const double f = 1.0 - lm / static_cast<double>(t);
    p *= f * f;
  }
  return p;
}

double series_tail(double a, std::size_t J) {
  const double s = 1.0 - a;
  const double p = 2.0 * s;
  // Γ(x)²/Γ(x+s)² = x^{−2s}(1 + e1/x + e2/x² + e3/x³ + …)
  const double r1 = (s * s - s) / 2.0;
  const double r2 = -(s * s * s - 1.5 * s * s + 0.5 * s) / 6.0;
  const double r3 = (s * s * s * s - 2.0 * s * s * s + s * s) / 12.0;
  const std::array<double, 4> e = {1.0, -2.0 * r1, -2.0 * r2 + 2.0 * r1 * r1,
                                   -2.0 * r3 + 4.0 * r1 * r2 - (4.0 / 3.0) * r1 * r1 * r1};

  const double x = static_cast<double>(J) + 0.5;
  double integral = 0.0;
  double deriv = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double kk = static_cast<double>(k);
    integral += e[k] * std::pow(x, 1.0 - p - kk) / (p + kk - 1.0);
    deriv -= e[k] * (p + kk) * std::pow(x, -p - kk - 1.0);
  }
  const double third = -p * (p + 1.0) * (p + 2.0) * std::pow(x, -p - 3.0);
  // Midpoint Euler–Maclaurin: Σ_{j>J} f(j) = ∫_{J+½}^∞ f + f'(J+½)/24 − 7f'''(J+½)/5760 + …
  return integral + deriv / 24.0 - 7.0 * third / 5760.0;
}

double series_constant(double a) {
  if (!(a >= 0.0 && a < 0.5)) throw std::domain_error("series_constant: requires 0 <= a < 1/2 (series diverges)");
  const double s = 1.0 - a;
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t j = 1; j <= kSeriesHead; ++j) {
    const double term = std::exp(-2.0 * log_gamma_ratio(static_cast<double>(j), s));
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum + series_tail(a, kSeriesHead);
}

}  // namespace difflab::theory

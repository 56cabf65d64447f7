#pragma once

#include <cstddef>

namespace difflab::theory {

/// ln Γ(x) for x > 0. Stirling series with Bernoulli corrections after
/// shifting the argument to x ≥ 15 by the recurrence Γ(x+1) = xΓ(x).
/// Accuracy is a few ulps of the result across [0.1, 1e6].
/// Throws std::domain_error for x ≤ 0 or non-finite x.
double log_gamma(double x);

/// ln Γ(x+s) − ln Γ(x) without forming either term, so the result keeps
/// full relative accuracy when x is large. Requires x > 0 and x + s > 0.
double log_gamma_ratio(double x, double s);

/// ∏_{t=j+1}^{i} (1 − lm/t)² for 0 ≤ j ≤ i.
///
/// When j + 1 > lm every factor is positive and the product is evaluated
/// as the Gamma ratio [Γ(i+1−lm)Γ(j+1) / (Γ(i+1)Γ(j+1−lm))]² in the log
/// domain. Otherwise some factors vanish or change sign and the squared
/// factors are multiplied directly.
double gamma_ratio_product(double lm, std::size_t j, std::size_t i);

/// S(a) = Σ_{j≥1} Γ(j)² / Γ(j+1−a)² for 0 ≤ a < 1/2, i.e.
/// ₃F₂(1,1,1; 2−a, 2−a; 1) / Γ(2−a)².
///
/// The first kSeriesHead terms are summed explicitly; the remainder uses
/// the large-j expansion of the summand integrated with the midpoint
/// Euler–Maclaurin rule. Throws std::domain_error outside [0, 1/2).
double series_constant(double a);

/// Number of explicitly summed terms in series_constant.
inline constexpr std::size_t kSeriesHead = 20'000;

/// Closed-form tail Σ_{j>J} Γ(j)²/Γ(j+1−a)² as used by series_constant.
double series_tail(double a, std::size_t J);

}  // namespace difflab::theory

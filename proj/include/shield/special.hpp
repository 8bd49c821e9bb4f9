#pragma once

namespace shield {

/// log Gamma(a) for a > 0 (Lanczos, relative error ~1e-15).
double log_gamma(double a);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly (continued fraction) in the upper tail so small values keep
/// their relative precision.
double gamma_q(double a, double x);

/// Upper-tail probability of the chi-square distribution with `df` degrees
/// of freedom: Q(df/2, x/2). Throws InvalidArgument for df < 1 or x < 0.
double chi_square_sf(double x, int df);

}  // namespace shield

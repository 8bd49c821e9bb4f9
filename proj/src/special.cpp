#include "shield/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "shield/error.hpp"

namespace shield {

namespace {

constexpr int kMaxIterations = 1000;
constexpr double kTolerance = 1e-16;
constexpr double kTiny = 1e-300;

// Lanczos approximation, g = 7, n = 9.
constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// P(a, x) by its power series; converges quickly for x < a + 1.
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kTolerance) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Q(a, x) by Lentz's continued fraction; converges quickly for x >= a + 1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTolerance) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

void check_args(double a, double x) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "incomplete gamma needs a > 0");
  if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "incomplete gamma needs x >= 0");
}

}  // namespace

double log_gamma(double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "log_gamma needs a > 0");
  if (a < 0.5) {
    // Reflection keeps the approximation in its accurate range.
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * a)) - log_gamma(1.0 - a);
  }
  const double z = a - 1.0;
  double sum = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) sum += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_fraction(a, x);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::InvalidArgument, "chi-square needs df >= 1");
  if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "chi-square statistic must be >= 0");
  return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace shield

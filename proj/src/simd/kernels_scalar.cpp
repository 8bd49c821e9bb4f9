#include "shield/simd/kernels.hpp"

#include <cassert>
#include <cstddef>

namespace shield::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void scaled_product(std::span<const double> x, double scale, std::span<const double> w,
                    std::span<double> out) {
  assert(x.size() == w.size() && x.size() == out.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (scale * w[j]) * x[j];
}

void scale_in_place(std::span<double> x, double factor) {
  for (double& v : x) v *= factor;
}

}  // namespace shield::simd::scalar

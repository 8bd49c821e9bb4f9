// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// CPUID check, so nothing here may run at static-initialization time.

#include <immintrin.h>

#include <cassert>
#include <cstddef>

#include "shield/simd/kernels.hpp"

namespace shield::simd::avx2 {

namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();

  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += pa[i] * pb[i];
  return sum;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();

  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double sum = horizontal_sum(acc);
  for (; i < n; ++i) {
    const double d = pa[i] - pb[i];
    sum += d * d;
  }
  return sum;
}

// Same operation order as the scalar path, so results are bitwise equal.
void scaled_product(std::span<const double> x, double scale, std::span<const double> w,
                    std::span<double> out) {
  assert(x.size() == w.size() && x.size() == out.size());
  const std::size_t n = x.size();
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d sw = _mm256_mul_pd(s, _mm256_loadu_pd(w.data() + j));
    _mm256_storeu_pd(out.data() + j, _mm256_mul_pd(sw, _mm256_loadu_pd(x.data() + j)));
  }
  for (; j < n; ++j) out[j] = (scale * w[j]) * x[j];
}

void scale_in_place(std::span<double> x, double factor) {
  const std::size_t n = x.size();
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(x.data() + j, _mm256_mul_pd(_mm256_loadu_pd(x.data() + j), f));
  }
  for (; j < n; ++j) x[j] *= factor;
}

}  // namespace shield::simd::avx2

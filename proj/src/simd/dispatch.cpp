#include <atomic>
#include <cstdlib>
#include <cstring>

#include "shield/simd/kernels.hpp"

namespace shield::simd {

namespace {

struct KernelTable {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*squared_distance)(std::span<const double>, std::span<const double>);
  void (*scaled_product)(std::span<const double>, double, std::span<const double>,
                         std::span<double>);
  void (*scale_in_place)(std::span<double>, double);
};

constexpr KernelTable kScalar{Isa::Scalar, scalar::dot, scalar::squared_distance,
                              scalar::scaled_product, scalar::scale_in_place};

#if defined(SHIELD_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, avx2::dot, avx2::squared_distance, avx2::scaled_product,
                            avx2::scale_in_place};
#endif

bool cpu_has_avx2() {
#if defined(SHIELD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
#if defined(SHIELD_HAVE_AVX2)
  if (isa == Isa::Avx2 && cpu_has_avx2()) return &kAvx2;
#endif
  (void)isa;
  return &kScalar;
}

const KernelTable* initial_table() {
  const char* env = std::getenv("SHIELD_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalar;
  return table_for(detected_isa());
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

const KernelTable& kernels() { return *current().load(std::memory_order_relaxed); }

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return kernels().isa; }

void set_active_isa(Isa isa) { current().store(table_for(isa), std::memory_order_relaxed); }

double dot(std::span<const double> a, std::span<const double> b) { return kernels().dot(a, b); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  return kernels().squared_distance(a, b);
}

void scaled_product(std::span<const double> x, double scale, std::span<const double> w,
                    std::span<double> out) {
  kernels().scaled_product(x, scale, w, out);
}

void scale_in_place(std::span<double> x, double factor) { kernels().scale_in_place(x, factor); }

}  // namespace shield::simd

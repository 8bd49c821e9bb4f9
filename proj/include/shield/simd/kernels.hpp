#pragma once

// Data-parallel inner loops used across the pipeline. Every kernel has a
// scalar reference implementation; vector variants are chosen once at
// runtime from the host CPU and are equivalence-tested against the scalar
// path.

#include <span>
#include <string_view>

namespace shield::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best ISA that is both compiled in and supported by the running CPU.
Isa detected_isa();

/// ISA currently used by the dispatching entry points below. Defaults to
/// detected_isa(), or Scalar when SHIELD_SIMD=scalar is set in the
/// environment.
Isa active_isa();

/// Forces an ISA (tests, benchmarking). Requesting an ISA the CPU lacks
/// falls back to Scalar. Not thread-safe with concurrent kernel calls.
void set_active_isa(Isa isa);

/// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

/// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b);

/// out[j] = (scale * w[j]) * x[j]. Used for the rows of diag(w) X diag(w).
void scaled_product(std::span<const double> x, double scale, std::span<const double> w,
                    std::span<double> out);

/// x[j] *= factor
void scale_in_place(std::span<double> x, double factor);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
void scaled_product(std::span<const double> x, double scale, std::span<const double> w,
                    std::span<double> out);
void scale_in_place(std::span<double> x, double factor);
}  // namespace scalar

#if defined(SHIELD_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
void scaled_product(std::span<const double> x, double scale, std::span<const double> w,
                    std::span<double> out);
void scale_in_place(std::span<double> x, double factor);
}  // namespace avx2
#endif

}  // namespace shield::simd

#pragma once

#include <cstdint>
#include <random>

namespace shield {

/// splitmix64 finalizer; a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the independent stream for item `index` under a run seed. Streams
/// depend only on (seed, index), never on evaluation order or thread count.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Portable random source: mt19937_64 bits turned into variates by code in
/// this library, so draws are identical across standard libraries (the
/// std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal (Marsaglia polar method, cached pair).
  double normal();

  /// Gamma(shape, scale 1), shape > 0. Marsaglia-Tsang for shape >= 1;
  /// smaller shapes use Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shield

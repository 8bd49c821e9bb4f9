#include "shield/utility.hpp"

#include <algorithm>

#include "shield/error.hpp"
#include "shield/simd/kernels.hpp"

namespace shield {

std::vector<double> signal_weights(const IncidenceTable& table, const SignalStats* stats) {
  const std::size_t m = table.num_terms();
  std::vector<double> z(m);
  if (table.num_arms() == 1) {
    const double n = static_cast<double>(table.n_subjects()[0]);
    for (std::size_t i = 0; i < m; ++i) z[i] = static_cast<double>(table.count(i, 0)) / n;
    return z;
  }
  if (stats == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "multi-arm signal weights need posterior statistics");
  }
  if (stats->terms.size() != m) {
    throw Error(ErrorCode::InvalidArgument, "signal statistics do not match the table");
  }
  for (std::size_t i = 0; i < m; ++i) z[i] = std::max(stats->terms[i].ic.lower, 0.0);
  return z;
}

UtilityGraph utility_matrix(std::span<const double> z, const SimilarityMatrix& s) {
  const std::size_t m = s.size();
  if (z.size() != m) throw Error(ErrorCode::InvalidArgument, "weight vector length != similarity size");
  if (std::any_of(z.begin(), z.end(), [](double v) { return !(v >= 0.0); })) {
    throw Error(ErrorCode::InvalidArgument, "signal weights must be nonnegative");
  }
  UtilityGraph g{s.terms, std::vector<double>(z.begin(), z.end()), Matrix(m, m)};
  for (std::size_t i = 0; i < m; ++i) {
    simd::scaled_product(s.values.row(i), z[i], z, g.matrix.row(i));
  }
  // z_i z_j S_ij and z_j z_i S_ji can differ in the last bit; mirror the upper triangle.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) g.matrix(j, i) = g.matrix(i, j);
  }
  return g;
}

}  // namespace shield

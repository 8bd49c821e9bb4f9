#pragma once

#include <span>
#include <string>
#include <vector>

#include "shield/disprop.hpp"
#include "shield/embed.hpp"
#include "shield/ingest.hpp"
#include "shield/matrix.hpp"

namespace shield {

/// Weighted PT graph U = Z S Z: node weights U_ii = z_i^2, edges U_ij.
struct UtilityGraph {
  std::vector<std::string> terms;
  std::vector<double> weights;  // z
  Matrix matrix;                // U

  std::size_t size() const noexcept { return terms.size(); }
};

/// Per-PT signal strength z. With k > 1 this is the posterior IC lower
/// bound clamped at zero; with k == 1 it is the incidence c / N. `stats`
/// must be given exactly when k > 1.
std::vector<double> signal_weights(const IncidenceTable& table, const SignalStats* stats);

/// U_ij = z_i z_j S_ij. Throws InvalidArgument on negative weights or a
/// size mismatch.
UtilityGraph utility_matrix(std::span<const double> z, const SimilarityMatrix& s);

}  // namespace shield

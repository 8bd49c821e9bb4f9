#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shield/matrix.hpp"

namespace shield {

/// PT x arm subject counts plus per-arm subjects at risk. Rows keep input
/// order; arms keep the caller's selection order.
class IncidenceTable {
 public:
  IncidenceTable() = default;

  /// Validates every invariant (unique trimmed names, 0 <= c <= N, N > 0,
  /// rectangular counts). Throws shield::Error on violation.
  IncidenceTable(std::vector<std::string> pt_names, std::vector<std::string> arm_names,
                 std::vector<std::int64_t> n_subjects, std::vector<std::int64_t> counts);

  std::size_t num_terms() const noexcept { return pt_names_.size(); }
  std::size_t num_arms() const noexcept { return arm_names_.size(); }

  const std::vector<std::string>& pt_names() const noexcept { return pt_names_; }
  const std::vector<std::string>& arm_names() const noexcept { return arm_names_; }
  const std::vector<std::int64_t>& n_subjects() const noexcept { return n_subjects_; }

  std::int64_t count(std::size_t term, std::size_t arm) const {
    return counts_[term * num_arms() + arm];
  }
  std::span<const std::int64_t> row(std::size_t term) const {
    return {counts_.data() + term * num_arms(), num_arms()};
  }

  /// T_i
  std::int64_t row_total(std::size_t term) const;
  /// N_tot
  std::int64_t total_subjects() const;

  /// Rows at the given indices, in the given order.
  IncidenceTable select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const IncidenceTable&, const IncidenceTable&) = default;

 private:
  std::vector<std::string> pt_names_;
  std::vector<std::string> arm_names_;
  std::vector<std::int64_t> n_subjects_;
  std::vector<std::int64_t> counts_;  // row-major m x k
};

/// Reads `pt,<arm>|N=<int>,...` (or plain arm headers followed by a `#N,...`
/// row). `arm_spec` lists arm names to keep, in output order; empty keeps all
/// arms in file order. `pt_column` names the PT column.
IncidenceTable parse_incidence_csv(std::istream& source, std::span<const std::string> arm_spec = {},
                                   const std::string& pt_column = "pt");

/// Writes the header-embedded-N form read by parse_incidence_csv.
void write_incidence_csv(std::ostream& out, const IncidenceTable& table);

/// Keeps rows with at least one event. Throws EmptyTable when none remain.
IncidenceTable filter_zero_rows(const IncidenceTable& table);

/// p_ij = c_ij / N_j
Matrix proportions(const IncidenceTable& table);

}  // namespace shield

#include "shield/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"
#include "shield/error.hpp"

namespace shield {

namespace {

std::optional<std::int64_t> parse_int(std::string_view text) {
  text = csv::trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

struct ArmHeader {
  std::string name;
  std::optional<std::int64_t> n;
};

ArmHeader split_arm_header(std::string_view field) {
  field = csv::trim(field);
  const auto bar = field.rfind("|N=");
  if (bar == std::string_view::npos) return {std::string(field), std::nullopt};
  const auto n = parse_int(field.substr(bar + 3));
  if (!n) {
    throw Error(ErrorCode::SchemaError,
                "arm header '" + std::string(field) + "' has a non-integer N");
  }
  return {std::string(csv::trim(field.substr(0, bar))), n};
}

}  // namespace

IncidenceTable::IncidenceTable(std::vector<std::string> pt_names, std::vector<std::string> arm_names,
                               std::vector<std::int64_t> n_subjects,
                               std::vector<std::int64_t> counts)
    : pt_names_(std::move(pt_names)),
      arm_names_(std::move(arm_names)),
      n_subjects_(std::move(n_subjects)),
      counts_(std::move(counts)) {
  const std::size_t k = arm_names_.size();
  if (k == 0) throw Error(ErrorCode::SchemaError, "incidence table needs at least one arm");
  if (n_subjects_.size() != k) {
    throw Error(ErrorCode::SchemaError, "one subjects-at-risk total is required per arm");
  }
  if (counts_.size() != pt_names_.size() * k) {
    throw Error(ErrorCode::SchemaError, "count matrix is not m x k");
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (n_subjects_[j] <= 0) {
      throw Error(ErrorCode::InvalidCount,
                  "arm '" + arm_names_[j] + "' has non-positive N=" + std::to_string(n_subjects_[j]));
    }
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < pt_names_.size(); ++i) {
    pt_names_[i] = std::string(csv::trim(pt_names_[i]));
    if (pt_names_[i].empty()) {
      throw Error(ErrorCode::SchemaError, "empty PT name at row " + std::to_string(i + 1));
    }
    if (!seen.insert(pt_names_[i]).second) {
      throw Error(ErrorCode::DuplicateTerm, "duplicate PT '" + pt_names_[i] + "'");
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = counts_[i * k + j];
      if (c < 0 || c > n_subjects_[j]) {
        throw Error(ErrorCode::InvalidCount, "PT '" + pt_names_[i] + "', arm '" + arm_names_[j] +
                                                 "': count " + std::to_string(c) +
                                                 " outside [0, " +
                                                 std::to_string(n_subjects_[j]) + "]");
      }
    }
  }
}

std::int64_t IncidenceTable::row_total(std::size_t term) const {
  const auto r = row(term);
  return std::accumulate(r.begin(), r.end(), std::int64_t{0});
}

std::int64_t IncidenceTable::total_subjects() const {
  return std::accumulate(n_subjects_.begin(), n_subjects_.end(), std::int64_t{0});
}

IncidenceTable IncidenceTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> names;
  std::vector<std::int64_t> counts;
  names.reserve(rows.size());
  counts.reserve(rows.size() * num_arms());
  for (std::size_t r : rows) {
    if (r >= num_terms()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
    names.push_back(pt_names_[r]);
    const auto src = row(r);
    counts.insert(counts.end(), src.begin(), src.end());
  }
  return IncidenceTable(std::move(names), arm_names_, n_subjects_, std::move(counts));
}

IncidenceTable parse_incidence_csv(std::istream& source, std::span<const std::string> arm_spec,
                                   const std::string& pt_column) {
  const auto records = csv::parse(csv::read_all(source));
  if (records.empty()) throw Error(ErrorCode::SchemaError, "incidence CSV is empty");

  const auto& header = records.front().fields;
  std::optional<std::size_t> pt_index;
  std::vector<std::size_t> arm_columns;
  std::vector<ArmHeader> arm_headers;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!pt_index && csv::trim(header[c]) == pt_column) {
      pt_index = c;
      continue;
    }
    arm_columns.push_back(c);
    arm_headers.push_back(split_arm_header(header[c]));
  }
  if (!pt_index) throw Error(ErrorCode::SchemaError, "no '" + pt_column + "' column in header");
  if (arm_columns.empty()) throw Error(ErrorCode::SchemaError, "header declares no arm columns");

  std::unordered_map<std::string, std::size_t> arm_lookup;
  for (std::size_t a = 0; a < arm_headers.size(); ++a) {
    if (!arm_lookup.emplace(arm_headers[a].name, a).second) {
      throw Error(ErrorCode::SchemaError, "duplicate arm column '" + arm_headers[a].name + "'");
    }
  }

  std::size_t first_body = 1;
  if (records.size() > 1 && records[1].fields.size() > *pt_index &&
      csv::trim(records[1].fields[*pt_index]) == "#N") {
    const auto& nrow = records[1].fields;
    if (nrow.size() != header.size()) {
      throw Error(ErrorCode::SchemaError, "#N row has " + std::to_string(nrow.size()) +
                                              " fields, header has " +
                                              std::to_string(header.size()));
    }
    for (std::size_t a = 0; a < arm_columns.size(); ++a) {
      const auto n = parse_int(nrow[arm_columns[a]]);
      if (!n) {
        throw Error(ErrorCode::SchemaError,
                    "#N row: non-integer total for arm '" + arm_headers[a].name + "'");
      }
      if (arm_headers[a].n && *arm_headers[a].n != *n) {
        throw Error(ErrorCode::SchemaError,
                    "arm '" + arm_headers[a].name + "': header N and #N row disagree");
      }
      arm_headers[a].n = n;
    }
    first_body = 2;
  }

  std::vector<std::size_t> selected;
  if (arm_spec.empty()) {
    selected.resize(arm_headers.size());
    std::iota(selected.begin(), selected.end(), std::size_t{0});
  } else {
    for (const auto& name : arm_spec) {
      const auto it = arm_lookup.find(std::string(csv::trim(name)));
      if (it == arm_lookup.end()) {
        throw Error(ErrorCode::SchemaError, "missing arm column '" + name + "'");
      }
      selected.push_back(it->second);
    }
  }

  std::vector<std::string> arm_names;
  std::vector<std::int64_t> n_subjects;
  for (std::size_t a : selected) {
    if (!arm_headers[a].n) {
      throw Error(ErrorCode::SchemaError, "arm '" + arm_headers[a].name +
                                              "' has no subjects-at-risk total (use "
                                              "'<name>|N=<int>' or a #N row)");
    }
    arm_names.push_back(arm_headers[a].name);
    n_subjects.push_back(*arm_headers[a].n);
  }

  std::vector<std::string> pt_names;
  std::vector<std::int64_t> counts;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = first_body; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "line " + std::to_string(rec.line);
    if (rec.fields.size() != header.size()) {
      throw Error(ErrorCode::SchemaError, where + ": expected " + std::to_string(header.size()) +
                                              " fields, found " +
                                              std::to_string(rec.fields.size()));
    }
    std::string pt(csv::trim(rec.fields[*pt_index]));
    if (pt.empty()) throw Error(ErrorCode::SchemaError, where + ": empty PT name");
    if (!seen.emplace(pt, rec.line).second) {
      throw Error(ErrorCode::DuplicateTerm,
                  where + ": duplicate PT '" + pt + "' (first seen on line " +
                      std::to_string(seen[pt]) + ")");
    }
    for (std::size_t s = 0; s < selected.size(); ++s) {
      const std::size_t a = selected[s];
      const auto value = parse_int(rec.fields[arm_columns[a]]);
      if (!value || *value < 0 || *value > n_subjects[s]) {
        throw Error(ErrorCode::InvalidCount,
                    where + ", column '" + arm_names[s] + "': count '" +
                        std::string(csv::trim(rec.fields[arm_columns[a]])) +
                        "' is not an integer in [0, " + std::to_string(n_subjects[s]) + "]");
      }
      counts.push_back(*value);
    }
    pt_names.push_back(std::move(pt));
  }

  return IncidenceTable(std::move(pt_names), std::move(arm_names), std::move(n_subjects),
                        std::move(counts));
}

void write_incidence_csv(std::ostream& out, const IncidenceTable& table) {
  out << "pt";
  for (std::size_t j = 0; j < table.num_arms(); ++j) {
    out << ',' << csv::escape(table.arm_names()[j] + "|N=" + std::to_string(table.n_subjects()[j]));
  }
  out << '\n';
  for (std::size_t i = 0; i < table.num_terms(); ++i) {
    out << csv::escape(table.pt_names()[i]);
    for (std::size_t j = 0; j < table.num_arms(); ++j) out << ',' << table.count(i, j);
    out << '\n';
  }
}

IncidenceTable filter_zero_rows(const IncidenceTable& table) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < table.num_terms(); ++i) {
    if (table.row_total(i) >= 1) keep.push_back(i);
  }
  if (keep.empty()) throw Error(ErrorCode::EmptyTable, "every PT has zero events in all arms");
  if (keep.size() == table.num_terms()) return table;
  return table.select_rows(keep);
}

Matrix proportions(const IncidenceTable& table) {
  Matrix p(table.num_terms(), table.num_arms());
  for (std::size_t i = 0; i < table.num_terms(); ++i) {
    for (std::size_t j = 0; j < table.num_arms(); ++j) {
      p(i, j) = static_cast<double>(table.count(i, j)) /
                static_cast<double>(table.n_subjects()[j]);
    }
  }
  return p;
}

}  // namespace shield

#pragma once

// Minimal RFC-4180 reader/writer shared by the incidence and embedding
// loaders. Internal to the library.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace shield::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// Splits the whole document into records. Handles quoted fields with
/// embedded commas, quotes and newlines, CRLF line ends and a UTF-8 BOM.
/// Blank lines are skipped.
std::vector<Record> parse(std::string_view text);

std::string read_all(std::istream& in);

std::string_view trim(std::string_view s);

/// Quotes the field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

}  // namespace shield::csv

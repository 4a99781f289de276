#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace mps::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
/// A leading UTF-8 byte-order mark is skipped. Blank lines are dropped.
std::vector<Record> parse(std::istream& in);

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

}  // namespace mps::csv

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fwl/errors.hpp"

namespace fwl {

namespace csv {

inline std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string cell(std::size_t v) { return std::to_string(v); }

/// RFC-4180 quoting: quote fields containing comma, quote or newline and
/// double any embedded quotes.
inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace csv

/// Writes CSV rows with a mandatory header. Output carries no timestamps,
/// so re-running an identical spec yields a byte-identical file.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Io("cannot open for writing: " + path);
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv::quote(cells[i]);
    }
    out_ << '\n';
    if (!out_) throw Io("CSV write failed");
  }

 private:
  std::ofstream out_;
};

}  // namespace fwl

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tubebem/common.hpp"

namespace tubebem {

/// Deterministic CSV emission: every float is formatted with %.17g so a
/// rerun with the same config and seed is byte-identical.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw config_error("cannot open '" + path + "' for writing");
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void raw_row(const std::string& row) { out_ << row << "\n"; }

  void begin_row() { first_ = true; }

  CsvWriter& field(const std::string& s) {
    sep();
    out_ << s;
    return *this;
  }

  CsvWriter& field(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    sep();
    out_ << buf;
    return *this;
  }

  CsvWriter& field(int v) {
    sep();
    out_ << v;
    return *this;
  }

  void end_row() { out_ << "\n"; }

 private:
  void sep() {
    if (!first_) out_ << ",";
    first_ = false;
  }

  std::ofstream out_;
  bool first_ = true;
};

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw config_error("cannot create output directory '" + dir + "'");
}

}  // namespace tubebem

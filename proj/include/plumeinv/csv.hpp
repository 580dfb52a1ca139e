#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "plumeinv/errors.hpp"

namespace plumeinv {

/// Round-trip-exact, locale-independent double formatting for data files.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& file) : out_(file) {
    if (!out_) throw ConfigError("cannot write file: " + file.string());
  }

  void header(const std::vector<std::string>& names) { cells(names); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> c;
    c.reserve(values.size());
    for (double v : values) c.push_back(fmt_double(v));
    cells(c);
  }

  void cells(const std::vector<std::string>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out_ << ',';
      out_ << c[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& file)
      : in_(file), name_(file.filename().string()) {
    if (!in_) throw ParseError(name_ + ": cannot open");
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        out.push_back(line.substr(start));
        return out;
      }
      out.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
  }

  void expect_header(const std::vector<std::string>& names) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(name_, 1, "missing header");
    ++line_no_;
    strip_cr(line);
    const auto got = split(line);
    if (got != names) throw ParseError(name_, 1, "unexpected header: " + line);
  }

  /// Reads the header without validating it; returns the column names.
  std::vector<std::string> read_header() {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(name_, 1, "missing header");
    ++line_no_;
    strip_cr(line);
    return split(line);
  }

  /// Next row as doubles; std::nullopt at end of file.
  std::optional<std::vector<double>> next_row(std::size_t n_cols) {
    auto cells = next_cells();
    if (!cells) return std::nullopt;
    if (cells->size() != n_cols)
      throw ParseError(name_, line_no_, "expected " + std::to_string(n_cols) +
                                            " columns, got " +
                                            std::to_string(cells->size()));
    std::vector<double> vals(n_cols);
    for (std::size_t i = 0; i < n_cols; ++i) {
      try {
        vals[i] = std::stod((*cells)[i]);
      } catch (const std::exception&) {
        throw ParseError(name_, line_no_, "bad number: '" + (*cells)[i] + "'");
      }
    }
    return vals;
  }

  std::optional<std::vector<std::string>> next_cells() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      return split(line);
    }
    return std::nullopt;
  }

  long line_number() const { return line_no_; }
  const std::string& file_name() const { return name_; }

 private:
  static void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }

  std::ifstream in_;
  std::string name_;
  long line_no_ = 0;
};

}  // namespace plumeinv

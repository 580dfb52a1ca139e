#pragma once

#include <stdexcept>
#include <string>

namespace plumeinv {

/// Bad configuration: unknown scheme/class, infeasible scenario values,
/// malformed config documents.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. Message carries file name and line number.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
  ParseError(const std::string& file, long line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

}  // namespace plumeinv

#pragma once

#include <stdexcept>
#include <string>

namespace tdem {

/// Base class for failures that map onto a process exit code.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Invalid configuration. `path` names the offending schema field, e.g. `target.radius_m`.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what, 2), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed or unusable input data (CSV rows, gate ranges).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, 3) {}
};

/// Root-bracket exhaustion, eigensolver failure, non-overlapping model supports.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 4) {}
};

}  // namespace tdem

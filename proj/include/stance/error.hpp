#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stance {

// Base of every error raised by the library. `kind()` is a short, stable,
// machine-parsable class name used by the CLI as an error prefix.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const noexcept { return "error"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "shape_error"; }
};

// Non-finite value produced in a forward or backward pass.
class NumericError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "numeric_error"; }
};

class LookupError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "lookup_error"; }
};

// Malformed input data: datasets, lexicons, configs.
class DataError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "data_error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "config_error"; }
};

// Binary file problems (embedding store, checkpoints).
class FormatError : public Error {
 public:
  enum class Code { kBadMagic, kVersionMismatch, kTruncated, kDimensionConflict, kTrailingData, kIo };

  FormatError(Code code, const std::string& what) : Error(what), code_(code) {}

  Code code() const noexcept { return code_; }
  std::string_view kind() const noexcept override {
    switch (code_) {
      case Code::kBadMagic: return "bad_magic";
      case Code::kVersionMismatch: return "version_mismatch";
      case Code::kTruncated: return "truncated_file";
      case Code::kDimensionConflict: return "dimension_conflict";
      case Code::kTrailingData: return "trailing_data";
      case Code::kIo: return "io_error";
    }
    return "format_error";
  }

 private:
  Code code_;
};

}  // namespace stance

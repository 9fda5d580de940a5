#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace ctxgeo {

/// Broad error classes. The numeric values double as CLI exit codes.
enum class ErrorCategory : int {
  usage = 1,
  format = 2,
  insufficient_data = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Precondition violated by the caller (bad flag, bad synth spec, kind mismatch).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

class IoError : public Error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : Error(ErrorCategory::io, path.string() + ": " + what), path_(path) {}

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

enum class FormatErrorKind {
  missing_file,
  truncated_payload,
  oversized_payload,
  schema,
  dimension_mismatch,
};

const char* to_string(FormatErrorKind kind) noexcept;

/// Malformed embedding dump. Always names the offending file.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::filesystem::path& file, const std::string& detail);

  FormatErrorKind kind() const noexcept { return kind_; }
  const std::filesystem::path& file() const noexcept { return file_; }

 private:
  FormatErrorKind kind_;
  std::filesystem::path file_;
};

/// Malformed text input (vector tables, benchmark data). line is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& detail);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Not enough occurrences, sentences, pairs or in-vocabulary items.
class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : Error(ErrorCategory::insufficient_data, what) {}
};

/// A correlation with a constant side.
class UndefinedCorrelationError : public InsufficientDataError {
 public:
  using InsufficientDataError::InsufficientDataError;
};

/// Zero-norm vector, zero sentence mean, all-zero matrix.
class DegenerateError : public InsufficientDataError {
 public:
  using InsufficientDataError::InsufficientDataError;
};

class EligibilityError : public InsufficientDataError {
 public:
  using InsufficientDataError::InsufficientDataError;
};

}  // namespace ctxgeo

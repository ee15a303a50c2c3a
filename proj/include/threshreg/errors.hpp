#pragma once

#include <stdexcept>
#include <string>

namespace threshreg {

// Linear predictor pushed b(.) or b'(.) outside the representable range.
struct DomainOverflowError : std::runtime_error {
  explicit DomainOverflowError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Response values outside the support of the requested family.
struct ResponseSupportError : std::invalid_argument {
  explicit ResponseSupportError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct CsvError : std::runtime_error {
  CsvError(const std::string& msg, int row_, int column_)
      : std::runtime_error(msg), row(row_), column(column_) {}
  int row;     // 1-based data row, 0 for header/file-level problems
  int column;  // 1-based column, 0 when not column specific
};

// Logistic likelihood unbounded along a separating direction.
struct SeparationError : std::runtime_error {
  explicit SeparationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RankError : std::runtime_error {
  explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};

// Enumeration / budget guards for the exhaustive reference routines.
struct GuardError : std::invalid_argument {
  explicit GuardError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace threshreg

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace occmap {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Distance too small for the closed-form density cases (arctangent
/// denominators are not positive). Callers saturate the weight instead.
class DensityDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed binary input; carries the byte offset of the first bad record.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parsed value violates a structural invariant (e.g. non-orthonormal rotation).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, double deviation)
      : std::runtime_error(what), deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace occmap

#pragma once

#include <stdexcept>
#include <string>

namespace fedsynth {

enum class ErrorCategory {
  kFormat,       // malformed input file
  kParse,        // malformed CSV / flag value
  kConfig,       // inconsistent configuration
  kIo,           // file cannot be opened or written
  kCalibration,  // privacy target unreachable
  kAccounting,   // accountant cannot evaluate (overflow, inconsistency)
  kContract,     // precondition violated by a caller
};

const char* category_name(ErrorCategory category) noexcept;

/// Base for every error the library raises. The category drives the CLI exit
/// code and the machine-readable "error: <category>: <detail>" line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& detail);
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& d) : Error(ErrorCategory::kFormat, d) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& d) : Error(ErrorCategory::kParse, d) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& d) : Error(ErrorCategory::kConfig, d) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& d) : Error(ErrorCategory::kIo, d) {}
};

class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& d)
      : Error(ErrorCategory::kCalibration, d) {}
};

class AccountingError : public Error {
 public:
  explicit AccountingError(const std::string& d)
      : Error(ErrorCategory::kAccounting, d) {}
};

/// Raised when e^{(i-1)ε(i)} leaves the double range: the Rényi order is too
/// large for the given noise.
class AccountingOverflow : public AccountingError {
 public:
  explicit AccountingOverflow(const std::string& d) : AccountingError(d) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& d) : Error(ErrorCategory::kContract, d) {}
};

/// Rethrows `e` as the same error type with `context` prepended to the
/// detail, e.g. "mode=fed-cape client=3: ...".
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace fedsynth

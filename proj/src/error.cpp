#include "fedsynth/error.hpp"

namespace fedsynth {

const char* category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kCalibration: return "calibration";
    case ErrorCategory::kAccounting: return "accounting";
    case ErrorCategory::kContract: return "contract";
  }
  return "unknown";
}

Error::Error(ErrorCategory category, const std::string& detail)
    : std::runtime_error(detail), category_(category) {}

void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string detail = context + ": " + e.what();
  if (dynamic_cast<const AccountingOverflow*>(&e)) throw AccountingOverflow(detail);
  switch (e.category()) {
    case ErrorCategory::kFormat: throw FormatError(detail);
    case ErrorCategory::kParse: throw ParseError(detail);
    case ErrorCategory::kConfig: throw ConfigError(detail);
    case ErrorCategory::kIo: throw IoError(detail);
    case ErrorCategory::kCalibration: throw CalibrationError(detail);
    case ErrorCategory::kAccounting: throw AccountingError(detail);
    case ErrorCategory::kContract: throw ContractError(detail);
  }
  throw Error(e.category(), detail);
}

}  // namespace fedsynth

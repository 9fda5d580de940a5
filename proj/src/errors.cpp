#include "ctxgeo/errors.hpp"

namespace ctxgeo {

const char* to_string(FormatErrorKind kind) noexcept {
  switch (kind) {
    case FormatErrorKind::missing_file:
      return "missing file";
    case FormatErrorKind::truncated_payload:
      return "truncated payload";
    case FormatErrorKind::oversized_payload:
      return "oversized payload";
    case FormatErrorKind::schema:
      return "schema violation";
    case FormatErrorKind::dimension_mismatch:
      return "dimension mismatch";
  }
  return "format error";
}

FormatError::FormatError(FormatErrorKind kind, const std::filesystem::path& file,
                         const std::string& detail)
    : Error(ErrorCategory::format,
            file.string() + ": " + to_string(kind) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      file_(file) {}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& detail)
    : Error(ErrorCategory::format, source + ":" + std::to_string(line) + ": " + detail),
      line_(line) {}

}  // namespace ctxgeo

#include "refineflow/diagnostics.hpp"

#include <utility>

namespace refineflow {

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::kError:
      return "error";
    case Severity::kWarning:
      return "warning";
    case Severity::kInfo:
      return "info";
  }
  return "info";
}

std::string format_diagnostic(const Diagnostic& diagnostic) {
  std::string line{to_string(diagnostic.severity)};
  line += ' ';
  line += diagnostic.code;
  line += ' ';
  line += diagnostic.step_index ? std::to_string(*diagnostic.step_index) : "-";
  line += ' ';
  line += diagnostic.message;
  return line;
}

Error::Error(std::string code, std::string message,
             std::optional<std::size_t> step_index)
    : std::runtime_error(std::move(message)),
      code_(std::move(code)),
      step_index_(step_index) {}

Diagnostic Error::to_diagnostic() const {
  return Diagnostic{Severity::kError, step_index_, what(), code_};
}

}  // namespace refineflow

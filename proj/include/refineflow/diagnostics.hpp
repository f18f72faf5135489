#ifndef REFINEFLOW_DIAGNOSTICS_HPP_
#define REFINEFLOW_DIAGNOSTICS_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace refineflow {

enum class Severity { kError, kWarning, kInfo };

std::string_view to_string(Severity severity);

// A finding about one recipe step (or the recipe as a whole when step_index
// is empty). Errors are reserved for conditions that stop model construction.
struct Diagnostic {
  Severity severity = Severity::kInfo;
  std::optional<std::size_t> step_index;
  std::string message;
  std::string code;

  bool operator==(const Diagnostic&) const = default;
};

// Renders "severity code step message", with "-" when there is no step.
std::string format_diagnostic(const Diagnostic& diagnostic);

// Thrown by every module for conditions that prevent building a model.
// code() is one of the short stable identifiers (e.g. "unresolved-column").
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string message,
        std::optional<std::size_t> step_index = std::nullopt);

  const std::string& code() const noexcept { return code_; }
  std::optional<std::size_t> step_index() const noexcept { return step_index_; }

  Diagnostic to_diagnostic() const;

 private:
  std::string code_;
  std::optional<std::size_t> step_index_;
};

}  // namespace refineflow

#endif  // REFINEFLOW_DIAGNOSTICS_HPP_

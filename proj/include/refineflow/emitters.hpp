#ifndef REFINEFLOW_EMITTERS_HPP_
#define REFINEFLOW_EMITTERS_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "refineflow/graph_model.hpp"

namespace refineflow {

// combined: every node; process: steps and summaries only; data: data nodes
// only, edges labelled with the deriving step.
enum class ViewKind { kCombined, kProcess, kData };

std::string_view to_string(ViewKind view);
std::optional<ViewKind> parse_view(std::string_view text);

inline constexpr std::string_view kStepColor = "#CCFFCC";
inline constexpr std::string_view kDataColor = "#FAFAD2";
inline constexpr std::string_view kParamColor = "#FFFFFF";

// Non-alphanumeric code points become '_'.
std::string sanitize_identifier(std::string_view text);

// Graphviz DOT digraph. Components of parallel and collapsed models are
// wrapped in clusters. Byte-deterministic for a given model and view.
std::string emit_dot(const WorkflowModel& model, ViewKind view);

// YesWorkflow comment annotations: an outer @begin/@end block holding one
// block per step with its @in, @param (combined view only) and @out lines.
std::string emit_yw(const WorkflowModel& model, ViewKind view);

}  // namespace refineflow

#endif  // REFINEFLOW_EMITTERS_HPP_

#ifndef REFINEFLOW_GRAPH_MODEL_HPP_
#define REFINEFLOW_GRAPH_MODEL_HPP_

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "refineflow/effects.hpp"
#include "refineflow/recipe.hpp"

namespace refineflow {

enum class NodeKind { kStep, kDataTable, kDataColumn, kParam, kSummary };
enum class ModelKind { kLinear, kParallel, kCollapsed };

std::string_view to_string(NodeKind kind);
std::string_view to_string(ModelKind kind);

bool is_data(NodeKind kind);
// step or summary
bool is_process(NodeKind kind);

// Payload keys used by the builders.
namespace payload {
inline constexpr std::string_view kOp = "op";
inline constexpr std::string_view kPattern = "pattern";  // "split" | "merge"
inline constexpr std::string_view kComponent = "component";
inline constexpr std::string_view kCount = "count";
inline constexpr std::string_view kFirstStep = "first_step";
inline constexpr std::string_view kLastStep = "last_step";
inline constexpr std::string_view kColumn = "column";
inline constexpr std::string_view kVersion = "version";
inline constexpr std::string_view kParamKey = "key";
}  // namespace payload

struct Node {
  NodeKind kind = NodeKind::kStep;
  std::string id;
  std::string label;
  std::optional<std::size_t> step_index;
  std::map<std::string, std::string, std::less<>> payload;

  std::optional<std::string> get(std::string_view key) const;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string from;
  std::string to;
  std::optional<std::string> label;

  auto operator<=>(const Edge&) const = default;
};

// A workflow graph. edges carry dataflow (data -> step -> data) and parameter
// (param -> step) links; step_dependencies is the transitively reduced
// step-to-step ordering used by the process view. components partitions the
// step and summary node ids into independent subworkflows.
struct WorkflowModel {
  std::string name = "workflow";
  ModelKind model_kind = ModelKind::kLinear;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<Edge> step_dependencies;
  std::vector<std::vector<std::string>> components;

  const Node* find(std::string_view id) const;
  std::size_t count(NodeKind kind) const;
  std::vector<const Node*> process_nodes() const;

  bool operator==(const WorkflowModel&) const = default;
};

struct DetailModel {
  std::string parent_summary_id;
  WorkflowModel inner;
};

struct CollapsedModel {
  WorkflowModel model;
  std::vector<DetailModel> details;
};

using StepPair = std::pair<std::size_t, std::size_t>;

// True when the two effects may run in either order: neither one's outputs
// meet the other's inputs or outputs, neither rebinds a column name the other
// touches, and neither is table-scoped.
bool commutes(const ColumnEffect& a, const ColumnEffect& b);

// Every pair (i, j), i < j, whose effects do not commute.
std::set<StepPair> dependency_edges(const Recipe& recipe,
                                    const std::vector<ColumnEffect>& effects);

// Keeps (i, j) only when no other path leads from i to j. Nodes are 0..n-1 and
// every pair must point forward.
std::set<StepPair> transitive_reduction(std::size_t n, const std::set<StepPair>& pairs);

// Weakly connected groups of 0..n-1, each sorted, ordered by smallest member.
std::vector<std::vector<std::size_t>> weak_components(std::size_t n,
                                                      const std::set<StepPair>& pairs);

std::string step_node_id(std::size_t position);  // "step_<position + 1>"
std::string table_node_id(std::size_t position);  // "table_<position>"

WorkflowModel build_linear(const Recipe& recipe, const std::vector<SchemaState>& schemas);

WorkflowModel build_parallel(const Recipe& recipe, const std::vector<ColumnEffect>& effects,
                             const std::vector<SchemaState>& schemas);

inline constexpr int kDefaultCollapseThreshold = 3;

// Throws Error("invalid-threshold") for threshold < 2.
CollapsedModel build_collapsed(const Recipe& recipe, const std::vector<ColumnEffect>& effects,
                               const std::vector<SchemaState>& schemas,
                               int threshold = kDefaultCollapseThreshold);

// Induced subgraph on node_id and all its ancestors (resp. descendants) along
// dataflow and parameter edges. Throws Error("unknown-node").
WorkflowModel upstream_lineage(const WorkflowModel& model, std::string_view node_id);
WorkflowModel downstream_impact(const WorkflowModel& model, std::string_view node_id);

// Checks the structural invariants (unique ids, edge endpoints, acyclicity).
// Returns a description of the first violation, or nullopt.
std::optional<std::string> check_model(const WorkflowModel& model);

}  // namespace refineflow

#endif  // REFINEFLOW_GRAPH_MODEL_HPP_

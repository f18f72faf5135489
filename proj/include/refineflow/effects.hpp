#ifndef REFINEFLOW_EFFECTS_HPP_
#define REFINEFLOW_EFFECTS_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "refineflow/diagnostics.hpp"
#include "refineflow/recipe.hpp"

namespace refineflow {

// Stable identity of a column across renames. Never reused within a trace.
struct ColumnId {
  std::uint32_t value = 0;

  auto operator<=>(const ColumnId&) const = default;
};

struct Column {
  ColumnId id;
  std::string label;

  bool operator==(const Column&) const = default;
};

// The schema of one table snapshot, in left-to-right order. next_id is the
// first id not yet handed out in this trace.
struct SchemaState {
  std::vector<Column> columns;
  std::uint32_t next_id = 0;

  // Ids 0..n-1 assigned in the given order.
  static SchemaState from_labels(const std::vector<std::string>& labels);

  const Column* find(std::string_view label) const;
  const Column* find(ColumnId id) const;
  std::optional<std::size_t> position_of(ColumnId id) const;
  std::set<ColumnId> ids() const;
  std::vector<std::string> labels() const;
  std::size_t size() const { return columns.size(); }

  bool operator==(const SchemaState&) const = default;
};

// Column-level effect of one step. reads are the step's input columns;
// writes, creates and deletes together are its output columns.
//
// The label sets record which column names the step resolves (labels_used),
// introduces (labels_bound) and frees (labels_released). Reordering two steps
// is only safe when neither rebinds a name the other touches.
struct ColumnEffect {
  std::set<ColumnId> reads;
  std::set<ColumnId> writes;
  std::vector<Column> creates;
  std::set<ColumnId> deletes;
  std::map<ColumnId, std::string> renames;
  bool table_scoped = false;

  // creates are inserted immediately right of this column (appended if empty)
  std::optional<ColumnId> insert_after;
  // when non-empty, the full left-to-right order after the step
  std::vector<ColumnId> new_order;

  std::set<std::string> labels_used;
  std::set<std::string> labels_bound;
  std::set<std::string> labels_released;

  std::vector<Diagnostic> diagnostics;

  // writes ∪ creates ∪ deletes
  std::set<ColumnId> outputs() const;
  std::set<ColumnId> created_ids() const;

  bool operator==(const ColumnEffect&) const = default;
};

struct EffectOptions {
  static constexpr int kDefaultSplitArity = 2;

  // Part count per split column label, for splits whose arity depends on data.
  std::map<std::string, int> split_arity;
};

// Static description of one catalog entry.
struct OperationInfo {
  std::string_view op_id;
  std::string_view reads;
  std::string_view writes;
  std::string_view creates;
  std::string_view deletes;
  bool table_scoped = false;
  // parameter keys consulted by effect analysis or execution
  std::vector<std::string_view> consumed_keys;
};

const std::vector<OperationInfo>& operation_catalog();
const OperationInfo* find_operation(std::string_view op_id);

// Markdown reference table, one row per catalog op id.
std::string catalog_reference();

// Part count a column-split produces; also reports whether the default was
// used because neither params nor options fix it.
struct SplitArity {
  int parts = EffectOptions::kDefaultSplitArity;
  bool defaulted = false;
};
SplitArity split_arity(const RawOperation& op, std::string_view column_label,
                       const EffectOptions& options);

// Throws Error("unresolved-column") when a referenced label is not live, and
// Error("missing-param") when a required parameter is absent.
ColumnEffect effect_of(const RawOperation& op, const SchemaState& schema,
                       const EffectOptions& options = {});

// Throws Error("label-collision") when the result would repeat a label.
SchemaState apply_effect(const SchemaState& schema, const ColumnEffect& effect,
                         std::optional<std::size_t> step_index = std::nullopt);

struct Trace {
  std::vector<SchemaState> states;  // n + 1 entries
  std::vector<ColumnEffect> effects;
  std::vector<Diagnostic> diagnostics;
};

Trace trace_recipe(const Recipe& recipe, const SchemaState& initial,
                   const EffectOptions& options = {});

std::vector<SchemaState> trace_schema(const Recipe& recipe,
                                      const SchemaState& initial,
                                      const EffectOptions& options = {});

// Labels an operation looks up in the schema before it runs (parameters and
// statically visible expression references).
std::vector<std::string> referenced_labels(const RawOperation& op);

// Minimal source schema: every label that is read before any step creates it,
// in first-mention order.
SchemaState infer_initial_schema(const Recipe& recipe,
                                 const EffectOptions& options = {});

}  // namespace refineflow

#endif  // REFINEFLOW_EFFECTS_HPP_

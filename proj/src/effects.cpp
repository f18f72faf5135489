#include "refineflow/effects.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "refineflow/grel.hpp"

namespace refineflow {

namespace {

constexpr std::string_view kTextTransform = "core/text-transform";
constexpr std::string_view kMassEdit = "core/mass-edit";
constexpr std::string_view kColumnRename = "core/column-rename";
constexpr std::string_view kColumnRemoval = "core/column-removal";
constexpr std::string_view kColumnSplit = "core/column-split";
constexpr std::string_view kColumnAddition = "core/column-addition";
constexpr std::string_view kColumnMove = "core/column-move";
constexpr std::string_view kColumnReorder = "core/column-reorder";
constexpr std::string_view kFillDown = "core/fill-down";
constexpr std::string_view kBlankDown = "core/blank-down";

std::string required_string(const RawOperation& op, std::string_view key) {
  auto value = op.string_param(key);
  if (!value) {
    throw Error("missing-param",
                "operation " + op.op_id + " lacks string parameter '" +
                    std::string(key) + "'",
                op.index);
  }
  return *value;
}

class EffectBuilder {
 public:
  EffectBuilder(const RawOperation& op, const SchemaState& schema)
      : op_(op), schema_(schema) {}

  const Column& resolve(const std::string& label) {
    const Column* column = schema_.find(label);
    if (column == nullptr) {
      throw Error("unresolved-column",
                  "column '" + label + "' is not live before step " +
                      std::to_string(op_.index),
                  op_.index);
    }
    effect_.labels_used.insert(column->label);
    return *column;
  }

  void read(const Column& column) { effect_.reads.insert(column.id); }
  void write(const Column& column) { effect_.writes.insert(column.id); }

  void read_all() {
    for (const Column& column : schema_.columns) {
      effect_.reads.insert(column.id);
      effect_.labels_used.insert(column.label);
    }
  }

  void table_scoped() {
    effect_.table_scoped = true;
    read_all();
    for (const Column& column : schema_.columns) effect_.writes.insert(column.id);
  }

  // Adds the expression's read set; opaque expressions read everything.
  void read_expression(const std::string& expression, const Column& own) {
    auto analysis = grel::analyze_expression(expression, own.label);
    if (analysis.opaque) {
      read_all();
      return;
    }
    for (const std::string& label : analysis.referenced_columns) {
      read(resolve(label));
    }
  }

  void create(std::string label) {
    const ColumnId id{schema_.next_id + static_cast<std::uint32_t>(effect_.creates.size())};
    effect_.labels_bound.insert(label);
    effect_.creates.push_back(Column{id, std::move(label)});
  }

  void remove(const Column& column) {
    effect_.deletes.insert(column.id);
    effect_.labels_released.insert(column.label);
  }

  void rename(const Column& column, std::string label) {
    effect_.labels_released.insert(column.label);
    effect_.labels_bound.insert(label);
    effect_.renames[column.id] = std::move(label);
  }

  ColumnEffect& effect() { return effect_; }
  ColumnEffect take() { return std::move(effect_); }

 private:
  const RawOperation& op_;
  const SchemaState& schema_;
  ColumnEffect effect_;
};

std::string expression_or_identity(const RawOperation& op) {
  return op.string_param("expression").value_or("value");
}

// Columns named by facets in engineConfig; they select the rows a step touches.
std::vector<std::string> facet_columns(const RawOperation& op) {
  std::vector<std::string> labels;
  auto config = op.params.find("engineConfig");
  if (config == op.params.end() || !config->is_object()) return labels;
  auto facets = config->find("facets");
  if (facets == config->end() || !facets->is_array()) return labels;
  for (const Json& facet : *facets) {
    if (!facet.is_object()) continue;
    auto name = facet.find("columnName");
    if (name != facet.end() && name->is_string() && !name->get<std::string>().empty()) {
      labels.push_back(name->get<std::string>());
    }
  }
  return labels;
}

bool row_filtered(std::string_view op_id) {
  return op_id == kTextTransform || op_id == kMassEdit || op_id == kColumnSplit ||
         op_id == kColumnAddition || op_id == kFillDown || op_id == kBlankDown;
}

}  // namespace

SchemaState SchemaState::from_labels(const std::vector<std::string>& labels) {
  SchemaState state;
  for (const std::string& label : labels) {
    state.columns.push_back(Column{ColumnId{state.next_id++}, label});
  }
  return state;
}

const Column* SchemaState::find(std::string_view label) const {
  auto it = std::find_if(columns.begin(), columns.end(),
                         [&](const Column& c) { return c.label == label; });
  return it == columns.end() ? nullptr : &*it;
}

const Column* SchemaState::find(ColumnId id) const {
  auto it = std::find_if(columns.begin(), columns.end(),
                         [&](const Column& c) { return c.id == id; });
  return it == columns.end() ? nullptr : &*it;
}

std::optional<std::size_t> SchemaState::position_of(ColumnId id) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].id == id) return i;
  }
  return std::nullopt;
}

std::set<ColumnId> SchemaState::ids() const {
  std::set<ColumnId> out;
  for (const Column& c : columns) out.insert(c.id);
  return out;
}

std::vector<std::string> SchemaState::labels() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const Column& c : columns) out.push_back(c.label);
  return out;
}

std::set<ColumnId> ColumnEffect::outputs() const {
  std::set<ColumnId> out = writes;
  out.insert(deletes.begin(), deletes.end());
  for (const Column& c : creates) out.insert(c.id);
  return out;
}

std::set<ColumnId> ColumnEffect::created_ids() const {
  std::set<ColumnId> out;
  for (const Column& c : creates) out.insert(c.id);
  return out;
}

const std::vector<OperationInfo>& operation_catalog() {
  static const std::vector<OperationInfo> catalog = {
      {kTextTransform, "own column + expression references (all columns if opaque)",
       "own column", "", "", false,
       {"columnName", "expression", "onError", "repeat", "repeatCount", "engineConfig"}},
      {kMassEdit, "own column + expression references", "own column", "", "", false,
       {"columnName", "expression", "edits", "engineConfig"}},
      {kColumnRename, "old column", "old column (relabelled)", "", "", false,
       {"oldColumnName", "newColumnName"}},
      {kColumnRemoval, "removed column", "", "", "removed column", false, {"columnName"}},
      {kColumnSplit, "split column", "", "\"<col> 1\" .. \"<col> k\"",
       "split column if removeOriginalColumn", false,
       {"columnName", "removeOriginalColumn", "mode", "separator", "regex", "maxColumns",
        "fieldLengths", "engineConfig"}},
      {kColumnAddition, "base column + expression references", "", "new column", "", false,
       {"baseColumnName", "expression", "newColumnName", "onError", "engineConfig"}},
      {kColumnMove, "moved column", "moved column", "", "", false, {"columnName", "index"}},
      {kColumnReorder, "listed columns", "listed columns", "", "unlisted columns", false,
       {"columnNames"}},
      {kFillDown, "own column", "own column", "", "", false, {"columnName", "engineConfig"}},
      {kBlankDown, "own column", "own column", "", "", false, {"columnName", "engineConfig"}},
      {"core/row-removal", "all columns", "all columns", "", "", true, {}},
      {"core/row-reorder", "all columns", "all columns", "", "", true, {}},
      {"core/row-star", "all columns", "all columns", "", "", true, {}},
      {"core/row-flag", "all columns", "all columns", "", "", true, {}},
  };
  return catalog;
}

const OperationInfo* find_operation(std::string_view op_id) {
  const auto& catalog = operation_catalog();
  auto it = std::find_if(catalog.begin(), catalog.end(),
                         [&](const OperationInfo& info) { return info.op_id == op_id; });
  return it == catalog.end() ? nullptr : &*it;
}

std::string catalog_reference() {
  std::ostringstream out;
  out << "# Operation catalog\n\n"
      << "Column effects assumed for each OpenRefine operation id. Any id not listed\n"
      << "here is treated as table-scoped (reads and writes every live column).\n"
      << "Row-filtered operations also read every column named by a facet in\n"
      << "engineConfig.\n\n"
      << "| op_id | reads | writes | creates | deletes | table_scoped |\n"
      << "|---|---|---|---|---|---|\n";
  auto cell = [](std::string_view text) { return text.empty() ? std::string("-") : std::string(text); };
  for (const OperationInfo& info : operation_catalog()) {
    out << "| `" << info.op_id << "` | " << cell(info.reads) << " | " << cell(info.writes)
        << " | " << cell(info.creates) << " | " << cell(info.deletes) << " | "
        << (info.table_scoped ? "yes" : "no") << " |\n";
  }
  out << "| *(unknown)* | all columns | all columns | - | - | yes |\n";
  return out.str();
}

SplitArity split_arity(const RawOperation& op, std::string_view column_label,
                       const EffectOptions& options) {
  if (auto it = options.split_arity.find(std::string(column_label));
      it != options.split_arity.end()) {
    return {it->second, false};
  }
  const std::string mode = op.string_param("mode").value_or("separator");
  if (mode == "lengths") {
    auto lengths = op.params.find("fieldLengths");
    if (lengths != op.params.end() && lengths->is_array() && !lengths->empty()) {
      return {static_cast<int>(lengths->size()), false};
    }
  } else {
    auto max_columns = op.params.find("maxColumns");
    if (max_columns != op.params.end() && max_columns->is_number_integer() &&
        max_columns->get<int>() > 0) {
      return {max_columns->get<int>(), false};
    }
  }
  return {EffectOptions::kDefaultSplitArity, true};
}

ColumnEffect effect_of(const RawOperation& op, const SchemaState& schema,
                       const EffectOptions& options) {
  EffectBuilder b(op, schema);
  const std::string_view id = op.op_id;

  if (id == kTextTransform || id == kMassEdit) {
    const Column& own = b.resolve(required_string(op, "columnName"));
    b.read(own);
    b.write(own);
    b.read_expression(expression_or_identity(op), own);
  } else if (id == kColumnRename) {
    const Column& old = b.resolve(required_string(op, "oldColumnName"));
    b.read(old);
    b.write(old);
    b.rename(old, required_string(op, "newColumnName"));
  } else if (id == kColumnRemoval) {
    const Column& column = b.resolve(required_string(op, "columnName"));
    b.read(column);
    b.remove(column);
  } else if (id == kColumnSplit) {
    const Column& column = b.resolve(required_string(op, "columnName"));
    b.read(column);
    const SplitArity arity = split_arity(op, column.label, options);
    if (arity.defaulted) {
      b.effect().diagnostics.push_back(
          {Severity::kWarning, op.index,
           "split of '" + column.label + "' has data-dependent arity; assuming " +
               std::to_string(arity.parts) + " parts (override with --split-arity)",
           "split-arity-default"});
    }
    for (int part = 1; part <= arity.parts; ++part) {
      b.create(column.label + " " + std::to_string(part));
    }
    b.effect().insert_after = column.id;
    auto remove = op.params.find("removeOriginalColumn");
    if (remove != op.params.end() && remove->is_boolean() && remove->get<bool>()) {
      b.remove(column);
    }
  } else if (id == kColumnAddition) {
    const Column& base = b.resolve(required_string(op, "baseColumnName"));
    b.read(base);
    b.read_expression(expression_or_identity(op), base);
    b.create(required_string(op, "newColumnName"));
    b.effect().insert_after = base.id;
  } else if (id == kColumnMove) {
    const Column& column = b.resolve(required_string(op, "columnName"));
    b.read(column);
    b.write(column);
    std::vector<ColumnId> order;
    for (const Column& c : schema.columns) {
      if (c.id != column.id) order.push_back(c.id);
    }
    std::size_t index = order.size();
    auto idx = op.params.find("index");
    if (idx != op.params.end() && idx->is_number_integer() && idx->get<long long>() >= 0) {
      index = std::min(order.size(), static_cast<std::size_t>(idx->get<long long>()));
    }
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(index), column.id);
    b.effect().new_order = std::move(order);
  } else if (id == kColumnReorder) {
    auto names = op.params.find("columnNames");
    if (names == op.params.end() || !names->is_array()) {
      throw Error("missing-param",
                  "operation " + op.op_id + " lacks array parameter 'columnNames'", op.index);
    }
    std::vector<ColumnId> order;
    for (const Json& name : *names) {
      if (!name.is_string()) continue;
      const Column& column = b.resolve(name.get<std::string>());
      if (std::find(order.begin(), order.end(), column.id) != order.end()) continue;
      b.read(column);
      b.write(column);
      order.push_back(column.id);
    }
    for (const Column& c : schema.columns) {
      if (std::find(order.begin(), order.end(), c.id) == order.end()) b.remove(c);
    }
    b.effect().new_order = std::move(order);
  } else if (id == kFillDown || id == kBlankDown) {
    const Column& column = b.resolve(required_string(op, "columnName"));
    b.read(column);
    b.write(column);
  } else {
    // row-structure operations and unknown ids
    b.table_scoped();
  }
  if (row_filtered(id)) {
    for (const std::string& label : facet_columns(op)) b.read(b.resolve(label));
  }
  return b.take();
}

SchemaState apply_effect(const SchemaState& schema, const ColumnEffect& effect,
                         std::optional<std::size_t> step_index) {
  SchemaState next = schema;
  for (const auto& [id, label] : effect.renames) {
    for (Column& c : next.columns) {
      if (c.id == id) c.label = label;
    }
  }
  if (!effect.creates.empty()) {
    auto at = next.columns.end();
    if (effect.insert_after) {
      auto anchor = std::find_if(next.columns.begin(), next.columns.end(),
                                 [&](const Column& c) { return c.id == *effect.insert_after; });
      if (anchor != next.columns.end()) at = anchor + 1;
    }
    next.columns.insert(at, effect.creates.begin(), effect.creates.end());
    for (const Column& c : effect.creates) {
      next.next_id = std::max(next.next_id, c.id.value + 1);
    }
  }
  std::erase_if(next.columns, [&](const Column& c) { return effect.deletes.count(c.id) > 0; });
  if (!effect.new_order.empty()) {
    std::vector<Column> ordered;
    for (ColumnId id : effect.new_order) {
      if (const Column* c = next.find(id)) ordered.push_back(*c);
    }
    for (const Column& c : next.columns) {
      if (std::find(effect.new_order.begin(), effect.new_order.end(), c.id) ==
          effect.new_order.end()) {
        ordered.push_back(c);
      }
    }
    next.columns = std::move(ordered);
  }
  std::set<std::string_view> seen;
  for (const Column& c : next.columns) {
    if (!seen.insert(c.label).second) {
      throw Error("label-collision", "column label '" + c.label + "' would appear twice",
                  step_index);
    }
  }
  return next;
}

Trace trace_recipe(const Recipe& recipe, const SchemaState& initial,
                   const EffectOptions& options) {
  Trace trace;
  trace.states.reserve(recipe.size() + 1);
  trace.effects.reserve(recipe.size());
  trace.states.push_back(initial);
  for (const RawOperation& op : recipe.operations) {
    ColumnEffect effect = effect_of(op, trace.states.back(), options);
    trace.diagnostics.insert(trace.diagnostics.end(), effect.diagnostics.begin(),
                             effect.diagnostics.end());
    trace.states.push_back(apply_effect(trace.states.back(), effect, op.index));
    trace.effects.push_back(std::move(effect));
  }
  return trace;
}

std::vector<SchemaState> trace_schema(const Recipe& recipe, const SchemaState& initial,
                                      const EffectOptions& options) {
  return trace_recipe(recipe, initial, options).states;
}

std::vector<std::string> referenced_labels(const RawOperation& op) {
  std::vector<std::string> labels;
  auto add = [&](std::optional<std::string> label) {
    if (label && std::find(labels.begin(), labels.end(), *label) == labels.end()) {
      labels.push_back(std::move(*label));
    }
  };
  auto add_expression = [&] {
    auto analysis = grel::analyze_expression(expression_or_identity(op), "");
    for (const std::string& label : analysis.referenced_columns) add(label);
  };
  const std::string_view id = op.op_id;
  if (id == kTextTransform || id == kMassEdit) {
    add(op.string_param("columnName"));
    add_expression();
  } else if (id == kColumnRename) {
    add(op.string_param("oldColumnName"));
  } else if (id == kColumnAddition) {
    add(op.string_param("baseColumnName"));
    add_expression();
  } else if (id == kColumnReorder) {
    auto names = op.params.find("columnNames");
    if (names != op.params.end() && names->is_array()) {
      for (const Json& name : *names) {
        if (name.is_string()) add(name.get<std::string>());
      }
    }
  } else if (find_operation(id) != nullptr && !find_operation(id)->table_scoped) {
    add(op.string_param("columnName"));
  }
  if (row_filtered(id)) {
    for (const std::string& label : facet_columns(op)) add(label);
  }
  return labels;
}

SchemaState infer_initial_schema(const Recipe& recipe, const EffectOptions& options) {
  std::vector<std::string> initial;
  std::set<std::string> ever_live;
  SchemaState simulated;
  for (const RawOperation& op : recipe.operations) {
    for (const std::string& label : referenced_labels(op)) {
      if (simulated.find(label) == nullptr && ever_live.insert(label).second) {
        initial.push_back(label);
        simulated.columns.push_back(Column{ColumnId{simulated.next_id++}, label});
      }
    }
    try {
      simulated = apply_effect(simulated, effect_of(op, simulated, options), op.index);
    } catch (const Error&) {
      // the recipe is inconsistent from here on; trace_schema reports it
      break;
    }
    for (const Column& c : simulated.columns) ever_live.insert(c.label);
  }
  return SchemaState::from_labels(initial);
}

}  // namespace refineflow

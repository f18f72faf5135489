#include "refineflow/mini_engine.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "refineflow/graph_model.hpp"

namespace refineflow::engine {

namespace {

constexpr std::string_view kTextTransform = "core/text-transform";
constexpr std::string_view kMassEdit = "core/mass-edit";
constexpr std::string_view kColumnRename = "core/column-rename";
constexpr std::string_view kColumnRemoval = "core/column-removal";
constexpr std::string_view kColumnSplit = "core/column-split";
constexpr std::string_view kColumnAddition = "core/column-addition";
constexpr std::string_view kFillDown = "core/fill-down";
constexpr std::string_view kBlankDown = "core/blank-down";

std::string lowercase(std::string text) {
  for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return text;
}

std::string uppercase(std::string text) {
  for (char& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return text;
}

std::string trim(std::string_view text) {
  auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && space(text.front())) text.remove_prefix(1);
  while (!text.empty() && space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

std::string apply_method(grel::Method method, std::string text) {
  switch (method) {
    case grel::Method::kToLowercase: return lowercase(std::move(text));
    case grel::Method::kToUppercase: return uppercase(std::move(text));
    case grel::Method::kTrim: return trim(text);
    case grel::Method::kToNumber: return to_number_text(text);
    case grel::Method::kToString: return text;
  }
  return text;
}

std::string string_param_or(const RawOperation& op, std::string_view key, std::string fallback) {
  return op.string_param(key).value_or(std::move(fallback));
}

bool bool_param(const RawOperation& op, std::string_view key) {
  auto it = op.params.find(key);
  return it != op.params.end() && it->is_boolean() && it->get<bool>();
}

bool has_facets(const RawOperation& op) {
  auto config = op.params.find("engineConfig");
  if (config == op.params.end() || !config->is_object()) return false;
  auto facets = config->find("facets");
  return facets != config->end() && facets->is_array() && !facets->empty();
}

std::vector<int> field_lengths(const RawOperation& op) {
  std::vector<int> lengths;
  auto it = op.params.find("fieldLengths");
  if (it == op.params.end() || !it->is_array()) return lengths;
  for (const Json& n : *it) {
    if (n.is_number_integer()) lengths.push_back(n.get<int>());
  }
  return lengths;
}

// Number of columns a split produces, decided from the column label the step
// names and the recipe parameters alone.
int split_parts(const RawOperation& op, const EffectOptions& options) {
  const std::string column = string_param_or(op, "columnName", "");
  if (auto it = options.split_arity.find(column); it != options.split_arity.end()) {
    return it->second;
  }
  if (string_param_or(op, "mode", "separator") == "lengths") {
    const auto lengths = field_lengths(op);
    if (!lengths.empty()) return static_cast<int>(lengths.size());
  } else if (auto it = op.params.find("maxColumns");
             it != op.params.end() && it->is_number_integer() && it->get<int>() > 0) {
    return it->get<int>();
  }
  return EffectOptions::kDefaultSplitArity;
}

std::size_t created_columns(const RawOperation& op, const EffectOptions& options) {
  if (op.op_id == kColumnSplit) return static_cast<std::size_t>(split_parts(op, options));
  if (op.op_id == kColumnAddition) return 1;
  return 0;
}

std::vector<std::string> split_cell(const std::string& cell, const RawOperation& op,
                                    std::size_t parts) {
  std::vector<std::string> pieces;
  if (string_param_or(op, "mode", "separator") == "lengths") {
    std::size_t start = 0;
    for (int length : field_lengths(op)) {
      if (start >= cell.size()) break;
      const auto n = static_cast<std::size_t>(std::max(length, 0));
      pieces.push_back(cell.substr(start, n));
      start += n;
    }
  } else {
    const std::string separator = string_param_or(op, "separator", ",");
    std::size_t start = 0;
    while (true) {
      const std::size_t at = separator.empty() ? std::string::npos : cell.find(separator, start);
      if (at == std::string::npos) {
        pieces.push_back(cell.substr(start));
        break;
      }
      pieces.push_back(cell.substr(start, at - start));
      start = at + separator.size();
    }
  }
  pieces.resize(parts);
  return pieces;
}

class Executor {
 public:
  Executor(const Recipe& recipe, const Table& input, const EffectOptions& options)
      : recipe_(recipe), table_(input), options_(options) {
    // created column ids follow recipe order regardless of execution order
    std::uint32_t next = input.schema.next_id;
    for (const RawOperation& op : recipe.operations) {
      first_new_id_.push_back(next);
      next += static_cast<std::uint32_t>(created_columns(op, options));
    }
    final_next_id_ = next;
  }

  void run(std::size_t step) {
    const RawOperation& op = recipe_.operations[step];
    std::string why;
    if (!is_supported(op, &why)) {
      throw Error("unsupported-op", "step " + std::to_string(step) + " (" + op.op_id + "): " + why,
                  step);
    }
    step_ = step;
    if (op.op_id == kTextTransform) {
      text_transform(op);
    } else if (op.op_id == kMassEdit) {
      mass_edit(op);
    } else if (op.op_id == kColumnRename) {
      const std::size_t col = column(string_param_or(op, "oldColumnName", ""));
      table_.schema.columns[col].label = string_param_or(op, "newColumnName", "");
    } else if (op.op_id == kColumnRemoval) {
      remove_column(column(string_param_or(op, "columnName", "")));
    } else if (op.op_id == kColumnSplit) {
      split(op);
    } else if (op.op_id == kColumnAddition) {
      add_column(op);
    } else if (op.op_id == kFillDown) {
      fill_down(column(string_param_or(op, "columnName", "")));
    } else if (op.op_id == kBlankDown) {
      blank_down(column(string_param_or(op, "columnName", "")));
    }
    check_labels();
  }

  Table finish() {
    table_.schema.next_id = std::max(table_.schema.next_id, final_next_id_);
    return std::move(table_);
  }

 private:
  std::size_t column(const std::string& label) const {
    for (std::size_t i = 0; i < table_.schema.columns.size(); ++i) {
      if (table_.schema.columns[i].label == label) return i;
    }
    throw Error("unresolved-column", "column '" + label + "' missing at step " +
                                         std::to_string(step_), step_);
  }

  grel::Expression expression(const RawOperation& op) const {
    const std::string source = string_param_or(op, "expression", "value");
    auto parsed = grel::parse_expression(source);
    if (!parsed) {
      throw Error("expression-error", "expression outside the supported subset: " + source, step_);
    }
    return *parsed;
  }

  std::string eval(const grel::Expression& expr, const Row& row, std::size_t own) const {
    return evaluate(expr, row[own], [&](const std::string& label) { return row[column(label)]; });
  }

  void text_transform(const RawOperation& op) {
    const std::size_t col = column(string_param_or(op, "columnName", ""));
    const grel::Expression expr = expression(op);
    int rounds = 1;
    if (bool_param(op, "repeat")) {
      rounds = 10;
      if (auto it = op.params.find("repeatCount"); it != op.params.end() && it->is_number_integer()) {
        rounds = std::max(1, it->get<int>());
      }
    }
    for (Row& row : table_.rows) {
      for (int r = 0; r < rounds; ++r) {
        std::string next = eval(expr, row, col);
        const bool changed = next != row[col];
        row[col] = std::move(next);
        if (!changed) break;
      }
    }
  }

  void mass_edit(const RawOperation& op) {
    const std::size_t col = column(string_param_or(op, "columnName", ""));
    const grel::Expression expr = expression(op);
    const Json edits = op.params.value("edits", Json::array());
    for (Row& row : table_.rows) {
      const std::string key = eval(expr, row, col);
      for (const Json& edit : edits) {
        bool match = key.empty() && edit.value("fromBlank", false);
        for (const Json& from : edit.value("from", Json::array())) {
          if (from.is_string() && from.get<std::string>() == key) match = true;
        }
        if (match) {
          row[col] = edit.value("to", std::string());
          break;
        }
      }
    }
  }

  void remove_column(std::size_t col) {
    table_.schema.columns.erase(table_.schema.columns.begin() + static_cast<std::ptrdiff_t>(col));
    for (Row& row : table_.rows) row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
  }

  void insert_columns(std::size_t at, const std::vector<Column>& columns,
                      const std::vector<std::vector<std::string>>& cells_per_row) {
    auto& schema = table_.schema.columns;
    schema.insert(schema.begin() + static_cast<std::ptrdiff_t>(at), columns.begin(), columns.end());
    for (std::size_t r = 0; r < table_.rows.size(); ++r) {
      Row& row = table_.rows[r];
      row.insert(row.begin() + static_cast<std::ptrdiff_t>(at), cells_per_row[r].begin(),
                 cells_per_row[r].end());
    }
  }

  void split(const RawOperation& op) {
    const std::size_t col = column(string_param_or(op, "columnName", ""));
    const std::string label = table_.schema.columns[col].label;
    const auto parts = static_cast<std::size_t>(split_parts(op, options_));
    std::vector<Column> created;
    for (std::size_t p = 0; p < parts; ++p) {
      created.push_back({ColumnId{first_new_id_[step_] + static_cast<std::uint32_t>(p)},
                         label + " " + std::to_string(p + 1)});
    }
    std::vector<std::vector<std::string>> cells;
    cells.reserve(table_.rows.size());
    for (const Row& row : table_.rows) cells.push_back(split_cell(row[col], op, parts));
    insert_columns(col + 1, created, cells);
    if (bool_param(op, "removeOriginalColumn")) remove_column(col);
  }

  void add_column(const RawOperation& op) {
    const std::size_t base = column(string_param_or(op, "baseColumnName", ""));
    const grel::Expression expr = expression(op);
    std::vector<std::vector<std::string>> cells;
    cells.reserve(table_.rows.size());
    for (const Row& row : table_.rows) cells.push_back({eval(expr, row, base)});
    insert_columns(base + 1,
                   {Column{ColumnId{first_new_id_[step_]}, string_param_or(op, "newColumnName", "")}},
                   cells);
  }

  void fill_down(std::size_t col) {
    std::optional<std::string> previous;
    for (Row& row : table_.rows) {
      if (row[col].empty()) {
        if (previous) row[col] = *previous;
      } else {
        previous = row[col];
      }
    }
  }

  void blank_down(std::size_t col) {
    std::optional<std::string> previous;
    for (Row& row : table_.rows) {
      if (previous && *previous == row[col]) {
        row[col].clear();
      } else {
        previous = row[col];
      }
    }
  }

  void check_labels() const {
    std::set<std::string_view> seen;
    for (const Column& c : table_.schema.columns) {
      if (!seen.insert(c.label).second) {
        throw Error("label-collision", "duplicate column label '" + c.label + "'", step_);
      }
    }
  }

  const Recipe& recipe_;
  Table table_;
  const EffectOptions& options_;
  std::vector<std::uint32_t> first_new_id_;
  std::uint32_t final_next_id_ = 0;
  std::size_t step_ = 0;
};

}  // namespace

std::string to_number_text(std::string_view text) {
  if (text.empty()) return std::string(text);
  double number = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') {
    ++begin;
    if (begin == end || *begin == '-') return std::string(text);
  }
  auto [ptr, ec] = std::from_chars(begin, end, number);
  if (ec != std::errc() || ptr != end || !std::isfinite(number)) return std::string(text);
  if (number == std::trunc(number) && std::fabs(number) < 1e15) {
    return std::to_string(static_cast<long long>(number));
  }
  char buffer[64];
  auto result = std::to_chars(buffer, buffer + sizeof(buffer), number);
  return std::string(buffer, result.ptr);
}

std::string evaluate(const grel::Expression& expression, std::string_view value,
                     const std::function<std::string(const std::string&)>& cell) {
  std::string out;
  for (const grel::Term& term : expression.terms) {
    std::string operand;
    if (std::holds_alternative<grel::OwnValue>(term.operand)) {
      operand = std::string(value);
    } else if (const auto* ref = std::get_if<grel::CellValue>(&term.operand)) {
      operand = cell(ref->label);
    } else if (const auto* literal = std::get_if<grel::StringLiteral>(&term.operand)) {
      operand = literal->text;
    } else if (const auto* group = std::get_if<grel::Group>(&term.operand)) {
      operand = evaluate(*group->inner, value, cell);
    }
    for (grel::Method method : term.calls) operand = apply_method(method, std::move(operand));
    out += operand;
  }
  return out;
}

bool is_supported(const RawOperation& op, std::string* why) {
  auto reject = [&](std::string reason) {
    if (why != nullptr) *why = std::move(reason);
    return false;
  };
  const std::string_view id = op.op_id;
  if (id != kTextTransform && id != kMassEdit && id != kColumnRename && id != kColumnRemoval &&
      id != kColumnSplit && id != kColumnAddition && id != kFillDown && id != kBlankDown) {
    return reject("operation is outside the executable subset");
  }
  if (has_facets(op)) return reject("faceted row selection is not executable");
  if (id == kTextTransform || id == kMassEdit || id == kColumnAddition) {
    if (!grel::parse_expression(string_param_or(op, "expression", "value"))) {
      return reject("expression is outside the supported subset");
    }
  }
  if (id == kColumnSplit && bool_param(op, "regex")) {
    return reject("regular-expression splits are not executable");
  }
  return true;
}

Table execute(const Recipe& recipe, const Table& input, const EffectOptions& options) {
  Executor executor(recipe, input, options);
  for (std::size_t step = 0; step < recipe.size(); ++step) executor.run(step);
  return executor.finish();
}

Table execute_order(const Recipe& recipe, std::span<const std::size_t> order,
                    const Table& input, const EffectOptions& options) {
  if (order.size() != recipe.size()) {
    throw Error("invalid-order", "order must list every step exactly once");
  }
  std::vector<std::size_t> position(recipe.size(), recipe.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (order[p] >= recipe.size() || position[order[p]] != recipe.size()) {
      throw Error("invalid-order", "order must list every step exactly once");
    }
    position[order[p]] = p;
  }
  const Trace trace = trace_recipe(recipe, input.schema, options);
  for (const auto& [before, after] : dependency_edges(recipe, trace.effects)) {
    if (position[before] > position[after]) {
      throw Error("invalid-order", "step " + std::to_string(after) + " must run after step " +
                                       std::to_string(before));
    }
  }
  Executor executor(recipe, input, options);
  for (std::size_t step : order) executor.run(step);
  return executor.finish();
}

Table sorted_by_column_id(const Table& table) {
  std::vector<std::size_t> order(table.schema.columns.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.schema.columns[a].id < table.schema.columns[b].id;
  });
  Table sorted;
  sorted.schema.next_id = table.schema.next_id;
  for (std::size_t i : order) sorted.schema.columns.push_back(table.schema.columns[i]);
  for (const Row& row : table.rows) {
    Row out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(row[i]);
    sorted.rows.push_back(std::move(out));
  }
  return sorted;
}

Table read_csv(std::string_view text) {
  std::vector<Row> records;
  Row record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw Error("malformed-csv", "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw Error("malformed-csv", "missing header row");

  Table table;
  table.schema = SchemaState::from_labels(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.schema.size()) {
      throw Error("malformed-csv", "row " + std::to_string(r) + " has " +
                                       std::to_string(records[r].size()) + " cells, expected " +
                                       std::to_string(table.schema.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

std::string write_csv(const Table& table) {
  auto field = [](const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += field(cells[i]);
    }
    return out + "\n";
  };
  std::string out = line(table.schema.labels());
  for (const Row& row : table.rows) out += line(row);
  return out;
}

}  // namespace refineflow::engine

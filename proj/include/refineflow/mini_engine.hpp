#ifndef REFINEFLOW_MINI_ENGINE_HPP_
#define REFINEFLOW_MINI_ENGINE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refineflow/effects.hpp"
#include "refineflow/grel.hpp"
#include "refineflow/recipe.hpp"

namespace refineflow::engine {

using Row = std::vector<std::string>;

// In-memory snapshot. Cells are untyped strings; empty string is blank.
struct Table {
  SchemaState schema;
  std::vector<Row> rows;

  bool operator==(const Table&) const = default;
};

// RFC 4180 CSV with a header row; ids are assigned in column order.
// Throws Error("malformed-csv").
Table read_csv(std::string_view text);
std::string write_csv(const Table& table);

// Same table with columns (and cells) sorted by ColumnId.
Table sorted_by_column_id(const Table& table);

// Evaluates a parsed expression; value is the current cell, cell(label) looks
// up another column of the same row. '+' concatenates.
std::string evaluate(const grel::Expression& expression, std::string_view value,
                     const std::function<std::string(const std::string&)>& cell);

// toNumber: integers print without a decimal point, other finite numbers in
// shortest round-trip form; non-numeric text is returned unchanged.
std::string to_number_text(std::string_view text);

// Whether execute() understands the operation. why receives the reason when
// it does not.
bool is_supported(const RawOperation& op, std::string* why = nullptr);

// Runs the recipe in order. Throws Error("unsupported-op"),
// Error("expression-error"), Error("unresolved-column") or
// Error("label-collision").
Table execute(const Recipe& recipe, const Table& input, const EffectOptions& options = {});

// Runs the steps in the given order of recipe indices. Throws
// Error("invalid-order") when order is not a permutation or breaks a
// dependency between non-commuting steps.
Table execute_order(const Recipe& recipe, std::span<const std::size_t> order,
                    const Table& input, const EffectOptions& options = {});

}  // namespace refineflow::engine

#endif  // REFINEFLOW_MINI_ENGINE_HPP_

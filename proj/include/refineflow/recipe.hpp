#ifndef REFINEFLOW_RECIPE_HPP_
#define REFINEFLOW_RECIPE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "refineflow/diagnostics.hpp"

namespace refineflow {

using Json = nlohmann::json;

// One entry of an exported OpenRefine operation history. params holds every
// key of the entry other than "op" and "description", untouched.
struct RawOperation {
  std::string op_id;
  std::optional<std::string> description;
  Json params = Json::object();
  std::size_t index = 0;

  // String parameter lookup; empty when absent or not a string.
  std::optional<std::string> string_param(std::string_view key) const;

  // Back to the exported JSON form ("op", "description", then params).
  Json to_json() const;

  bool operator==(const RawOperation&) const = default;
};

struct Recipe {
  std::vector<RawOperation> operations;
  std::optional<std::string> source_name;

  std::size_t size() const { return operations.size(); }
  bool empty() const { return operations.empty(); }

  bool operator==(const Recipe&) const = default;
};

// Parses an exported operation history. Accepts a top-level array of
// operation objects, or a single operation object treated as a one-element
// recipe. Throws Error with code malformed-json, not-an-array or
// missing-op-field (the latter carrying the offending entry index).
Recipe parse_recipe(std::string_view text,
                    std::optional<std::string> source_name = std::nullopt);

// Builds a recipe from already-constructed operations, renumbering indices.
Recipe make_recipe(std::vector<RawOperation> operations);

// Serializes back to the exported array form.
Json to_json(const Recipe& recipe);

// Reports unknown-op warnings for ids missing from the effect catalog and
// unused-param infos for parameter keys the catalog does not consult.
std::vector<Diagnostic> validate_recipe(const Recipe& recipe);

}  // namespace refineflow

#endif  // REFINEFLOW_RECIPE_HPP_

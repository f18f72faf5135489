#include "refineflow/recipe.hpp"

#include <algorithm>
#include <utility>

#include "refineflow/effects.hpp"

namespace refineflow {

namespace {

RawOperation operation_from_json(const Json& entry, std::size_t index) {
  if (!entry.is_object()) {
    throw Error("missing-op-field",
                "recipe entry " + std::to_string(index) + " is not an operation object", index);
  }
  auto op = entry.find("op");
  if (op == entry.end() || !op->is_string() || op->get<std::string>().empty()) {
    throw Error("missing-op-field",
                "recipe entry " + std::to_string(index) + " has no string \"op\" field", index);
  }
  RawOperation operation;
  operation.op_id = op->get<std::string>();
  operation.index = index;
  for (const auto& [key, value] : entry.items()) {
    if (key == "op") continue;
    if (key == "description" && value.is_string()) {
      operation.description = value.get<std::string>();
      continue;
    }
    operation.params[key] = value;
  }
  return operation;
}

}  // namespace

std::optional<std::string> RawOperation::string_param(std::string_view key) const {
  auto it = params.find(key);
  if (it == params.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

Json RawOperation::to_json() const {
  Json out = params;
  out["op"] = op_id;
  if (description) out["description"] = *description;
  return out;
}

Recipe parse_recipe(std::string_view text, std::optional<std::string> source_name) {
  Json document;
  try {
    // duplicate keys inside an object: the last occurrence wins
    document = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error("malformed-json", std::string("recipe is not valid JSON: ") + e.what());
  }

  Recipe recipe;
  recipe.source_name = std::move(source_name);
  if (document.is_object()) {
    recipe.operations.push_back(operation_from_json(document, 0));
    return recipe;
  }
  if (!document.is_array()) {
    throw Error("not-an-array", "recipe must be a JSON array of operations");
  }
  recipe.operations.reserve(document.size());
  for (std::size_t i = 0; i < document.size(); ++i) {
    recipe.operations.push_back(operation_from_json(document[i], i));
  }
  return recipe;
}

Recipe make_recipe(std::vector<RawOperation> operations) {
  Recipe recipe;
  recipe.operations = std::move(operations);
  for (std::size_t i = 0; i < recipe.operations.size(); ++i) {
    recipe.operations[i].index = i;
  }
  return recipe;
}

Json to_json(const Recipe& recipe) {
  Json out = Json::array();
  for (const RawOperation& op : recipe.operations) out.push_back(op.to_json());
  return out;
}

std::vector<Diagnostic> validate_recipe(const Recipe& recipe) {
  std::vector<Diagnostic> diagnostics;
  for (const RawOperation& op : recipe.operations) {
    const OperationInfo* info = find_operation(op.op_id);
    if (info == nullptr) {
      diagnostics.push_back({Severity::kWarning, op.index,
                             "operation '" + op.op_id +
                                 "' is not in the effect catalog; treating it as table-scoped",
                             "unknown-op"});
      continue;
    }
    for (const auto& [key, value] : op.params.items()) {
      const bool consumed = std::find(info->consumed_keys.begin(), info->consumed_keys.end(),
                                      key) != info->consumed_keys.end();
      if (!consumed) {
        diagnostics.push_back({Severity::kInfo, op.index,
                               "parameter '" + key + "' of " + op.op_id +
                                   " is kept but not used for analysis",
                               "unused-param"});
      }
    }
  }
  return diagnostics;
}

}  // namespace refineflow

#ifndef REFINEFLOW_GREL_HPP_
#define REFINEFLOW_GREL_HPP_

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace refineflow::grel {

// Static read-set of a transformation expression. When opaque is set the
// expression is outside the supported subset, referenced_columns is empty and
// callers must assume the expression may read any column.
struct ExpressionAnalysis {
  std::set<std::string> referenced_columns;
  bool reads_own_value = false;
  bool opaque = false;

  bool operator==(const ExpressionAnalysis&) const = default;
};

// Pure string methods callable on any operand: value.trim(), ...
enum class Method { kToLowercase, kToUppercase, kTrim, kToNumber, kToString };

std::string_view to_string(Method method);

struct Expression;

struct OwnValue {
  bool operator==(const OwnValue&) const = default;
};
struct CellValue {
  std::string label;
  bool operator==(const CellValue&) const = default;
};
struct StringLiteral {
  std::string text;
  bool operator==(const StringLiteral&) const = default;
};
struct Group {
  std::shared_ptr<const Expression> inner;
};

using Operand = std::variant<OwnValue, CellValue, StringLiteral, Group>;

struct Term {
  Operand operand;
  std::vector<Method> calls;
};

// term ('+' term)*; '+' concatenates.
struct Expression {
  std::vector<Term> terms;
};

// Parses the supported subset:
//   expr    := term ('+' term)*
//   term    := operand ('.' method '(' ')')*
//   operand := 'value' | string | 'cells' '[' string ']' '.' 'value'
//            | 'cells' '.' ident '.' 'value' | '(' expr ')'
// An optional "grel:" tag is stripped. Returns nullopt for anything else,
// including other language tags.
std::optional<Expression> parse_expression(std::string_view source);

ExpressionAnalysis analyze_expression(std::string_view expression,
                                      std::string_view own_column);

}  // namespace refineflow::grel

#endif  // REFINEFLOW_GREL_HPP_

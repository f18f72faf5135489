#include <gtest/gtest.h>

#include "refineflow/grel.hpp"
#include "test_support.hpp"

namespace refineflow::grel {
namespace {

TEST(AnalyzeExpression, LowercaseIsIntraColumn) {
  const auto a = analyze_expression("value.toLowercase()", "event");
  EXPECT_TRUE(a.reads_own_value);
  EXPECT_TRUE(a.referenced_columns.empty());
  EXPECT_FALSE(a.opaque);
}

TEST(AnalyzeExpression, Identity) {
  const auto a = analyze_expression("value", "x");
  EXPECT_TRUE(a.reads_own_value);
  EXPECT_TRUE(a.referenced_columns.empty());
  EXPECT_FALSE(a.opaque);
}

TEST(AnalyzeExpression, CellReferencesAndConcatenation) {
  const auto a = analyze_expression(R"(cells["day"].value + "/" + cells["year"].value)",
                                    "repaired_date");
  EXPECT_EQ(a.referenced_columns, (std::set<std::string>{"day", "year"}));
  EXPECT_FALSE(a.reads_own_value);
  EXPECT_FALSE(a.opaque);
}

TEST(AnalyzeExpression, DottedCellReferenceAndGrelTag) {
  const auto a = analyze_expression("grel:cells.month.value.trim() + value", "m");
  EXPECT_EQ(a.referenced_columns, (std::set<std::string>{"month"}));
  EXPECT_TRUE(a.reads_own_value);
  EXPECT_FALSE(a.opaque);
}

TEST(AnalyzeExpression, OtherLanguagesAreOpaque) {
  for (const char* e : {"jython:return value.lower()", "clojure:(.toLowerCase value)"}) {
    const auto a = analyze_expression(e, "x");
    EXPECT_TRUE(a.opaque) << e;
    EXPECT_TRUE(a.referenced_columns.empty());
  }
}

TEST(AnalyzeExpression, UnsupportedSyntaxIsOpaque) {
  for (const char* e : {"value.replace(\"a\", \"b\")", "value.length()", "value + 1",
                        "if(isBlank(value), \"x\", value)", "cells[\"a\"].value.split(\",\")[0]",
                        "value.", "\"unterminated", "value.toLowercase", "cells[\"a\"]", ""}) {
    EXPECT_TRUE(analyze_expression(e, "x").opaque) << e;
  }
}

TEST(ParseExpression, ChainsAndGroups) {
  auto parsed = parse_expression("(value + \"-\").trim().toUppercase()");
  ASSERT_TRUE(parsed);
  ASSERT_EQ(parsed->terms.size(), 1u);
  EXPECT_EQ(parsed->terms[0].calls,
            (std::vector<Method>{Method::kTrim, Method::kToUppercase}));
  EXPECT_TRUE(std::holds_alternative<Group>(parsed->terms[0].operand));
}

TEST(ParseExpression, StringEscapes) {
  auto parsed = parse_expression(R"('it\'s' + "a\"b")");
  ASSERT_TRUE(parsed);
  ASSERT_EQ(parsed->terms.size(), 2u);
  EXPECT_EQ(std::get<StringLiteral>(parsed->terms[0].operand).text, "it's");
  EXPECT_EQ(std::get<StringLiteral>(parsed->terms[1].operand).text, "a\"b");
}

// Appending a reference term adds exactly that label.
TEST(AnalyzeExpression, MonotoneUnderAppendedReference) {
  const std::vector<std::string> bases = {
      "value", "value.trim()", "\"x\"", R"(cells["a"].value)", "(value + \"-\").toLowercase()",
      R"(cells.b.value + value.toNumber())"};
  const std::vector<std::string> labels = {"a", "zz", "date 2", "repaired_date"};
  for (const auto& base : bases) {
    const auto before = analyze_expression(base, "own");
    ASSERT_FALSE(before.opaque) << base;
    for (const auto& label : labels) {
      const auto after = analyze_expression(base + " + cells[\"" + label + "\"].value", "own");
      auto expected = before;
      expected.referenced_columns.insert(label);
      EXPECT_EQ(after, expected) << base << " + " << label;
    }
  }
}

// Either opaque, or the reference set equals what a regex finds.
TEST(AnalyzeExpression, ReferencesMatchRegexOracle) {
  std::vector<std::string> corpus = {
      R"(cells["day"].value + "/" + cells["month"].value + "/" + cells["year"].value)",
      "value.toLowercase()", "cells.event.value.trim()", R"(value + cells["a b"].value)",
      "jython:return cells['x'].value", R"(cells["a"].value.replace("x","y"))",
      R"(if(cells["a"].value == "", cells["b"].value, value))"};
  testing::RecipeGenerator gen(5);
  for (int i = 0; i < 40; ++i) {
    for (const RawOperation& op : gen.generate().recipe.operations) {
      if (auto e = op.string_param("expression")) corpus.push_back(*e);
    }
  }
  for (const std::string& expression : corpus) {
    const auto a = analyze_expression(expression, "own");
    if (a.opaque) {
      EXPECT_TRUE(a.referenced_columns.empty());
    } else {
      EXPECT_EQ(a.referenced_columns, testing::regex_cell_references(expression)) << expression;
    }
  }
}

}  // namespace
}  // namespace refineflow::grel

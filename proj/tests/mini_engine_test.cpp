#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "refineflow/graph_model.hpp"
#include "refineflow/mini_engine.hpp"
#include "test_support.hpp"

namespace refineflow::engine {
namespace {

RawOperation op(std::string id, Json params) {
  RawOperation raw;
  raw.op_id = std::move(id);
  raw.params = std::move(params);
  return raw;
}

Table table(std::vector<std::string> labels, std::vector<Row> rows) {
  return {SchemaState::from_labels(labels), std::move(rows)};
}

TEST(Execute, SplitOnSeparator) {
  const Recipe recipe = make_recipe({op("core/column-split", {{"columnName", "date"},
                                                              {"separator", "/"},
                                                              {"maxColumns", 3},
                                                              {"removeOriginalColumn", true}})});
  const Table out = execute(recipe, table({"date"}, {{"1/2/1900"}}));
  EXPECT_EQ(out.schema.labels(), (std::vector<std::string>{"date 1", "date 2", "date 3"}));
  EXPECT_EQ(out.rows, (std::vector<Row>{{"1", "2", "1900"}}));
}

TEST(Execute, SplitPadsAndTruncatesToArity) {
  const Recipe recipe = make_recipe({op("core/column-split", {{"columnName", "x"},
                                                              {"separator", "-"},
                                                              {"removeOriginalColumn", false}})});
  const Table out = execute(recipe, table({"x"}, {{"a"}, {"a-b"}, {"a-b-c"}}));
  EXPECT_EQ(out.schema.labels(), (std::vector<std::string>{"x", "x 1", "x 2"}));
  EXPECT_EQ(out.rows, (std::vector<Row>{{"a", "a", ""}, {"a-b", "a", "b"}, {"a-b-c", "a", "b"}}));
}

TEST(Execute, IdentityTransformChangesNothing) {
  const Table in = table({"a", "b"}, {{" x ", "1"}, {"", "2"}});
  const Recipe recipe =
      make_recipe({op("core/text-transform", {{"columnName", "a"}, {"expression", "value"}})});
  EXPECT_EQ(execute(recipe, in), in);
}

TEST(Execute, RenameOnlyRelabels) {
  const Table in = table({"a", "b"}, {{"1", "2"}});
  const Recipe recipe =
      make_recipe({op("core/column-rename", {{"oldColumnName", "a"}, {"newColumnName", "z"}})});
  const Table out = execute(recipe, in);
  EXPECT_EQ(out.rows, in.rows);
  EXPECT_EQ(out.schema.labels(), (std::vector<std::string>{"z", "b"}));
  EXPECT_EQ(out.schema.ids(), in.schema.ids());
}

TEST(Execute, MenusFixture) {
  const Recipe recipe = testing::load_recipe("menus.json");
  const Table in = read_csv(testing::read_text(testing::fixture_path("menus.csv")));
  const Table out = execute(recipe, in);
  EXPECT_EQ(out.schema.labels(),
            (std::vector<std::string>{"year", "month", "day", "repaired_date", "event", "dish_count"}));
  ASSERT_EQ(out.rows.size(), 4u);
  EXPECT_EQ(out.rows[0], (Row{"1900", "04", "15", "15/04/1900", "breakfast", "23"}));
  EXPECT_EQ(out.rows[1], (Row{"1900", "04", "16", "16/04/1900", "dinner", "  41"}));
  EXPECT_EQ(out.rows[3], (Row{"1899", "12", "31", "31/12/1899", "dinner", "12.5"}));
}

TEST(Execute, FillDownAndBlankDown) {
  const Table in = table({"a"}, {{"x"}, {""}, {""}, {"y"}, {"y"}, {""}});
  const Table filled = execute(make_recipe({op("core/fill-down", {{"columnName", "a"}})}), in);
  EXPECT_EQ(filled.rows, (std::vector<Row>{{"x"}, {"x"}, {"x"}, {"y"}, {"y"}, {"y"}}));
  const Table blanked = execute(make_recipe({op("core/blank-down", {{"columnName", "a"}})}), filled);
  EXPECT_EQ(blanked.rows, (std::vector<Row>{{"x"}, {""}, {""}, {"y"}, {""}, {""}}));
}

TEST(Execute, MassEditReplacesLiteralsAndBlanks) {
  const Table in = table({"a"}, {{"x"}, {"y"}, {""}, {"z"}});
  const Recipe recipe = make_recipe({op(
      "core/mass-edit", {{"columnName", "a"},
                         {"expression", "value"},
                         {"edits", {{{"from", {"x", "y"}}, {"to", "xy"}},
                                    {{"from", Json::array()}, {"fromBlank", true}, {"to", "blank"}}}}})});
  EXPECT_EQ(execute(recipe, in).rows, (std::vector<Row>{{"xy"}, {"xy"}, {"blank"}, {"z"}}));
}

TEST(Execute, AdditionPlacesColumnRightOfBase) {
  const Table in = table({"a", "b", "c"}, {{"1", "2", "3"}});
  const Recipe recipe = make_recipe({op("core/column-addition",
                                        {{"baseColumnName", "a"},
                                         {"newColumnName", "n"},
                                         {"expression", R"(value + cells["c"].value)"},
                                         {"columnInsertIndex", 3}})});
  const Table out = execute(recipe, in);
  EXPECT_EQ(out.schema.labels(), (std::vector<std::string>{"a", "n", "b", "c"}));
  EXPECT_EQ(out.rows, (std::vector<Row>{{"1", "13", "2", "3"}}));
}

TEST(Execute, RemovalDropsCells) {
  const Table in = table({"a", "b"}, {{"1", "2"}});
  const Table out = execute(make_recipe({op("core/column-removal", {{"columnName", "a"}})}), in);
  EXPECT_EQ(out.schema.labels(), std::vector<std::string>{"b"});
  EXPECT_EQ(out.rows, std::vector<Row>{{"2"}});
}

TEST(Execute, UnsupportedOperationNamesTheStep) {
  const Table in = table({"a"}, {{"1"}});
  const Recipe recipe = make_recipe({op("core/fill-down", {{"columnName", "a"}}),
                                     op("core/row-removal", Json::object())});
  try {
    execute(recipe, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unsupported-op");
    EXPECT_EQ(e.step_index(), 1u);
  }
}

TEST(Execute, OpaqueExpressionIsUnsupported) {
  const RawOperation jython =
      op("core/text-transform", {{"columnName", "a"}, {"expression", "jython:return value"}});
  std::string why;
  EXPECT_FALSE(is_supported(jython, &why));
  EXPECT_FALSE(why.empty());
  EXPECT_THROW(execute(make_recipe({jython}), table({"a"}, {{"1"}})), Error);
}

TEST(Execute, FacetedOperationIsUnsupported) {
  const RawOperation faceted =
      op("core/fill-down", {{"columnName", "a"},
                            {"engineConfig", {{"facets", {{{"columnName", "a"}}}}}}});
  EXPECT_FALSE(is_supported(faceted));
}

TEST(ToNumber, Formatting) {
  EXPECT_EQ(to_number_text("42"), "42");
  EXPECT_EQ(to_number_text("42.0"), "42");
  EXPECT_EQ(to_number_text("3.50"), "3.5");
  EXPECT_EQ(to_number_text("-7"), "-7");
  EXPECT_EQ(to_number_text("+5"), "5");
  EXPECT_EQ(to_number_text("1e3"), "1000");
  EXPECT_EQ(to_number_text("0.1"), "0.1");
  EXPECT_EQ(to_number_text("1e20"), "1e+20");
  EXPECT_EQ(to_number_text("abc"), "abc");
  EXPECT_EQ(to_number_text(" 41"), " 41");
  EXPECT_EQ(to_number_text("+-5"), "+-5");
  EXPECT_EQ(to_number_text(""), "");
}

TEST(Evaluate, ConcatenatesAndCallsMethods) {
  const auto expr = grel::parse_expression(R"((value + "-" + cells["b"].value).toUppercase())");
  ASSERT_TRUE(expr);
  const std::string out =
      evaluate(*expr, "x", [](const std::string& label) { return label == "b" ? "y" : "?"; });
  EXPECT_EQ(out, "X-Y");
}

TEST(ExecuteOrder, DisjointTransformsInEitherOrder) {
  const Table in = table({"A", "B"}, {{" a ", " b "}, {"c", "D"}});
  const Recipe recipe = make_recipe({
      op("core/text-transform", {{"columnName", "A"}, {"expression", "value.toUppercase()"}}),
      op("core/text-transform", {{"columnName", "B"}, {"expression", "value.trim()"}}),
  });
  const std::vector<std::size_t> forward{0, 1};
  const std::vector<std::size_t> backward{1, 0};
  EXPECT_EQ(execute_order(recipe, forward, in), execute_order(recipe, backward, in));
}

TEST(ExecuteOrder, IdentityMatchesExecute) {
  const Recipe recipe = testing::load_recipe("menus.json");
  const Table in = read_csv(testing::read_text(testing::fixture_path("menus.csv")));
  std::vector<std::size_t> order(recipe.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  EXPECT_EQ(execute_order(recipe, order, in), execute(recipe, in));
}

TEST(ExecuteOrder, RejectsBrokenDependencyAndBadPermutation) {
  const Recipe recipe = testing::load_recipe("menus.json");
  const Table in = read_csv(testing::read_text(testing::fixture_path("menus.csv")));
  const std::vector<std::size_t> rename_before_split{1, 0, 2, 3, 4, 5, 6, 7};
  const std::vector<std::size_t> repeated{0, 0, 2, 3, 4, 5, 6, 7};
  const std::vector<std::size_t> short_order{0, 1};
  for (const auto* order : {&rename_before_split, &repeated, &short_order}) {
    try {
      execute_order(recipe, *order, in);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "invalid-order");
    }
  }
}

TEST(ExecuteOrder, MenusRandomOrdersAgree) {
  const Recipe recipe = testing::load_recipe("menus.json");
  const Trace trace = trace_recipe(recipe, infer_initial_schema(recipe));
  const auto pairs = dependency_edges(recipe, trace.effects);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    Table in{trace.states.front(), {}};
    for (int r = 0; r < 20; ++r) {
      const std::string date = std::to_string(1850 + rng() % 100) + "-" +
                               std::to_string(1 + rng() % 12) + "-" + std::to_string(1 + rng() % 28);
      in.rows.push_back({date, testing::cell_vocabulary()[rng() % 16],
                         testing::cell_vocabulary()[rng() % 16]});
    }
    const Table expected = sorted_by_column_id(execute(recipe, in));
    for (int k = 0; k < 50; ++k) {
      const auto order = testing::random_topological_order(recipe.size(), pairs, rng);
      ASSERT_EQ(sorted_by_column_id(execute_order(recipe, order, in)), expected);
    }
  }
}

TEST(Csv, RoundTripWithQuoting) {
  const Table in = table({"a", "b,c"}, {{"x \"q\"", "line\nbreak"}, {"", "plain"}});
  const Table back = read_csv(write_csv(in));
  EXPECT_EQ(back, in);
}

TEST(Csv, CrlfAndMissingTrailingNewline) {
  const Table t = read_csv("a,b\r\n1,2\r\n3,4");
  EXPECT_EQ(t.schema.labels(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.rows, (std::vector<Row>{{"1", "2"}, {"3", "4"}}));
}

TEST(Csv, Malformed) {
  for (const char* text : {"", "a,b\n1\n", "a\n\"open\n"}) {
    try {
      read_csv(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "malformed-csv");
    }
  }
}

TEST(SortedByColumnId, ReordersCellsWithTheirColumns) {
  Table t;
  t.schema.columns = {{ColumnId{2}, "c"}, {ColumnId{0}, "a"}, {ColumnId{1}, "b"}};
  t.schema.next_id = 3;
  t.rows = {{"3", "1", "2"}};
  const Table sorted = sorted_by_column_id(t);
  EXPECT_EQ(sorted.schema.labels(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(sorted.rows, (std::vector<Row>{{"1", "2", "3"}}));
}

}  // namespace
}  // namespace refineflow::engine

#include <gtest/gtest.h>

#include "refineflow/emitters.hpp"
#include "refineflow/graph_model.hpp"
#include "refineflow/mini_engine.hpp"
#include "test_support.hpp"

// Invariants that cut across modules, over random recipes.

namespace refineflow {
namespace {

class CrossModule : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(CrossModule, EngineSchemaAgreesWithTrace) {
  testing::RecipeGenerator gen(GetParam());
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = gen.generate();
    const auto states = trace_schema(c.recipe, c.table.schema);
    const engine::Table out = engine::execute(c.recipe, c.table);
    ASSERT_EQ(out.schema, states.back()) << to_json(c.recipe).dump();
    for (const engine::Row& row : out.rows) ASSERT_EQ(row.size(), out.schema.size());
  }
}

TEST_P(CrossModule, ReorderingsAgreeAfterIdSort) {
  testing::RecipeGenerator gen(GetParam());
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = gen.generate();
    const Trace trace = trace_recipe(c.recipe, c.table.schema);
    const auto pairs = dependency_edges(c.recipe, trace.effects);
    const engine::Table expected = engine::sorted_by_column_id(engine::execute(c.recipe, c.table));
    for (int k = 0; k < 10; ++k) {
      const auto order = testing::random_topological_order(c.recipe.size(), pairs, gen.rng());
      ASSERT_EQ(engine::sorted_by_column_id(engine::execute_order(c.recipe, order, c.table)), expected)
          << to_json(c.recipe).dump();
    }
  }
}

TEST_P(CrossModule, ExecutionIsDeterministic) {
  testing::RecipeGenerator gen(GetParam());
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = gen.generate();
    EXPECT_EQ(engine::execute(c.recipe, c.table), engine::execute(c.recipe, c.table));
  }
}

TEST_P(CrossModule, RecipeSurvivesSerialization) {
  testing::RecipeGenerator gen(GetParam());
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = gen.generate();
    const Recipe again = parse_recipe(to_json(c.recipe).dump(2), "again.json");
    ASSERT_EQ(again.size(), c.recipe.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
      EXPECT_EQ(again.operations[i].op_id, c.recipe.operations[i].op_id);
      EXPECT_EQ(again.operations[i].params, c.recipe.operations[i].params);
    }
  }
}

TEST_P(CrossModule, EmittedDocumentsAreWellFormed) {
  testing::RecipeGenerator gen(GetParam());
  for (int trial = 0; trial < 15; ++trial) {
    const auto c = gen.generate();
    const Trace trace = trace_recipe(c.recipe, c.table.schema);
    const std::vector<WorkflowModel> models = {
        build_linear(c.recipe, trace.states),
        build_parallel(c.recipe, trace.effects, trace.states),
        build_collapsed(c.recipe, trace.effects, trace.states, 2).model,
    };
    for (const WorkflowModel& m : models) {
      for (ViewKind view : {ViewKind::kCombined, ViewKind::kProcess, ViewKind::kData}) {
        const std::string dot = emit_dot(m, view);
        EXPECT_EQ(dot, emit_dot(m, view));
        EXPECT_NO_THROW(testing::parse_dot(dot)) << dot;
        const std::string yw = emit_yw(m, view);
        EXPECT_EQ(yw, emit_yw(m, view));
        const auto blocks = testing::parse_yw(yw);
        EXPECT_EQ(blocks.size(), m.process_nodes().size() + 1);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, CrossModule, ::testing::Values(1u, 42u, 977u));

}  // namespace
}  // namespace refineflow

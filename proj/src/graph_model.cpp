#include "refineflow/graph_model.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <numeric>

namespace refineflow {

namespace {

template <typename T>
bool intersects(const std::set<T>& a, const std::set<T>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

template <typename T>
std::set<T> united(std::set<T> a, const std::set<T>& b) {
  a.insert(b.begin(), b.end());
  return a;
}

std::string short_op_name(std::string_view op_id) {
  constexpr std::string_view kCore = "core/";
  if (op_id.substr(0, kCore.size()) == kCore) op_id.remove_prefix(kCore.size());
  return std::string(op_id);
}

std::string model_name(const Recipe& recipe) {
  if (!recipe.source_name || recipe.source_name->empty()) return "workflow";
  std::string stem = std::filesystem::path(*recipe.source_name).stem().string();
  return stem.empty() ? "workflow" : stem;
}

std::string param_value_text(const Json& value) {
  std::string text = value.is_string() ? value.get<std::string>() : value.dump();
  constexpr std::size_t kMax = 40;
  if (text.size() > kMax) {
    text.resize(kMax - 3);
    text += "...";
  }
  return text;
}

Node make_step_node(const RawOperation& op, std::size_t position) {
  Node node{NodeKind::kStep, step_node_id(position), short_op_name(op.op_id), op.index, {}};
  node.payload.emplace(payload::kOp, op.op_id);
  return node;
}

// One param node per recorded parameter, in key order.
void add_param_nodes(const RawOperation& op, std::size_t position, WorkflowModel& model,
                     const std::optional<std::string>& component) {
  const std::string step_id = step_node_id(position);
  for (const auto& [key, value] : op.params.items()) {
    Node node{NodeKind::kParam, "param_" + std::to_string(position + 1) + "_" + key,
              key + ": " + param_value_text(value), op.index, {}};
    node.payload.emplace(payload::kParamKey, key);
    if (component) node.payload.emplace(payload::kComponent, *component);
    model.edges.push_back({node.id, step_id, std::nullopt});
    model.nodes.push_back(std::move(node));
  }
}

std::vector<Edge> to_step_edges(const std::set<StepPair>& pairs,
                                const std::vector<std::string>& ids) {
  std::vector<Edge> edges;
  for (const auto& [from, to] : pairs) edges.push_back({ids[from], ids[to], std::nullopt});
  std::sort(edges.begin(), edges.end());
  return edges;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

void validate_alignment(const Recipe& recipe, const std::vector<SchemaState>& schemas) {
  if (schemas.size() != recipe.size() + 1) {
    throw Error("misaligned-trace", "expected " + std::to_string(recipe.size() + 1) +
                                        " schema states, got " + std::to_string(schemas.size()));
  }
}

WorkflowModel induced_subgraph(const WorkflowModel& model, const std::set<std::string>& keep) {
  WorkflowModel sub;
  sub.name = model.name;
  sub.model_kind = model.model_kind;
  for (const Node& node : model.nodes) {
    if (keep.count(node.id)) sub.nodes.push_back(node);
  }
  for (const Edge& edge : model.edges) {
    if (keep.count(edge.from) && keep.count(edge.to)) sub.edges.push_back(edge);
  }
  for (const Edge& edge : model.step_dependencies) {
    if (keep.count(edge.from) && keep.count(edge.to)) sub.step_dependencies.push_back(edge);
  }
  for (const auto& group : model.components) {
    std::vector<std::string> kept;
    for (const std::string& id : group) {
      if (keep.count(id)) kept.push_back(id);
    }
    if (!kept.empty()) sub.components.push_back(std::move(kept));
  }
  return sub;
}

WorkflowModel reachable_subgraph(const WorkflowModel& model, std::string_view node_id,
                                 bool upstream) {
  if (model.find(node_id) == nullptr) {
    throw Error("unknown-node", "model has no node '" + std::string(node_id) + "'");
  }
  std::map<std::string, std::vector<std::string>, std::less<>> adjacency;
  for (const Edge& edge : model.edges) {
    if (upstream) {
      adjacency[edge.to].push_back(edge.from);
    } else {
      adjacency[edge.from].push_back(edge.to);
    }
  }
  std::set<std::string> seen{std::string(node_id)};
  std::deque<std::string> queue{std::string(node_id)};
  while (!queue.empty()) {
    const std::string current = std::move(queue.front());
    queue.pop_front();
    auto it = adjacency.find(current);
    if (it == adjacency.end()) continue;
    for (const std::string& next : it->second) {
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return induced_subgraph(model, seen);
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kStep: return "step";
    case NodeKind::kDataTable: return "data_table";
    case NodeKind::kDataColumn: return "data_column";
    case NodeKind::kParam: return "param";
    case NodeKind::kSummary: return "summary";
  }
  return "step";
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kParallel: return "parallel";
    case ModelKind::kCollapsed: return "collapsed";
  }
  return "linear";
}

bool is_data(NodeKind kind) {
  return kind == NodeKind::kDataTable || kind == NodeKind::kDataColumn;
}

bool is_process(NodeKind kind) { return kind == NodeKind::kStep || kind == NodeKind::kSummary; }

std::optional<std::string> Node::get(std::string_view key) const {
  auto it = payload.find(key);
  if (it == payload.end()) return std::nullopt;
  return it->second;
}

const Node* WorkflowModel::find(std::string_view id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

std::size_t WorkflowModel::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.kind == kind; }));
}

std::vector<const Node*> WorkflowModel::process_nodes() const {
  std::vector<const Node*> out;
  for (const Node& node : nodes) {
    if (is_process(node.kind)) out.push_back(&node);
  }
  return out;
}

bool commutes(const ColumnEffect& a, const ColumnEffect& b) {
  if (a.table_scoped || b.table_scoped) return false;
  const auto out_a = a.outputs();
  const auto out_b = b.outputs();
  if (intersects(out_a, united(b.reads, out_b)) || intersects(out_b, united(a.reads, out_a))) {
    return false;
  }
  const auto rebinds_a = united(a.labels_bound, a.labels_released);
  const auto rebinds_b = united(b.labels_bound, b.labels_released);
  const auto touched_a = united(rebinds_a, a.labels_used);
  const auto touched_b = united(rebinds_b, b.labels_used);
  return !intersects(rebinds_a, touched_b) && !intersects(rebinds_b, touched_a);
}

std::set<StepPair> dependency_edges(const Recipe& recipe,
                                    const std::vector<ColumnEffect>& effects) {
  if (effects.size() != recipe.size()) {
    throw Error("misaligned-trace", "expected one effect per recipe step");
  }
  std::set<StepPair> pairs;
  for (std::size_t j = 0; j < effects.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (!commutes(effects[i], effects[j])) pairs.emplace(i, j);
    }
  }
  return pairs;
}

std::set<StepPair> transitive_reduction(std::size_t n, const std::set<StepPair>& pairs) {
  std::vector<std::vector<std::size_t>> successors(n);
  for (const auto& [from, to] : pairs) {
    if (from >= to || to >= n) throw Error("invalid-dag", "step pairs must point forward");
    successors[from].push_back(to);
  }
  for (auto& s : successors) std::sort(s.begin(), s.end());

  const std::size_t words = (n + 63) / 64;
  using Bits = std::vector<std::uint64_t>;
  auto test = [](const Bits& bits, std::size_t i) { return (bits[i / 64] >> (i % 64)) & 1U; };
  auto set = [](Bits& bits, std::size_t i) { bits[i / 64] |= std::uint64_t{1} << (i % 64); };
  auto merge = [](Bits& into, const Bits& from) {
    for (std::size_t w = 0; w < into.size(); ++w) into[w] |= from[w];
  };

  // reach[i]: nodes reachable from i through at least one edge
  std::vector<Bits> reach(n, Bits(words, 0));
  std::set<StepPair> reduced;
  for (std::size_t i = n; i-- > 0;) {
    // successors in ascending order; a successor already covered by an
    // earlier one is implied by a longer path
    for (std::size_t next : successors[i]) {
      if (!test(reach[i], next)) reduced.emplace(i, next);
      set(reach[i], next);
      merge(reach[i], reach[next]);
    }
  }
  return reduced;
}

std::vector<std::vector<std::size_t>> weak_components(std::size_t n,
                                                      const std::set<StepPair>& pairs) {
  UnionFind sets(n);
  for (const auto& [a, b] : pairs) sets.unite(a, b);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x[0] < y[0]; });
  return out;
}

std::string step_node_id(std::size_t position) { return "step_" + std::to_string(position + 1); }

std::string table_node_id(std::size_t position) { return "table_" + std::to_string(position); }

WorkflowModel build_linear(const Recipe& recipe, const std::vector<SchemaState>& schemas) {
  validate_alignment(recipe, schemas);
  WorkflowModel model;
  model.name = model_name(recipe);
  model.model_kind = ModelKind::kLinear;

  model.nodes.push_back({NodeKind::kDataTable, table_node_id(0), table_node_id(0), std::nullopt, {}});
  std::vector<std::string> step_ids;
  for (std::size_t k = 0; k < recipe.size(); ++k) {
    const RawOperation& op = recipe.operations[k];
    add_param_nodes(op, k, model, std::nullopt);
    Node step = make_step_node(op, k);
    step_ids.push_back(step.id);
    model.edges.push_back({table_node_id(k), step.id, std::nullopt});
    model.edges.push_back({step.id, table_node_id(k + 1), std::nullopt});
    model.nodes.push_back(std::move(step));
    model.nodes.push_back(
        {NodeKind::kDataTable, table_node_id(k + 1), table_node_id(k + 1), std::nullopt, {}});
  }
  std::set<StepPair> chain;
  for (std::size_t k = 1; k < recipe.size(); ++k) chain.emplace(k - 1, k);
  model.step_dependencies = to_step_edges(chain, step_ids);
  if (!step_ids.empty()) model.components.push_back(step_ids);
  std::sort(model.edges.begin(), model.edges.end());
  return model;
}

WorkflowModel build_parallel(const Recipe& recipe, const std::vector<ColumnEffect>& effects,
                             const std::vector<SchemaState>& schemas) {
  validate_alignment(recipe, schemas);
  const std::set<StepPair> dependencies = dependency_edges(recipe, effects);
  const auto groups = weak_components(recipe.size(), dependencies);
  std::vector<std::string> component_of(recipe.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t step : groups[g]) component_of[step] = std::to_string(g);
  }

  WorkflowModel model;
  model.name = model_name(recipe);
  model.model_kind = ModelKind::kParallel;

  std::map<ColumnId, std::size_t> version;
  std::map<ColumnId, std::string> current;  // live data node per column
  std::map<std::string, std::size_t> initial_node_index;
  auto data_node_id = [](ColumnId id, std::size_t v) {
    return "col_" + std::to_string(id.value) + "_v" + std::to_string(v);
  };
  auto make_data_node = [&](const Column& column, std::size_t v) {
    Node node{NodeKind::kDataColumn, data_node_id(column.id, v), column.label, std::nullopt, {}};
    node.payload.emplace(payload::kColumn, std::to_string(column.id.value));
    node.payload.emplace(payload::kVersion, std::to_string(v));
    return node;
  };

  for (const Column& column : schemas.front().columns) {
    version[column.id] = 0;
    current[column.id] = data_node_id(column.id, 0);
    initial_node_index[current[column.id]] = model.nodes.size();
    model.nodes.push_back(make_data_node(column, 0));
  }

  std::vector<std::string> step_ids;
  for (std::size_t k = 0; k < recipe.size(); ++k) {
    const RawOperation& op = recipe.operations[k];
    const ColumnEffect& effect = effects[k];
    const SchemaState& after = schemas[k + 1];
    const std::string& component = component_of[k];

    add_param_nodes(op, k, model, component);
    Node step = make_step_node(op, k);
    step.payload.emplace(payload::kComponent, component);
    step_ids.push_back(step.id);

    std::size_t inputs = 0;
    for (ColumnId id : effect.reads) {
      auto it = current.find(id);
      if (it == current.end()) continue;
      model.edges.push_back({it->second, step.id, std::nullopt});
      auto initial = initial_node_index.find(it->second);
      if (initial != initial_node_index.end()) {
        // initial columns join the cluster of their first reader
        model.nodes[initial->second].payload.emplace(payload::kComponent, component);
      }
      ++inputs;
    }

    for (ColumnId id : effect.deletes) current.erase(id);

    const std::set<ColumnId> created = effect.created_ids();
    std::vector<Node> outputs;
    for (const Column& column : after.columns) {
      const bool written = effect.writes.count(column.id) > 0;
      const bool fresh = created.count(column.id) > 0;
      if (!written && !fresh) continue;
      const std::size_t v = fresh ? 0 : ++version[column.id];
      if (fresh) version[column.id] = 0;
      Node data = make_data_node(column, v);
      data.payload.emplace(payload::kComponent, component);
      current[column.id] = data.id;
      model.edges.push_back({step.id, data.id, std::nullopt});
      outputs.push_back(std::move(data));
    }
    if (inputs == 1 && outputs.size() >= 2) {
      step.payload.emplace(payload::kPattern, "split");
    } else if (inputs >= 2 && outputs.size() == 1) {
      step.payload.emplace(payload::kPattern, "merge");
    }
    model.nodes.push_back(std::move(step));
    for (Node& data : outputs) model.nodes.push_back(std::move(data));
  }

  model.step_dependencies =
      to_step_edges(transitive_reduction(recipe.size(), dependencies), step_ids);
  for (const auto& group : groups) {
    std::vector<std::string> ids;
    for (std::size_t step : group) ids.push_back(step_ids[step]);
    model.components.push_back(std::move(ids));
  }
  std::sort(model.edges.begin(), model.edges.end());
  return model;
}

CollapsedModel build_collapsed(const Recipe& recipe, const std::vector<ColumnEffect>& effects,
                               const std::vector<SchemaState>& schemas, int threshold) {
  if (threshold < 2) {
    throw Error("invalid-threshold", "collapse threshold must be at least 2");
  }
  const WorkflowModel parallel = build_parallel(recipe, effects, schemas);
  const std::set<StepPair> dependencies = dependency_edges(recipe, effects);
  const auto groups = weak_components(recipe.size(), dependencies);

  // Maximal runs of component-consecutive steps with equal op id and write set.
  std::vector<std::vector<std::size_t>> runs;
  for (const auto& group : groups) {
    std::vector<std::size_t> run;
    auto flush = [&] {
      if (run.size() >= static_cast<std::size_t>(threshold)) runs.push_back(run);
      run.clear();
    };
    for (std::size_t step : group) {
      const bool extends = !run.empty() &&
                           recipe.operations[run.back()].op_id == recipe.operations[step].op_id &&
                           effects[run.back()].writes == effects[step].writes;
      if (!extends) flush();
      if (!effects[step].writes.empty()) {
        run.push_back(step);
      }
    }
    flush();
  }
  std::sort(runs.begin(), runs.end());

  CollapsedModel result;
  WorkflowModel& model = result.model;
  model.name = parallel.name;
  model.model_kind = ModelKind::kCollapsed;

  // representative process node per step
  std::vector<std::string> representative(recipe.size());
  for (std::size_t k = 0; k < recipe.size(); ++k) representative[k] = step_node_id(k);
  std::map<std::string, Node> summaries;  // keyed by first step id
  std::set<std::string> removed;
  for (const auto& run : runs) {
    const std::size_t first = run.front();
    const std::size_t last = run.back();
    const std::string id = "summary_" + std::to_string(first + 1);
    const std::string& op_id = recipe.operations[first].op_id;
    Node summary{NodeKind::kSummary, id, op_id + " × " + std::to_string(run.size()),
                 recipe.operations[first].index, {}};
    summary.payload.emplace(payload::kOp, op_id);
    summary.payload.emplace(payload::kCount, std::to_string(run.size()));
    summary.payload.emplace(payload::kFirstStep, std::to_string(first + 1));
    summary.payload.emplace(payload::kLastStep, std::to_string(last + 1));
    if (auto c = parallel.find(step_node_id(first))->get(payload::kComponent)) {
      summary.payload.emplace(payload::kComponent, *c);
    }
    summaries.emplace(step_node_id(first), std::move(summary));

    std::set<std::string> run_steps;
    for (std::size_t k : run) {
      representative[k] = id;
      run_steps.insert(step_node_id(k));
      removed.insert(step_node_id(k));
    }
    // parameters of collapsed steps live on in the detail model
    for (const Edge& edge : parallel.edges) {
      if (run_steps.count(edge.to) && parallel.find(edge.from)->kind == NodeKind::kParam) {
        removed.insert(edge.from);
      }
    }
    // intermediate versions: produced and consumed only inside the run
    std::map<std::string, std::pair<bool, bool>> produced;  // consumed inside, outside
    for (const Edge& edge : parallel.edges) {
      if (run_steps.count(edge.from)) produced.try_emplace(edge.to, false, false);
    }
    for (const Edge& edge : parallel.edges) {
      auto it = produced.find(edge.from);
      if (it == produced.end()) continue;
      (run_steps.count(edge.to) ? it->second.first : it->second.second) = true;
    }
    for (const auto& [data_id, use] : produced) {
      if (use.first && !use.second) removed.insert(data_id);
    }

    std::vector<RawOperation> inner_ops;
    std::vector<SchemaState> inner_schemas{schemas[first]};
    for (std::size_t k : run) {
      inner_ops.push_back(recipe.operations[k]);
      inner_schemas.push_back(schemas[k + 1]);
    }
    Recipe inner_recipe;
    inner_recipe.operations = std::move(inner_ops);
    DetailModel detail{id, build_linear(inner_recipe, inner_schemas)};
    detail.inner.name = model.name + "_" + id;
    result.details.push_back(std::move(detail));
  }

  std::map<std::string, std::string> rename;
  for (std::size_t k = 0; k < recipe.size(); ++k) rename[step_node_id(k)] = representative[k];

  for (const Node& node : parallel.nodes) {
    if (auto it = summaries.find(node.id); it != summaries.end()) {
      model.nodes.push_back(it->second);
    } else if (!removed.count(node.id)) {
      model.nodes.push_back(node);
    }
  }
  std::set<Edge> edges;
  for (const Edge& edge : parallel.edges) {
    if (removed.count(edge.from) && !rename.count(edge.from)) continue;
    if (removed.count(edge.to) && !rename.count(edge.to)) continue;
    Edge mapped = edge;
    if (auto it = rename.find(edge.from); it != rename.end()) mapped.from = it->second;
    if (auto it = rename.find(edge.to); it != rename.end()) mapped.to = it->second;
    edges.insert(std::move(mapped));
  }
  model.edges.assign(edges.begin(), edges.end());

  std::vector<std::string> process_ids;
  std::map<std::string, std::size_t> process_index;
  for (std::size_t k = 0; k < recipe.size(); ++k) {
    if (process_index.emplace(representative[k], process_ids.size()).second) {
      process_ids.push_back(representative[k]);
    }
  }
  std::set<StepPair> process_pairs;
  for (const auto& [i, j] : dependencies) {
    const std::size_t a = process_index[representative[i]];
    const std::size_t b = process_index[representative[j]];
    if (a != b) process_pairs.emplace(a, b);
  }
  model.step_dependencies =
      to_step_edges(transitive_reduction(process_ids.size(), process_pairs), process_ids);

  for (const auto& group : groups) {
    std::vector<std::string> ids;
    for (std::size_t step : group) {
      if (ids.empty() || ids.back() != representative[step]) ids.push_back(representative[step]);
    }
    model.components.push_back(std::move(ids));
  }
  return result;
}

WorkflowModel upstream_lineage(const WorkflowModel& model, std::string_view node_id) {
  return reachable_subgraph(model, node_id, true);
}

WorkflowModel downstream_impact(const WorkflowModel& model, std::string_view node_id) {
  return reachable_subgraph(model, node_id, false);
}

std::optional<std::string> check_model(const WorkflowModel& model) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (const Node& node : model.nodes) {
    if (!index.emplace(node.id, index.size()).second) return "duplicate node id " + node.id;
    if (node.kind == NodeKind::kStep && !node.step_index) return "step without index " + node.id;
  }
  std::vector<std::vector<std::size_t>> successors(model.nodes.size());
  std::vector<std::size_t> indegree(model.nodes.size(), 0);
  for (const auto* list : {&model.edges, &model.step_dependencies}) {
    for (const Edge& edge : *list) {
      auto from = index.find(edge.from);
      auto to = index.find(edge.to);
      if (from == index.end() || to == index.end()) {
        return "dangling edge " + edge.from + " -> " + edge.to;
      }
      successors[from->second].push_back(to->second);
      ++indegree[to->second];
    }
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop_front();
    ++visited;
    for (std::size_t next : successors[i]) {
      if (--indegree[next] == 0) ready.push_back(next);
    }
  }
  if (visited != model.nodes.size()) return "graph has a cycle";
  for (const auto& group : model.components) {
    for (const std::string& id : group) {
      const Node* node = model.find(id);
      if (node == nullptr || !is_process(node->kind)) return "component lists non-step " + id;
    }
  }
  return std::nullopt;
}

}  // namespace refineflow

#include "refineflow/emitters.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

namespace refineflow {

namespace {

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

bool in_view(NodeKind kind, ViewKind view) {
  switch (view) {
    case ViewKind::kCombined: return true;
    case ViewKind::kProcess: return is_process(kind);
    case ViewKind::kData: return is_data(kind);
  }
  return true;
}

std::string node_attributes(const Node& node) {
  std::string attrs = "label=" + quote(node.label) + ", shape=box, ";
  switch (node.kind) {
    case NodeKind::kStep:
      attrs += "style=filled, fillcolor=" + quote(kStepColor);
      break;
    case NodeKind::kSummary:
      attrs += "style=filled, peripheries=2, fillcolor=" + quote(kStepColor);
      break;
    case NodeKind::kDataTable:
    case NodeKind::kDataColumn:
      attrs += "style=\"rounded,filled\", fillcolor=" + quote(kDataColor);
      break;
    case NodeKind::kParam:
      attrs += "style=filled, fillcolor=" + quote(kParamColor);
      break;
  }
  return attrs;
}

// Inputs and outputs of each process node, in model node order.
struct ProcessIo {
  std::vector<const Node*> inputs;
  std::vector<const Node*> params;
  std::vector<const Node*> outputs;
};

std::map<std::string, ProcessIo> process_io(const WorkflowModel& model) {
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < model.nodes.size(); ++i) order[model.nodes[i].id] = i;
  std::map<std::string, ProcessIo> io;
  for (const Node* process : model.process_nodes()) io[process->id];
  for (const Edge& edge : model.edges) {
    const Node* from = model.find(edge.from);
    const Node* to = model.find(edge.to);
    if (from == nullptr || to == nullptr) continue;
    if (is_process(to->kind)) {
      (from->kind == NodeKind::kParam ? io[to->id].params : io[to->id].inputs).push_back(from);
    } else if (is_process(from->kind) && is_data(to->kind)) {
      io[from->id].outputs.push_back(to);
    }
  }
  auto by_order = [&](const Node* a, const Node* b) { return order[a->id] < order[b->id]; };
  for (auto& [id, entry] : io) {
    std::sort(entry.inputs.begin(), entry.inputs.end(), by_order);
    std::sort(entry.params.begin(), entry.params.end(), by_order);
    std::sort(entry.outputs.begin(), entry.outputs.end(), by_order);
  }
  return io;
}

std::vector<Edge> view_edges(const WorkflowModel& model, ViewKind view) {
  std::vector<Edge> edges;
  switch (view) {
    case ViewKind::kCombined:
      edges = model.edges;
      break;
    case ViewKind::kProcess:
      edges = model.step_dependencies;
      break;
    case ViewKind::kData: {
      const auto io = process_io(model);
      for (const Node* process : model.process_nodes()) {
        const ProcessIo& entry = io.at(process->id);
        for (const Node* in : entry.inputs) {
          for (const Node* out : entry.outputs) edges.push_back({in->id, out->id, process->label});
        }
      }
      break;
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// YW identifiers: sanitized label, suffixed with the step number on collision.
class NameTable {
 public:
  std::string claim(std::string_view label, const std::optional<std::size_t>& step) {
    const std::string base = sanitize_identifier(label);
    std::string name = base;
    if (taken_.count(name)) name = base + "_" + (step ? std::to_string(*step + 1) : "0");
    for (int n = 1; taken_.count(name); ++n) name = base + "_" + std::to_string(n);
    taken_.insert(name);
    return name;
  }

 private:
  std::set<std::string> taken_;
};

}  // namespace

std::string_view to_string(ViewKind view) {
  switch (view) {
    case ViewKind::kCombined: return "combined";
    case ViewKind::kProcess: return "process";
    case ViewKind::kData: return "data";
  }
  return "combined";
}

std::optional<ViewKind> parse_view(std::string_view text) {
  if (text == "combined") return ViewKind::kCombined;
  if (text == "process") return ViewKind::kProcess;
  if (text == "data") return ViewKind::kData;
  return std::nullopt;
}

std::string sanitize_identifier(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    const auto byte = static_cast<unsigned char>(text[i]);
    std::size_t width = 1;
    if (byte >= 0xF0) {
      width = 4;
    } else if (byte >= 0xE0) {
      width = 3;
    } else if (byte >= 0xC0) {
      width = 2;
    }
    const bool alnum = (byte >= '0' && byte <= '9') || (byte >= 'a' && byte <= 'z') ||
                       (byte >= 'A' && byte <= 'Z');
    out += alnum ? static_cast<char>(byte) : '_';
    i += width;
  }
  return out.empty() ? "_" : out;
}

std::string emit_dot(const WorkflowModel& model, ViewKind view) {
  std::ostringstream out;
  out << "digraph " << quote(sanitize_identifier(model.name)) << " {\n";
  out << "  rankdir=TB;\n";
  out << "  node [fontname=\"Helvetica\", fontsize=10];\n";
  out << "  edge [fontname=\"Helvetica\", fontsize=9];\n";

  const bool clustered = model.model_kind != ModelKind::kLinear;
  std::map<std::string, std::vector<const Node*>> clusters;
  std::vector<const Node*> loose;
  for (const Node& node : model.nodes) {
    if (!in_view(node.kind, view)) continue;
    auto component = node.get(payload::kComponent);
    if (clustered && component) {
      clusters[*component].push_back(&node);
    } else {
      loose.push_back(&node);
    }
  }
  std::vector<std::pair<std::string, std::vector<const Node*>>> ordered(clusters.begin(),
                                                                         clusters.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::stoul(a.first) < std::stoul(b.first);
  });
  for (const auto& [component, nodes] : ordered) {
    out << "  subgraph " << quote("cluster_" + component) << " {\n";
    out << "    label=" << quote("subworkflow " + std::to_string(std::stoul(component) + 1))
        << ";\n";
    out << "    style=dashed;\n";
    for (const Node* node : nodes) {
      out << "    " << quote(node->id) << " [" << node_attributes(*node) << "];\n";
    }
    out << "  }\n";
  }
  for (const Node* node : loose) {
    out << "  " << quote(node->id) << " [" << node_attributes(*node) << "];\n";
  }
  for (const Edge& edge : view_edges(model, view)) {
    out << "  " << quote(edge.from) << " -> " << quote(edge.to);
    if (edge.label) out << " [label=" << quote(*edge.label) << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string emit_yw(const WorkflowModel& model, ViewKind view) {
  const auto io = process_io(model);
  NameTable names;
  std::map<std::string, std::string> yw_name;

  std::map<std::string, const Node*> producer;
  std::set<std::string> consumed;
  for (const auto& [id, entry] : io) {
    for (const Node* out : entry.outputs) producer[out->id] = model.find(id);
    for (const Node* in : entry.inputs) consumed.insert(in->id);
  }
  for (const Node& node : model.nodes) {
    if (is_data(node.kind)) {
      auto it = producer.find(node.id);
      std::optional<std::size_t> step;
      if (it != producer.end()) step = it->second->step_index;
      yw_name[node.id] = names.claim(node.label, step);
    } else if (node.kind == NodeKind::kParam) {
      yw_name[node.id] = names.claim(node.get(payload::kParamKey).value_or(node.label),
                                     node.step_index);
    } else {
      yw_name[node.id] = names.claim(node.label, node.step_index);
    }
  }

  const bool with_params = view == ViewKind::kCombined;
  const std::string workflow = sanitize_identifier(model.name);
  std::ostringstream out;
  out << "# @begin " << workflow << "\n";
  for (const Node& node : model.nodes) {
    if (is_data(node.kind) && !producer.count(node.id)) {
      out << "# @in " << yw_name[node.id] << "\n";
    }
  }
  if (with_params) {
    for (const Node& node : model.nodes) {
      if (node.kind == NodeKind::kParam) out << "# @param " << yw_name[node.id] << "\n";
    }
  }
  for (const Node& node : model.nodes) {
    if (is_data(node.kind) && !consumed.count(node.id)) {
      out << "# @out " << yw_name[node.id] << "\n";
    }
  }
  for (const Node* process : model.process_nodes()) {
    const ProcessIo& entry = io.at(process->id);
    const std::string& name = yw_name[process->id];
    out << "#\n";
    out << "#   @begin " << name << "\n";
    for (const Node* in : entry.inputs) out << "#   @in " << yw_name[in->id] << "\n";
    if (with_params) {
      for (const Node* param : entry.params) out << "#   @param " << yw_name[param->id] << "\n";
    }
    for (const Node* produced : entry.outputs) {
      out << "#   @out " << yw_name[produced->id] << "\n";
    }
    out << "#   @end " << name << "\n";
  }
  out << "#\n";
  out << "# @end " << workflow << "\n";
  return out.str();
}

}  // namespace refineflow

#ifndef REFINEFLOW_CLI_HPP_
#define REFINEFLOW_CLI_HPP_

#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "refineflow/emitters.hpp"
#include "refineflow/graph_model.hpp"

namespace refineflow::cli {

enum class OutputFormat { kDot, kYw };
enum class QueryDirection { kUpstream, kDownstream };

struct Query {
  QueryDirection direction = QueryDirection::kUpstream;
  std::string node_id;
};

struct RunConfig {
  std::string input_path;
  std::string output_path = "-";  // "-" writes to the output stream
  ModelKind model_kind = ModelKind::kParallel;
  ViewKind view = ViewKind::kCombined;
  OutputFormat format = OutputFormat::kDot;
  int collapse_threshold = kDefaultCollapseThreshold;
  std::map<std::string, int> split_arity_overrides;
  std::optional<Query> query;
  bool verbose = false;  // also print info diagnostics
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRecipeError = 1;
inline constexpr int kExitUsage = 2;

// Parser -> effects -> model -> emitter. Diagnostics go to err, one line per
// diagnostic. Files are written through a temporary and renamed only once
// every output is ready. Returns one of the kExit* codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Detail file for a collapsed summary: "<stem>.detail.<summary-id>.<ext>",
// stem being the output path without its extension.
std::string detail_path(const std::string& output_path, const std::string& summary_id,
                        OutputFormat format);

// Command-line entry point; parses flags into a RunConfig and calls run().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace refineflow::cli

#endif  // REFINEFLOW_CLI_HPP_

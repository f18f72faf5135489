#include "refineflow/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "refineflow/effects.hpp"
#include "refineflow/recipe.hpp"

namespace refineflow::cli {

namespace {

namespace fs = std::filesystem;

struct PendingFile {
  fs::path path;
  std::string content;
};

std::string extension(OutputFormat format) { return format == OutputFormat::kDot ? "dot" : "yw"; }

std::string emit(const WorkflowModel& model, const RunConfig& config) {
  return config.format == OutputFormat::kDot ? emit_dot(model, config.view)
                                             : emit_yw(model, config.view);
}

void report(std::ostream& err, const Diagnostic& diagnostic, bool verbose) {
  if (diagnostic.severity == Severity::kInfo && !verbose) return;
  err << format_diagnostic(diagnostic) << '\n';
}

void usage_error(std::ostream& err, const std::string& message) {
  err << format_diagnostic({Severity::kError, std::nullopt, message, "usage"}) << '\n';
}

// Writes every file to a sibling temporary first; nothing is renamed into
// place unless all temporaries were written.
bool write_all(const std::vector<PendingFile>& files, std::ostream& err) {
  std::vector<fs::path> temps;
  auto discard = [&] {
    std::error_code ignored;
    for (const fs::path& temp : temps) fs::remove(temp, ignored);
  };
  for (const PendingFile& file : files) {
    fs::path temp = file.path;
    temp += ".tmp";
    std::ofstream stream(temp, std::ios::binary | std::ios::trunc);
    if (stream) temps.push_back(temp);
    stream << file.content;
    stream.close();
    if (!stream) {
      usage_error(err, "cannot write " + file.path.string());
      discard();
      return false;
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    fs::rename(temps[i], files[i].path, ec);
    if (ec) {
      usage_error(err, "cannot write " + files[i].path.string() + ": " + ec.message());
      discard();
      return false;
    }
  }
  return true;
}

std::optional<std::string> read_file(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream stream(path, std::ios::binary);
  if (!stream) return std::nullopt;
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

}  // namespace

std::string detail_path(const std::string& output_path, const std::string& summary_id,
                        OutputFormat format) {
  fs::path path(output_path);
  fs::path stem = path.parent_path() / path.stem();
  return stem.string() + ".detail." + summary_id + "." + extension(format);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.collapse_threshold < 2) {
    usage_error(err, "--collapse-threshold must be at least 2");
    return kExitUsage;
  }
  const auto text = read_file(config.input_path);
  if (!text) {
    usage_error(err, "cannot read input file '" + config.input_path + "'");
    return kExitUsage;
  }

  EffectOptions options;
  options.split_arity = config.split_arity_overrides;

  std::vector<std::pair<std::string, std::string>> outputs;  // (summary id, content)
  std::string main_content;
  try {
    const Recipe recipe = parse_recipe(*text, config.input_path);
    for (const Diagnostic& d : validate_recipe(recipe)) report(err, d, config.verbose);
    const SchemaState initial = infer_initial_schema(recipe, options);
    const Trace trace = trace_recipe(recipe, initial, options);
    for (const Diagnostic& d : trace.diagnostics) report(err, d, config.verbose);

    WorkflowModel model;
    std::vector<DetailModel> details;
    switch (config.model_kind) {
      case ModelKind::kLinear:
        model = build_linear(recipe, trace.states);
        break;
      case ModelKind::kParallel:
        model = build_parallel(recipe, trace.effects, trace.states);
        break;
      case ModelKind::kCollapsed: {
        CollapsedModel collapsed =
            build_collapsed(recipe, trace.effects, trace.states, config.collapse_threshold);
        model = std::move(collapsed.model);
        details = std::move(collapsed.details);
        break;
      }
    }

    if (config.query) {
      if (model.find(config.query->node_id) == nullptr) {
        usage_error(err, "query node '" + config.query->node_id + "' is not in the model");
        return kExitUsage;
      }
      model = config.query->direction == QueryDirection::kUpstream
                  ? upstream_lineage(model, config.query->node_id)
                  : downstream_impact(model, config.query->node_id);
    }

    main_content = emit(model, config);
    for (const DetailModel& detail : details) {
      if (model.find(detail.parent_summary_id) == nullptr) continue;
      outputs.emplace_back(detail.parent_summary_id, emit(detail.inner, config));
    }
  } catch (const Error& e) {
    err << format_diagnostic(e.to_diagnostic()) << '\n';
    return kExitRecipeError;
  }

  std::vector<PendingFile> files;
  std::string stem_source = config.output_path;
  if (config.output_path == "-") {
    // detail files land in the working directory, named after the input
    stem_source = fs::path(config.input_path).filename().string();
  } else {
    files.push_back({config.output_path, main_content});
  }
  for (const auto& [summary_id, content] : outputs) {
    files.push_back({detail_path(stem_source, summary_id, config.format), content});
  }
  if (!write_all(files, err)) return kExitUsage;
  if (config.output_path == "-") out << main_content;
  return kExitOk;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convert an OpenRefine operation history into YesWorkflow and DOT workflow models",
               "refineflow"};
  RunConfig config;
  std::string model = "parallel";
  std::string view = "combined";
  std::string format = "dot";
  std::vector<std::string> split_arity;
  std::string query;
  bool print_catalog = false;

  app.add_option("-i,--input", config.input_path, "Exported operation history (JSON)");
  app.add_option("-o,--output", config.output_path, "Output file, or - for standard output")
      ->capture_default_str();
  app.add_option("-t,--model", model, "Workflow model")
      ->check(CLI::IsMember({"linear", "parallel", "collapsed"}))
      ->capture_default_str();
  app.add_option("-v,--view", view, "Diagram view")
      ->check(CLI::IsMember({"combined", "process", "data"}))
      ->capture_default_str();
  app.add_option("-f,--format", format, "Output format")
      ->check(CLI::IsMember({"dot", "yw"}))
      ->capture_default_str();
  app.add_option("--collapse-threshold", config.collapse_threshold,
                 "Shortest run of similar steps replaced by a summary (collapsed model)")
      ->capture_default_str();
  app.add_option("--split-arity", split_arity,
                 "Part count for a data-dependent column split, as <column>=<k> (repeatable)");
  app.add_option("--query", query,
                 "Restrict output to upstream:<node-id> or downstream:<node-id>");
  app.add_flag("--verbose", config.verbose, "Also print info diagnostics");
  app.add_flag("--print-catalog", print_catalog, "Print the operation effect catalog and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    usage_error(err, e.what());
    return kExitUsage;
  }

  if (print_catalog) {
    out << catalog_reference();
    return kExitOk;
  }
  if (config.input_path.empty()) {
    usage_error(err, "--input is required");
    return kExitUsage;
  }
  config.model_kind = model == "linear"     ? ModelKind::kLinear
                      : model == "parallel" ? ModelKind::kParallel
                                            : ModelKind::kCollapsed;
  config.view = *parse_view(view);
  config.format = format == "dot" ? OutputFormat::kDot : OutputFormat::kYw;

  for (const std::string& entry : split_arity) {
    const auto eq = entry.rfind('=');
    int parts = 0;
    bool ok = eq != std::string::npos && eq > 0;
    if (ok) {
      try {
        std::size_t used = 0;
        parts = std::stoi(entry.substr(eq + 1), &used);
        ok = used == entry.size() - eq - 1 && parts >= 1;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      usage_error(err, "--split-arity expects <column>=<k> with k >= 1, got '" + entry + "'");
      return kExitUsage;
    }
    config.split_arity_overrides[entry.substr(0, eq)] = parts;
  }

  if (!query.empty()) {
    const auto colon = query.find(':');
    const std::string direction = query.substr(0, colon);
    if (colon == std::string::npos || colon + 1 == query.size() ||
        (direction != "upstream" && direction != "downstream")) {
      usage_error(err, "--query expects upstream:<node-id> or downstream:<node-id>");
      return kExitUsage;
    }
    config.query = Query{direction == "upstream" ? QueryDirection::kUpstream
                                                 : QueryDirection::kDownstream,
                         query.substr(colon + 1)};
  }
  return run(config, out, err);
}

}  // namespace refineflow::cli

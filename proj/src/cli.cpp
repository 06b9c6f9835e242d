#include "prune/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prune/analysis.hpp"
#include "prune/corpus.hpp"
#include "prune/interpreter.hpp"
#include "prune/io.hpp"
#include "prune/runtime.hpp"

namespace prune {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Graph load(const std::string& path) {
  try {
    return build_graph(parse_graph_file(path));
  } catch (const ParseError& e) {
    throw InputError(path + ": parse error: " + e.what());
  } catch (const SchemaError& e) {
    throw InputError(path + ": schema error: " + e.what());
  } catch (const GraphError& e) {
    throw InputError(path + ": " + std::string(to_string(e.kind())) + ": " + e.what());
  }
}

std::map<std::string, int> parse_pinning(const std::string& spec) {
  std::map<std::string, int> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("bad --pin entry '" + item + "', expected actor=core");
    try {
      out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("bad core number in --pin entry '" + item + "'");
    }
  }
  return out;
}

int cmd_check(const std::string& path, std::ostream& out) {
  const Graph g = load(path);
  const auto violations = check_all(g);
  render_violations(out, violations);
  if (!violations.empty()) return kRuleFailure;
  out << "ok: no rule violations\n";
  return kOk;
}

int cmd_analyze(const std::string& path, const std::string& output, std::ostream& out) {
  const Graph g = load(path);
  const ConsistencyReport report = analyze(g);
  if (output.empty()) {
    render_report(out, g, report);
  } else {
    std::ofstream f(output);
    if (!f) throw InputError("cannot write " + output);
    render_report(f, g, report);
  }
  return report.consistent ? kOk : kRuleFailure;
}

struct RunOptions {
  std::uint64_t iterations = 1;
  std::uint64_t seed = 1;
  std::string pin;
  std::string trace;
  bool oracle = false;
  int timeout_ms = 30000;
  int c_factor = 3;
};

int cmd_run(const std::string& path, const RunOptions& o, std::ostream& out, std::ostream& err) {
  const Graph g = load(path);
  const BehaviorRegistry registry = corpus::registry();
  for (const Actor& a : g.actors())
    if (!registry.contains(a.behavior))
      throw InputError("actor " + a.name + " uses unknown behavior '" + a.behavior + "'");

  RuntimeConfig config;
  config.source_firings = o.iterations;
  config.seed = o.seed;
  config.pinning = parse_pinning(o.pin);
  for (const auto& [name, core] : config.pinning) {
    if (!g.find_actor(name)) throw InputError("--pin names unknown actor '" + name + "'");
    if (core < 0) throw InputError("--pin core for '" + name + "' is negative");
  }
  config.timeout = std::chrono::milliseconds(o.timeout_ms);
  config.c_factor = o.c_factor;
  config.trace = !o.trace.empty();

  RunReport report;
  try {
    report = Runtime(g, registry, config).run();
  } catch (const RuntimeError& e) {
    err << "runtime: " << to_string(e.kind()) << ": " << e.what() << '\n';
    if (e.kind() == RuntimeError::Kind::InconsistentGraph) return kRuleFailure;
    return kRuntimeFailure;
  } catch (const FifoError& e) {
    err << "runtime: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  render_run(out, g, report);
  if (config.trace) {
    std::ofstream f(o.trace);
    if (!f) throw InputError("cannot write " + o.trace);
    write_trace(f, g, report);
  }
  if (report.rate_violations != 0) {
    err << "runtime: " << report.rate_violations << " token rate violations\n";
    return kRuntimeFailure;
  }
  if (o.oracle) {
    RunReport ref;
    try {
      ref = interpret(g, registry, config);
    } catch (const OracleDeadlock& e) {
      err << "oracle: OracleDeadlock: " << e.what() << '\n';
      return kRuntimeFailure;
    }
    if (ref.sink_digests != report.sink_digests) {
      err << "oracle: OracleMismatch: sink digests differ from the reference interpreter\n";
      for (const auto& [name, d] : ref.sink_digests) err << "  " << name << " expected " << to_hex(d) << '\n';
      return kRuntimeFailure;
    }
    out << "oracle: match\n";
  }
  return kOk;
}

int cmd_capacity(const std::string& path, int factor, std::ostream& out) {
  const Graph g = load(path);
  try {
    render_capacity(out, g, factor);
  } catch (const FifoError& e) {
    throw InputError(std::string("InvalidParams: ") + e.what());
  }
  return kOk;
}

int cmd_export_corpus(const std::string& dir, std::uint64_t seed, std::ostream& out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const BehaviorRegistry registry = corpus::registry();
  nlohmann::json golden = nlohmann::json::object();
  for (const auto& app : corpus::all_apps()) {
    const fs::path file = fs::path(dir) / (app.name + ".json");
    std::ofstream f(file);
    if (!f) throw InputError("cannot write " + file.string());
    f << serialize_graph(app.graph);

    const Graph g = build_graph(app.graph);
    RuntimeConfig config;
    config.source_firings = app.source_firings;
    config.seed = seed;
    const RunReport ref = interpret(g, registry, config);
    nlohmann::json sinks = nlohmann::json::object();
    for (const auto& [name, d] : ref.sink_digests) sinks[name] = to_hex(d);
    golden[app.name] = {{"iterations", app.source_firings}, {"seed", seed}, {"sinks", sinks}};
    out << "wrote " << file.string() << '\n';
  }
  const fs::path file = fs::path(dir) / "golden.json";
  std::ofstream(file) << golden.dump(2) << '\n';
  out << "wrote " << file.string() << '\n';
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PRUNE dataflow graph checker, analyzer and runtime", "prune"};
  app.require_subcommand(1);

  std::string graph_path;
  auto* check = app.add_subcommand("check", "Check the design rules");
  check->add_option("graph", graph_path, "Graph file")->required();

  std::string output;
  auto* analyze_cmd = app.add_subcommand("analyze", "Decompose DPGs and compute schedules and buffer bounds");
  analyze_cmd->add_option("graph", graph_path, "Graph file")->required();
  analyze_cmd->add_option("-o,--output", output, "Write the report here instead of stdout");

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Execute the graph with one thread per actor");
  run->add_option("graph", graph_path, "Graph file")->required();
  run->add_option("--iterations", run_opts.iterations, "Firings of every source actor");
  run->add_option("--seed", run_opts.seed, "Behavior seed");
  run->add_option("--pin", run_opts.pin, "Core pinning, e.g. gauss=0,thres=1");
  run->add_option("--trace", run_opts.trace, "Write a per-transaction occupancy trace");
  run->add_flag("--oracle", run_opts.oracle, "Compare sink digests with the reference interpreter");
  run->add_option("--timeout-ms", run_opts.timeout_ms, "Run timeout")->check(CLI::PositiveNumber);
  run->add_option("--c-factor", run_opts.c_factor, "Buffering factor C")->check(CLI::Range(2, 1 << 20));

  int factor = 3;
  auto* capacity_cmd = app.add_subcommand("capacity", "Print FIFO capacities and layouts");
  capacity_cmd->add_option("graph", graph_path, "Graph file")->required();
  capacity_cmd->add_option("--c-factor", factor, "Buffering factor C");

  std::string dir;
  std::uint64_t seed = 1;
  auto* export_cmd = app.add_subcommand("export-corpus", "Write the corpus graphs and golden digests");
  export_cmd->add_option("dir", dir, "Output directory")->required();
  export_cmd->add_option("--seed", seed, "Behavior seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (check->parsed()) return cmd_check(graph_path, out);
    if (analyze_cmd->parsed()) return cmd_analyze(graph_path, output, out);
    if (run->parsed()) return cmd_run(graph_path, run_opts, out, err);
    if (capacity_cmd->parsed()) return cmd_capacity(graph_path, factor, out);
    if (export_cmd->parsed()) return cmd_export_corpus(dir, seed, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace prune

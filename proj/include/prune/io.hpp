#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "prune/analysis.hpp"
#include "prune/graph.hpp"
#include "prune/rules.hpp"
#include "prune/runtime.hpp"

namespace prune {

/// Malformed JSON. line/column are 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed JSON that does not match the graph schema. `field` is a path
/// such as "actors[2].kind".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// `base_dir` resolves relative "delay_payload_file" entries.
GraphDescription parse_graph(const std::string& text, const std::filesystem::path& base_dir = {});
GraphDescription parse_graph_file(const std::filesystem::path& path);
std::string serialize_graph(const GraphDescription& description);

std::vector<unsigned char> from_hex(const std::string& hex);

/// "rule 4 single-sided dynamism: x: <message>", one line per violation.
void render_violations(std::ostream& os, const std::vector<Violation>& violations);
void render_report(std::ostream& os, const Graph& graph, const ConsistencyReport& report);
void render_capacity(std::ostream& os, const Graph& graph, int factor);
void render_run(std::ostream& os, const Graph& graph, const RunReport& report);

}  // namespace prune

#pragma once

#include <string>

#include "prune/graph.hpp"
#include "prune/io.hpp"

namespace test {

inline std::string fixture_path(const std::string& name) { return std::string(PRUNE_FIXTURES) + "/" + name + ".json"; }
inline std::string corpus_path(const std::string& name) { return std::string(PRUNE_CORPUS) + "/" + name + ".json"; }

inline prune::GraphDescription fixture_desc(const std::string& name) {
  return prune::parse_graph_file(fixture_path(name));
}
inline prune::Graph fixture(const std::string& name) { return prune::build_graph(fixture_desc(name)); }

inline prune::PortDesc in(std::string id, prune::PortKind kind = prune::PortKind::Srp, int atr = 1) {
  return {std::move(id), prune::Direction::In, kind, atr, 0};
}
inline prune::PortDesc out(std::string id, prune::PortKind kind = prune::PortKind::Srp, int atr = 1) {
  return {std::move(id), prune::Direction::Out, kind, atr, 0};
}
inline prune::FifoDesc fifo(std::string id, std::string src, std::string dst, int delay = 0, int token_bytes = 1) {
  prune::FifoDesc f;
  f.id = std::move(id);
  f.src = std::move(src);
  f.dst = std::move(dst);
  f.delay = delay;
  f.token_bytes = token_bytes;
  return f;
}

/// s -> a1 -> ... -> an -> t, all rate `rate`.
inline prune::GraphDescription chain(int n, int rate = 1, const std::string& behavior = "generic") {
  using prune::ActorKind;
  prune::GraphDescription g;
  g.name = "chain";
  g.actors.push_back({"s", ActorKind::StaticProcessing, behavior, {}, {out("out", prune::PortKind::Srp, rate)}});
  std::string prev = "s";
  for (int i = 1; i <= n; ++i) {
    const std::string a = "a" + std::to_string(i);
    g.actors.push_back({a, ActorKind::StaticProcessing, behavior, {},
                        {in("in", prune::PortKind::Srp, rate), out("out", prune::PortKind::Srp, rate)}});
    g.fifos.push_back(fifo(prev + "_" + a, prev + ".out", a + ".in"));
    prev = a;
  }
  g.actors.push_back({"t", ActorKind::StaticProcessing, behavior, {}, {in("in", prune::PortKind::Srp, rate)}});
  g.fifos.push_back(fifo(prev + "_t", prev + ".out", "t.in"));
  return g;
}

}  // namespace test

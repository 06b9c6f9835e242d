#include <doctest.h>

#include <set>

#include "prune/graph.hpp"
#include "prune/io.hpp"
#include "support.hpp"

using namespace prune;
using test::fifo;
using test::in;
using test::out;

namespace {

GraphDescription dynamic_actor() {
  GraphDescription g;
  g.actors = {
      {"q", ActorKind::Configuration, "generic", {}, {{"c", Direction::Out, PortKind::ControlOut, 1, 1}}},
      {"s", ActorKind::StaticProcessing, "generic", {}, {out("out")}},
      {"x", ActorKind::Dynamic, "generic", {},
       {in("c", PortKind::ControlIn), in("p2", PortKind::Drp, 1), out("p3", PortKind::Drp, 2)}},
      {"t", ActorKind::StaticProcessing, "generic", {}, {in("in", PortKind::Srp, 2)}},
  };
  g.fifos = {fifo("f1", "q.c", "x.c"), fifo("f2", "s.out", "x.p2"), fifo("f3", "x.p3", "t.in")};
  g.control_table = {{"q.c", "x.p2", 1}, {"q.c", "x.p3", 1}};
  return g;
}

GraphError::Kind build_error(const GraphDescription& d) {
  try {
    build_graph(d);
  } catch (const GraphError& e) {
    return e.kind();
  }
  FAIL("build_graph accepted an invalid description");
  return GraphError::Kind::BadFifo;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("a dynamic actor keeps its token rates") {
    const Graph g = build_graph(dynamic_actor());
    const PortId p3 = *g.find_port("x.p3");
    CHECK(g.port(p3).atr == 2);
    CHECK(g.port(p3).itr() == 0);
    CHECK(g.fifo(*g.find_fifo("f3")).rate == 2);
    CHECK(g.fifo(*g.find_fifo("f1")).rate == 1);
    CHECK(g.port(*g.find_port("x.c")).kind == PortKind::ControlIn);
  }

  TEST_CASE("minimal source to sink chain") {
    const Graph g = build_graph(test::chain(0));
    CHECK(g.fifos().size() == 1);
    CHECK(g.fifo(0).rate == 1);
    CHECK(g.fifo(0).delay == 0);
    CHECK(g.is_source(*g.find_actor("s")));
    CHECK(g.is_sink(*g.find_actor("t")));
  }

  TEST_CASE("rate mismatch between DRP and fifo") {
    GraphDescription d = dynamic_actor();
    d.fifos[2].rate = 3;
    CHECK(build_error(d) == GraphError::Kind::RateMismatch);
  }

  TEST_CASE("every port rate equals its fifo rate") {
    for (const char* name : {"one_branch", "two_branches", "three_components", "composite", "static_chain", "unaligned_delay"}) {
      const Graph g = test::fixture(name);
      for (const Port& p : g.ports())
        for (FifoId f : p.fifos) CHECK(p.atr == g.fifo(f).rate);
    }
  }

  TEST_CASE("structural errors") {
    SUBCASE("dangling port") {
      GraphDescription d = test::chain(1);
      d.fifos.pop_back();
      CHECK(build_error(d) == GraphError::Kind::DanglingPort);
    }
    SUBCASE("duplicate actor id") {
      GraphDescription d = test::chain(1);
      d.actors[1].id = "s";
      CHECK(build_error(d) == GraphError::Kind::DuplicateId);
    }
    SUBCASE("unknown port reference") {
      GraphDescription d = test::chain(1);
      d.fifos[0].dst = "a1.nope";
      CHECK(build_error(d) == GraphError::Kind::UnknownReference);
    }
    SUBCASE("delay payload of the wrong size") {
      GraphDescription d = test::chain(1);
      d.fifos[0].delay = 2;
      d.fifos[0].delay_payload = std::vector<unsigned char>{1};
      CHECK(build_error(d) == GraphError::Kind::BadFifo);
    }
    SUBCASE("DRP on a static actor") {
      GraphDescription d = test::chain(1);
      d.actors[1].ports[0].kind = PortKind::Drp;
      CHECK(build_error(d) == GraphError::Kind::BadActorShape);
    }
    SUBCASE("uncontrolled DRP") {
      GraphDescription d = dynamic_actor();
      d.control_table.pop_back();
      CHECK(build_error(d) == GraphError::Kind::Uncontrolled);
    }
    SUBCASE("two controlling entries in one column") {
      GraphDescription d = dynamic_actor();
      d.actors[0].ports.push_back({"c2", Direction::Out, PortKind::ControlOut, 1, 1});
      d.actors.push_back({"x2", ActorKind::Dynamic, "generic", {}, {in("c", PortKind::ControlIn), out("o", PortKind::Drp)}});
      d.actors.push_back({"t2", ActorKind::StaticProcessing, "generic", {}, {in("in")}});
      d.fifos.push_back(fifo("f4", "q.c2", "x2.c"));
      d.fifos.push_back(fifo("f5", "x2.o", "t2.in"));
      d.control_table.push_back({"q.c2", "x2.o", 1});
      d.control_table.push_back({"q.c2", "x.p3", 1});
      CHECK(build_error(d) == GraphError::Kind::BadControlTable);
    }
    SUBCASE("element beyond the declared control length") {
      GraphDescription d = dynamic_actor();
      d.control_table[0].element = 2;
      CHECK(build_error(d) == GraphError::Kind::BadControlTable);
    }
  }

  TEST_CASE("zero-filled delay payload by default") {
    GraphDescription d = test::chain(1);
    d.fifos[0].delay = 3;
    d.fifos[0].token_bytes = 2;
    const Graph g = build_graph(d);
    CHECK(g.fifo(0).delay_payload == std::vector<unsigned char>(6, 0));
  }

  TEST_CASE("control lookup") {
    const Graph g = build_graph(dynamic_actor());
    const ControlBinding b = control_lookup(g, *g.find_port("x.p2"));
    CHECK(g.port_name(b.control_port) == "q.c");
    CHECK(b.element == 1);
    CHECK_THROWS_AS(control_lookup(g, *g.find_port("s.out")), GraphError);
  }

  TEST_CASE("adjacency of the three-component graph") {
    const Graph g = test::fixture("three_components");
    const Adjacency adj(g);
    auto id = [&](const char* n) { return *g.find_actor(n); };
    CHECK(adj.adjacent(id("x"), id("a1")));
    CHECK(adj.adjacent(id("a1"), id("a3")));
    CHECK(adj.adjacent(id("a3"), id("y")));
    CHECK(adj.adjacent(id("x"), id("y")));  // the direct FIFO the dummy stands in for
    CHECK_FALSE(adj.adjacent(id("a1"), id("a4")));
  }

  TEST_CASE("adjacency is symmetric, irreflexive and matches brute force") {
    for (const char* name : {"one_branch", "rule3_subchain", "rule5_encapsulation", "three_components", "composite", "zero_delay_cycle"}) {
      const Graph g = test::fixture(name);
      const Adjacency adj(g);
      std::set<std::pair<ActorId, ActorId>> expected;
      for (const Fifo& f : g.fifos()) {
        const ActorId a = g.port(f.src).actor, b = g.port(f.dst).actor;
        if (a != b) expected.insert({std::min(a, b), std::max(a, b)});
      }
      const auto pairs = adj.pairs();
      CHECK(std::set(pairs.begin(), pairs.end()) == expected);
      CHECK(pairs.size() == expected.size());
      for (ActorId a = 0; a < g.actors().size(); ++a) {
        CHECK_FALSE(adj.adjacent(a, a));
        for (ActorId b = 0; b < g.actors().size(); ++b) CHECK(adj.adjacent(a, b) == adj.adjacent(b, a));
      }
    }
  }

  TEST_CASE("single actor without fifos has no adjacency") {
    GraphDescription d;
    d.actors.push_back({"a", ActorKind::StaticProcessing, "generic", {}, {}});
    CHECK(Adjacency(build_graph(d)).pairs().empty());
  }

  TEST_CASE("parallel fifos give one adjacency pair") {
    GraphDescription d;
    d.actors = {{"a", ActorKind::StaticProcessing, "generic", {}, {out("o1"), out("o2")}},
                {"b", ActorKind::StaticProcessing, "generic", {}, {in("i1"), in("i2")}}};
    d.fifos = {fifo("f1", "a.o1", "b.i1"), fifo("f2", "a.o2", "b.i2")};
    CHECK(Adjacency(build_graph(d)).pairs().size() == 1);
  }

  TEST_CASE("describe round-trips through build_graph") {
    for (const char* name : {"dynamic_actor", "three_components", "composite", "unaligned_delay"}) {
      const GraphDescription d = std::string(name) == "dynamic_actor" ? dynamic_actor() : test::fixture_desc(name);
      const Graph g = build_graph(d);
      const Graph again = build_graph(g.describe());
      CHECK(serialize_graph(again.describe()) == serialize_graph(g.describe()));
      CHECK(again.ports().size() == g.ports().size());
    }
  }
}

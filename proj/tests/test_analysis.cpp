#include <doctest.h>

#include <algorithm>

#include "prune/analysis.hpp"
#include "support.hpp"

using namespace prune;
using test::fifo;
using test::in;
using test::out;

namespace {

std::string with_prefix(const std::string& prefix, const std::string& qualified) { return prefix + qualified; }

// Disjoint union of two descriptions, the second one renamed with `prefix`.
GraphDescription doubled(const GraphDescription& d, const std::string& prefix) {
  GraphDescription out = d;
  for (ActorDesc a : d.actors) {
    a.id = prefix + a.id;
    out.actors.push_back(a);
  }
  for (FifoDesc f : d.fifos) {
    f.id = prefix + f.id;
    f.src = with_prefix(prefix, f.src);
    f.dst = with_prefix(prefix, f.dst);
    out.fifos.push_back(f);
  }
  for (ControlEntry e : d.control_table) {
    e.control = with_prefix(prefix, e.control);
    e.drp = with_prefix(prefix, e.drp);
    out.control_table.push_back(e);
  }
  return out;
}

std::vector<std::string> names(const Graph& g, const std::vector<ActorId>& ids) {
  std::vector<std::string> out;
  for (ActorId a : ids) out.push_back(g.actor(a).name);
  return out;
}

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
}

Region region_of(const Graph& g, std::initializer_list<const char*> actors) {
  Region r{"test", {}};
  for (const char* a : actors) r.actors.push_back(*g.find_actor(a));
  return r;
}

// a -> b -> a with a source feeding a and b feeding a sink.
GraphDescription two_cycle(int rate, int back_delay) {
  GraphDescription d;
  d.actors = {{"a", ActorKind::StaticProcessing, "generic", {}, {in("in", PortKind::Srp, rate), out("out", PortKind::Srp, rate)}},
              {"b", ActorKind::StaticProcessing, "generic", {}, {in("in", PortKind::Srp, rate), out("out", PortKind::Srp, rate)}}};
  d.fifos = {fifo("ab", "a.out", "b.in"), fifo("ba", "b.out", "a.in", back_delay)};
  return d;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("three-component graph decomposes into Z1, Z2, Z3") {
    const Graph g = test::fixture("three_components");
    const auto report = analyze(g);
    REQUIRE(report.consistent);
    REQUIRE(report.dpgs.size() == 1);
    const Dpg& d = report.dpgs[0];
    CHECK(g.actor(d.q).name == "q");
    CHECK(g.actor(d.x).name == "x");
    CHECK(g.actor(d.y).name == "y");
    REQUIRE(d.m() == 3);
    CHECK(d.dcs[0].member_names(g) == std::vector<std::string>{"a1", "a2", "a3"});
    CHECK(d.dcs[1].member_names(g) == std::vector<std::string>{"a4"});
    CHECK(d.dcs[2].member_names(g) == std::vector<std::string>{"d"});
    CHECK(d.dcs[2].actors.empty());
    CHECK(validate_dpg(g, d).empty());
  }

  TEST_CASE("identify_dpgs") {
    CHECK(identify_dpgs(test::fixture("static_chain")).empty());
    const auto one = identify_dpgs(test::fixture("three_components"));
    CHECK(one.size() == 1);
    const Graph two = build_graph(doubled(test::fixture_desc("three_components"), "k_"));
    const auto dpgs = identify_dpgs(two);
    REQUIRE(dpgs.size() == 2);
    CHECK(two.actor(dpgs[0].x).name != two.actor(dpgs[1].x).name);
    const auto report = analyze(two);
    CHECK(report.consistent);
    CHECK(report.schedules.size() == 1 + 3 + 3);
  }

  TEST_CASE("x and y joined only by a direct fifo") {
    GraphDescription d = test::fixture_desc("one_branch");
    d.actors.erase(std::remove_if(d.actors.begin(), d.actors.end(), [](const ActorDesc& a) { return a.id == "a"; }),
                   d.actors.end());
    d.fifos.erase(std::remove_if(d.fifos.begin(), d.fifos.end(),
                                 [](const FifoDesc& f) { return f.id == "x_a" || f.id == "a_y"; }),
                  d.fifos.end());
    d.fifos.push_back(fifo("x_y", "x.o1", "y.i1"));
    const Graph g = build_graph(d);
    const auto report = analyze(g);
    REQUIRE(report.consistent);
    REQUIRE(report.dpgs[0].m() == 1);
    CHECK(report.dpgs[0].dcs[0].dummy == std::optional<std::string>("d"));
  }

  TEST_CASE("two single-actor subchains give two components") {
    const Graph g = test::fixture("two_branches");
    const auto dpgs = identify_dpgs(g);
    REQUIRE(dpgs.size() == 1);
    const Dpg d = decompose_dcs(g, dpgs[0]);
    REQUIRE(d.m() == 2);
    CHECK(names(g, d.dcs[0].actors) == std::vector<std::string>{"a1"});
    CHECK(names(g, d.dcs[1].actors) == std::vector<std::string>{"a2"});
  }

  TEST_CASE("declared control length differing from M") {
    GraphDescription d = test::fixture_desc("three_components");
    d.actors[0].ports[0].control_len = 2;
    for (auto& f : d.fifos)
      if (f.src == "q.c") f.token_bytes = 2;
    for (auto& e : d.control_table)
      if (e.element == 3) e.element = 2;
    const auto report = analyze(build_graph(d));
    CHECK_FALSE(report.consistent);
    CHECK(has_code(report.diagnostics, "BijectionFailure"));
  }

  TEST_CASE("component that never reaches y") {
    GraphDescription d = test::fixture_desc("three_components");
    for (auto& a : d.actors)
      if (a.id == "x") a.ports.push_back(out("o5", PortKind::Drp));
    d.actors.push_back({"dead", ActorKind::StaticProcessing, "generic", {}, {in("in")}});
    d.fifos.push_back(fifo("x_dead", "x.o5", "dead.in"));
    d.control_table.push_back({"q.c", "x.o5", 3});
    const Graph g = build_graph(d);
    REQUIRE(check_all(g).empty());
    const auto report = analyze(g);
    CHECK_FALSE(report.consistent);
    CHECK(has_code(report.diagnostics, "SurjectivityFailure"));
  }

  TEST_CASE("schedules") {
    SUBCASE("linear chain") {
      const Graph g = build_graph(test::chain(1));
      const Schedule s = compute_schedule(g, region_of(g, {"s", "a1", "t"}));
      std::vector<std::string> order;
      for (const auto& e : s.firings) order.push_back(g.actor(e.actor).name);
      CHECK(order == std::vector<std::string>{"s", "a1", "t"});
      CHECK(is_periodic(g, s));
    }
    SUBCASE("zero-delay two-cycle deadlocks") {
      const Graph g = build_graph(two_cycle(1, 0));
      try {
        compute_schedule(g, region_of(g, {"a", "b"}));
        FAIL("expected DeadlockError");
      } catch (const DeadlockError& e) {
        CHECK(names(g, e.cycle()) == std::vector<std::string>{"a", "b"});
        CHECK(std::string(e.what()).find("a -> b -> a") != std::string::npos);
      }
    }
    SUBCASE("two-cycle with rate 2 and delay 2 on the back edge") {
      const Graph g = build_graph(two_cycle(2, 2));
      const Schedule s = compute_schedule(g, region_of(g, {"a", "b"}));
      REQUIRE(s.firings.size() == 2);
      CHECK(g.actor(s.firings[0].actor).name == "a");
      CHECK(g.actor(s.firings[1].actor).name == "b");
      CHECK(is_periodic(g, s));
    }
  }

  TEST_CASE("buffer bounds") {
    SUBCASE("rate-1 chain") {
      const auto r = analyze(build_graph(test::chain(3)));
      REQUIRE(r.consistent);
      for (int b : r.bounds.beta) CHECK(b == 1);
    }
    SUBCASE("rate 4, one delay token, write before read") {
      const auto r = analyze(test::fixture("unaligned_delay"));
      REQUIRE(r.consistent);
      CHECK(r.bounds.beta[0] == 5);
    }
    SUBCASE("rate 4, delay 4") {
      GraphDescription d = test::fixture_desc("unaligned_delay");
      d.fifos[0].delay = 4;
      const auto r = analyze(build_graph(d));
      REQUIRE(r.consistent);
      CHECK(r.bounds.beta[0] == 8);
    }
  }

  TEST_CASE("analyze verdicts") {
    CHECK(analyze(test::fixture("static_chain")).consistent);
    CHECK(analyze(test::fixture("static_chain")).dpgs.empty());

    const auto unbalanced = analyze(test::fixture("dpd_unbalanced"));
    CHECK_FALSE(unbalanced.consistent);
    REQUIRE(unbalanced.violations.size() == 1);
    CHECK(unbalanced.violations[0].rule == 2);

    const auto cycle = analyze(test::fixture("zero_delay_cycle"));
    CHECK_FALSE(cycle.consistent);
    REQUIRE(cycle.diagnostics.size() == 1);
    CHECK(cycle.diagnostics[0].code == "DeadlockError");
    CHECK(cycle.diagnostics[0].message.find("a -> b -> a") != std::string::npos);

    CHECK(analyze(build_graph(parse_graph_file(test::corpus_path("motion_detection")))).consistent);
  }

  TEST_CASE("schedules are periodic and M is within bounds") {
    for (const char* name : {"one_branch", "two_branches", "three_components", "unaligned_delay", "static_chain"}) {
      INFO(name);
      const Graph g = test::fixture(name);
      const auto r = analyze(g);
      REQUIRE(r.consistent);
      for (const auto& s : r.schedules) CHECK(is_periodic(g, s));
      for (const auto& d : r.dpgs) {
        const auto k = std::count_if(g.drps(d.x).begin(), g.drps(d.x).end(), [&](PortId) { return true; });
        const auto l = std::count_if(g.drps(d.y).begin(), g.drps(d.y).end(), [&](PortId) { return true; });
        CHECK(d.m() >= 1);
        CHECK(d.m() <= std::min(k, l));
      }
      for (FifoId f = 0; f < g.fifos().size(); ++f)
        for (const auto& [label, bounds] : r.bounds.per_region)
          if (auto it = bounds.find(f); it != bounds.end()) CHECK(r.bounds.beta[f] >= it->second);
    }
  }

  TEST_CASE("dummy actors stay out of schedules") {
    const Graph g = test::fixture("three_components");
    const auto r = analyze(g);
    for (const auto& s : r.schedules)
      for (const auto& e : s.firings) CHECK(e.actor < g.actors().size());
    CHECK_FALSE(g.find_actor("d").has_value());
  }
}

#include <doctest.h>

#include <cstring>

#include "prune/analysis.hpp"
#include "prune/corpus.hpp"
#include "prune/interpreter.hpp"
#include "support.hpp"

using namespace prune;
using test::fifo;
using test::in;
using test::out;

namespace {

RuntimeConfig firings(std::uint64_t n, bool capture = true) {
  RuntimeConfig c;
  c.source_firings = n;
  c.capture_sink_bytes = capture;
  return c;
}

class Counter final : public ActorBehavior {
 public:
  void fire(FiringContext& ctx) override { ctx.output(0)[0] = static_cast<unsigned char>(ctx.firing() + 1); }
};

}  // namespace

TEST_SUITE("interpreter") {
  TEST_CASE("pass-through chain") {
    GraphDescription d = test::chain(2, 1, "copy");
    d.actors[0].behavior = "counter";
    BehaviorRegistry reg = BehaviorRegistry::with_builtins();
    reg.add("counter", [](const BehaviorContext&) { return std::make_unique<Counter>(); });
    const RunReport r = interpret(build_graph(d), reg, firings(3));
    CHECK(r.sink_bytes.at("t") == std::vector<unsigned char>{1, 2, 3});
    CHECK(r.firing_log.size() == 4 * 3);
    for (int m : r.max_occupancy) CHECK(m == 1);
  }

  TEST_CASE("zero delay payload is the first sink token") {
    GraphDescription d = test::fixture_desc("unaligned_delay");
    d.actors[0].behavior = "copy";
    d.actors[1].behavior = "copy";
    const RunReport r = interpret(build_graph(d), BehaviorRegistry::with_builtins(), firings(2));
    const auto& bytes = r.sink_bytes.at("t");
    REQUIRE(bytes.size() == 8);
    CHECK(bytes[0] == 0);
    CHECK(bytes[1] == 0);  // firing 0 of the source writes 0,0,0,0
    CHECK(r.max_occupancy[0] == 5);
  }

  TEST_CASE("broadcast fan-out of three") {
    GraphDescription d;
    d.actors = {{"s", ActorKind::StaticProcessing, "copy", {}, {out("out")}}};
    for (int i = 1; i <= 3; ++i) {
      const std::string t = "t" + std::to_string(i);
      d.actors.push_back({t, ActorKind::StaticProcessing, "copy", {}, {in("in")}});
      d.fifos.push_back(fifo("f" + std::to_string(i), "s.out", t + ".in"));
    }
    const RunReport r = interpret(build_graph(d), BehaviorRegistry::with_builtins(), firings(5));
    CHECK(r.max_occupancy == std::vector<int>{1, 1, 1});
    CHECK(r.sink_digests.size() == 3);
  }

  TEST_CASE("unbounded queues drain back to the delays") {
    for (const auto& app : {corpus::motion_detection(16, 16, 8), corpus::dynamic_predistortion(4, 10, 32, 20),
                            corpus::adaptive_bypass(10)}) {
      INFO(app.name);
      const Graph g = build_graph(app.graph);
      const RunReport r = interpret(g, corpus::registry(), firings(app.source_firings, false));
      for (FifoId f = 0; f < g.fifos().size(); ++f) CHECK(r.max_occupancy[f] >= g.fifo(f).delay);
    }
  }

  TEST_CASE("tokens left behind raise OracleDeadlock") {
    class Flip final : public ActorBehavior {
     public:
      std::vector<bool> control(const ControlToken& token, std::span<const DrpBinding> drps) override {
        auto a = ActorBehavior::control(token, drps);
        a.flip();
        return a;
      }
      void fire(FiringContext&) override {}
    };
    GraphDescription d = test::fixture_desc("one_branch");
    for (auto& a : d.actors)
      if (a.id == "x") a.behavior = "flip";
    BehaviorRegistry reg = BehaviorRegistry::with_builtins();
    reg.add("flip", [](const BehaviorContext&) { return std::make_unique<Flip>(); });
    CHECK_THROWS_AS(interpret(build_graph(d), reg, firings(4)), OracleDeadlock);
  }

  TEST_CASE("refuses inconsistent graphs") {
    CHECK_THROWS_AS(interpret(test::fixture("zero_delay_cycle"), BehaviorRegistry::with_builtins(), firings(1)),
                    RuntimeError);
  }

  TEST_CASE("deterministic firing log") {
    const Graph g = test::fixture("three_components");
    const auto a = interpret(g, BehaviorRegistry::with_builtins(), firings(20));
    const auto b = interpret(g, BehaviorRegistry::with_builtins(), firings(20));
    CHECK(a.firing_log == b.firing_log);
    CHECK(a.sink_digests == b.sink_digests);
  }
}

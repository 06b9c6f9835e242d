#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prune/analysis.hpp"
#include "prune/io.hpp"
#include "support.hpp"

using namespace prune;

TEST_SUITE("io") {
  TEST_CASE("motion detection corpus file") {
    const GraphDescription d = parse_graph_file(test::corpus_path("motion_detection"));
    CHECK(d.actors.size() == 5);
    int delayed = 0;
    for (const auto& f : d.fifos) delayed += f.delay > 0;
    CHECK(delayed == 1);
  }

  TEST_CASE("empty text is a parse error") { CHECK_THROWS_AS(parse_graph(""), ParseError); }

  TEST_CASE("parse errors carry a position") {
    try {
      parse_graph("{\n  \"actors\": [\n    {,\n  ]\n}");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() > 0);
    }
  }

  TEST_CASE("schema errors name the field") {
    const char* bad_kind = R"({"actors": [{"id": "a", "kind": "magic", "ports": []}], "fifos": []})";
    try {
      parse_graph(bad_kind);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.field() == "actors[0].kind");
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_graph(R"({"actors": [], "fifos": [], "extra": 1})"), SchemaError);
    CHECK_THROWS_AS(parse_graph(R"({"actors": [{"kind": "static", "ports": []}], "fifos": []})"), SchemaError);
    CHECK_THROWS_AS(parse_graph(R"({"actors": [], "fifos": [{"id": "f", "src": "a.o", "dst": "b.i", "delay": -1}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_graph(R"({"actors": [], "fifos": [{"id": "f", "src": "a.o", "dst": "b.i",
                                   "delay_payload_hex": "0g"}]})"),
                    SchemaError);
  }

  TEST_CASE("hex and file delay payloads") {
    CHECK(from_hex("00ff10") == std::vector<unsigned char>{0x00, 0xff, 0x10});
    const auto dir = std::filesystem::temp_directory_path() / "prune_io_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "d.bin", std::ios::binary) << "AB";
    const std::string text = R"({"actors": [
        {"id": "s", "kind": "static", "ports": [{"id": "o", "dir": "out", "kind": "srp"}]},
        {"id": "t", "kind": "static", "ports": [{"id": "i", "dir": "in", "kind": "srp"}]}],
      "fifos": [{"id": "f", "src": "s.o", "dst": "t.i", "delay": 2, "delay_payload_file": "d.bin"}]})";
    const GraphDescription d = parse_graph(text, dir);
    REQUIRE(d.fifos[0].delay_payload.has_value());
    CHECK(*d.fifos[0].delay_payload == std::vector<unsigned char>{'A', 'B'});
    const Graph g = build_graph(d);
    CHECK(g.fifo(0).delay_payload == std::vector<unsigned char>{'A', 'B'});
  }

  TEST_CASE("parse, serialize, parse is idempotent") {
    for (const char* app : {"motion_detection", "dynamic_predistortion", "adaptive_bypass"}) {
      const std::string once = serialize_graph(parse_graph_file(test::corpus_path(app)));
      const std::string twice = serialize_graph(parse_graph(once));
      CHECK(once == twice);
    }
    for (const char* fx : {"three_components", "composite", "two_branches"}) {
      const Graph g = test::fixture(fx);
      const Graph again = build_graph(parse_graph(serialize_graph(g.describe())));
      CHECK(serialize_graph(again.describe()) == serialize_graph(g.describe()));
    }
  }

  TEST_CASE("report lists the three components") {
    const Graph g = test::fixture("three_components");
    std::ostringstream os;
    render_report(os, g, analyze(g));
    const std::string s = os.str();
    CHECK(s.find("verdict: consistent") != std::string::npos);
    CHECK(s.find("Z1={a1,a2,a3}") != std::string::npos);
    CHECK(s.find("Z2={a4}") != std::string::npos);
    CHECK(s.find("Z3={d}") != std::string::npos);
  }

  TEST_CASE("violation lines") {
    std::ostringstream os;
    render_violations(os, check_all(test::fixture("rule4_one_sided")));
    CHECK(os.str().rfind("rule 4 single-sided dynamism: x:", 0) == 0);
  }

  TEST_CASE("capacity table") {
    std::ostringstream os;
    render_capacity(os, test::fixture("unaligned_delay"), 3);
    CHECK(os.str().find("f 4 1 1 13 13 copy 12->0") != std::string::npos);

    std::ostringstream two;
    render_capacity(two, test::fixture("one_branch"), 2);
    std::istringstream lines(two.str());
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
      std::istringstream fields(line);
      std::string id;
      int rate, delay, tb, slots;
      fields >> id >> rate >> delay >> tb >> slots;
      CHECK(slots == 2);
    }
  }
}

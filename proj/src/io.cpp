#include "prune/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "prune/fifo.hpp"

namespace prune {

using nlohmann::json;

namespace {

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Typed field access that names the offending path.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw SchemaError(field(it.key()), "unknown field");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& at(const char* key) const {
    if (!j_.contains(key)) throw SchemaError(field(key), "missing required field");
    return j_.at(key);
  }

  std::string str(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) throw SchemaError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::string str_or(const char* key, std::string fallback) const { return has(key) ? str(key) : fallback; }

  int integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw SchemaError(field(key), "expected an integer");
    const auto n = v.get<long long>();
    if (n < 0 || n > 1'000'000'000) throw SchemaError(field(key), "out of range");
    return static_cast<int>(n);
  }

  int integer_or(const char* key, int fallback) const { return has(key) ? integer(key) : fallback; }

  const json& array(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) throw SchemaError(field(key), "expected an array");
    return v;
  }

 private:
  const json& j_;
  std::string path_;
};

template <class E>
E enum_field(const Reader& r, const char* key, std::initializer_list<std::pair<const char*, E>> values) {
  const std::string s = r.str(key);
  for (const auto& [name, e] : values)
    if (s == name) return e;
  std::string expected;
  for (const auto& [name, e] : values) expected += (expected.empty() ? "" : ", ") + std::string(name);
  throw SchemaError(r.field(key), "unknown value '" + s + "' (expected one of " + expected + ")");
}

std::string indexed(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

std::string hex_bytes(const std::vector<unsigned char>& bytes) {
  std::ostringstream os;
  for (unsigned char b : bytes) os << std::hex << std::setw(2) << std::setfill('0') << int(b);
  return os.str();
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

std::vector<unsigned char> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd number of hex digits");
  std::vector<unsigned char> out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const std::string byte = hex.substr(i, 2);
    if (!std::isxdigit(static_cast<unsigned char>(byte[0])) || !std::isxdigit(static_cast<unsigned char>(byte[1])))
      throw std::invalid_argument("bad hex digit in '" + byte + "'");
    out.push_back(static_cast<unsigned char>(std::stoi(byte, nullptr, 16)));
  }
  return out;
}

GraphDescription parse_graph(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what(), line, col);
  }

  const Reader root(doc, "");
  root.allow({"name", "actors", "fifos", "control_table"});
  GraphDescription g;
  g.name = root.str_or("name", "");

  const json& actors = root.array("actors");
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const std::string path = indexed("actors", i);
    const Reader r(actors[i], path);
    r.allow({"id", "kind", "behavior", "params", "ports"});
    ActorDesc a;
    a.id = r.str("id");
    a.kind = enum_field<ActorKind>(r, "kind",
                                   {{"static", ActorKind::StaticProcessing},
                                    {"dynamic", ActorKind::Dynamic},
                                    {"configuration", ActorKind::Configuration}});
    a.behavior = r.str_or("behavior", "generic");
    if (r.has("params")) {
      const json& params = r.at("params");
      if (!params.is_object()) throw SchemaError(r.field("params"), "expected an object");
      for (auto it = params.begin(); it != params.end(); ++it) {
        if (it->is_string())
          a.params[it.key()] = it->get<std::string>();
        else if (it->is_number() || it->is_boolean())
          a.params[it.key()] = it->dump();
        else
          throw SchemaError(r.field("params." + it.key()), "expected a string or number");
      }
    }
    const json& ports = r.array("ports");
    for (std::size_t k = 0; k < ports.size(); ++k) {
      const Reader pr(ports[k], indexed(path + ".ports", k));
      pr.allow({"id", "dir", "kind", "atr", "control_len"});
      PortDesc p;
      p.id = pr.str("id");
      p.dir = enum_field<Direction>(pr, "dir", {{"in", Direction::In}, {"out", Direction::Out}});
      p.kind = enum_field<PortKind>(pr, "kind",
                                    {{"srp", PortKind::Srp},
                                     {"drp", PortKind::Drp},
                                     {"control_in", PortKind::ControlIn},
                                     {"control_out", PortKind::ControlOut}});
      p.atr = pr.integer_or("atr", 1);
      p.control_len = pr.integer_or("control_len", 0);
      a.ports.push_back(std::move(p));
    }
    g.actors.push_back(std::move(a));
  }

  const json& fifos = root.array("fifos");
  for (std::size_t i = 0; i < fifos.size(); ++i) {
    const Reader r(fifos[i], indexed("fifos", i));
    r.allow({"id", "src", "dst", "rate", "delay", "token_bytes", "delay_payload_hex", "delay_payload_file"});
    FifoDesc f;
    f.id = r.str("id");
    f.src = r.str("src");
    f.dst = r.str("dst");
    if (r.has("rate")) f.rate = r.integer("rate");
    f.delay = r.integer_or("delay", 0);
    f.token_bytes = r.integer_or("token_bytes", 1);
    if (r.has("delay_payload_hex") && r.has("delay_payload_file"))
      throw SchemaError(r.field("delay_payload_file"), "conflicts with delay_payload_hex");
    if (r.has("delay_payload_hex")) {
      try {
        f.delay_payload = from_hex(r.str("delay_payload_hex"));
      } catch (const std::invalid_argument& e) {
        throw SchemaError(r.field("delay_payload_hex"), e.what());
      }
    }
    if (r.has("delay_payload_file")) {
      const std::filesystem::path p = base_dir / r.str("delay_payload_file");
      std::ifstream in(p, std::ios::binary);
      if (!in) throw SchemaError(r.field("delay_payload_file"), "cannot open " + p.string());
      f.delay_payload = std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
    }
    g.fifos.push_back(std::move(f));
  }

  if (root.has("control_table")) {
    const json& table = root.array("control_table");
    for (std::size_t i = 0; i < table.size(); ++i) {
      const Reader r(table[i], indexed("control_table", i));
      r.allow({"control", "drp", "element"});
      g.control_table.push_back({r.str("control"), r.str("drp"), r.integer("element")});
    }
  }
  return g;
}

GraphDescription parse_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str(), path.parent_path());
}

std::string serialize_graph(const GraphDescription& g) {
  json doc = json::object();
  doc["name"] = g.name;
  json actors = json::array();
  for (const auto& a : g.actors) {
    json ja = {{"id", a.id}, {"kind", std::string(to_string(a.kind))}, {"behavior", a.behavior}};
    if (!a.params.empty()) ja["params"] = a.params;
    json ports = json::array();
    for (const auto& p : a.ports) {
      json jp = {{"id", p.id},
                 {"dir", std::string(to_string(p.dir))},
                 {"kind", std::string(to_string(p.kind))},
                 {"atr", p.atr}};
      if (p.kind == PortKind::ControlOut) jp["control_len"] = p.control_len;
      ports.push_back(std::move(jp));
    }
    ja["ports"] = std::move(ports);
    actors.push_back(std::move(ja));
  }
  doc["actors"] = std::move(actors);
  json fifos = json::array();
  for (const auto& f : g.fifos) {
    json jf = {{"id", f.id}, {"src", f.src}, {"dst", f.dst}};
    if (f.rate) jf["rate"] = *f.rate;
    jf["delay"] = f.delay;
    jf["token_bytes"] = f.token_bytes;
    if (f.delay_payload) jf["delay_payload_hex"] = hex_bytes(*f.delay_payload);
    fifos.push_back(std::move(jf));
  }
  doc["fifos"] = std::move(fifos);
  json table = json::array();
  for (const auto& e : g.control_table) table.push_back({{"control", e.control}, {"drp", e.drp}, {"element", e.element}});
  doc["control_table"] = std::move(table);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

void render_violations(std::ostream& os, const std::vector<Violation>& violations) {
  for (const auto& v : violations)
    os << "rule " << v.rule << ' ' << rule_name(v.rule) << ": " << join(v.subjects, ", ") << ": " << v.message
       << '\n';
}

void render_report(std::ostream& os, const Graph& graph, const ConsistencyReport& report) {
  auto names = [&](const std::vector<ActorId>& ids) {
    std::vector<std::string> out;
    for (ActorId a : ids) out.push_back(graph.actor(a).name);
    return out;
  };
  auto ports = [&](const std::vector<PortId>& ids) {
    std::vector<std::string> out;
    for (PortId p : ids) out.push_back(graph.port_name(p));
    return out;
  };

  os << "verdict: " << (report.consistent ? "consistent" : "inconsistent") << '\n';
  os << "violations: " << report.violations.size() << '\n';
  render_violations(os, report.violations);
  os << "dpgs: " << report.dpgs.size() << '\n';
  for (std::size_t i = 0; i < report.dpgs.size(); ++i) {
    const Dpg& d = report.dpgs[i];
    os << "dpg D" << i + 1 << ": q=" << graph.actor(d.q).name << " x=" << graph.actor(d.x).name
       << " y=" << graph.actor(d.y).name << " control=" << graph.port_name(d.control_port) << " M=" << d.m()
       << " declared=" << d.declared_len << '\n';
    os << "  members: {" << join(names(d.members), ",") << "}\n";
    for (const auto& dc : d.dcs) {
      os << "  Z" << dc.id << "={" << join(dc.member_names(graph), ",") << "}";
      os << " in=[" << join(ports(dc.in_drps), ",") << "] out=[" << join(ports(dc.out_drps), ",") << "]\n";
    }
  }
  os << "schedules: " << report.schedules.size() << '\n';
  for (const auto& s : report.schedules) {
    os << "  " << s.region << ":";
    for (const auto& e : s.firings) {
      os << ' ' << graph.actor(e.actor).name;
      if (e.count != 1) os << '*' << e.count;
    }
    os << '\n';
  }
  if (report.consistent) {
    os << "beta:\n";
    for (FifoId f = 0; f < graph.fifos().size(); ++f) {
      os << "  " << graph.fifo(f).name << ' ' << report.bounds.beta[f];
      for (const auto& [label, bounds] : report.bounds.per_region)
        if (auto it = bounds.find(f); it != bounds.end()) os << ' ' << label << '=' << it->second;
      os << '\n';
    }
  }
  os << "diagnostics: " << report.diagnostics.size() << '\n';
  for (const auto& d : report.diagnostics) os << "  " << d.code << ": " << d.message << '\n';
}

void render_capacity(std::ostream& os, const Graph& graph, int factor) {
  os << "fifo rate delay token_bytes slots bytes layout\n";
  for (const Fifo& f : graph.fifos()) {
    const CapacityPlan p = layout_plan(f.rate, f.delay, factor, f.token_bytes);
    os << f.name << ' ' << f.rate << ' ' << f.delay << ' ' << f.token_bytes << ' ' << p.slots << ' ' << p.bytes;
    if (p.copy)
      os << " copy " << p.copy->first.begin << "->" << p.copy->second.begin << " len " << f.delay;
    else
      os << " ring";
    os << '\n';
  }
}

void render_run(std::ostream& os, const Graph& graph, const RunReport& report) {
  os << "firings:\n";
  for (ActorId a = 0; a < report.firings.size(); ++a)
    os << "  " << graph.actor(a).name << ' ' << report.firings[a] << '\n';
  os << "sinks:\n";
  for (const auto& [name, digest] : report.sink_digests) os << "  " << name << ' ' << to_hex(digest) << '\n';
  os << "fifos:\n";
  for (FifoId f = 0; f < report.max_occupancy.size(); ++f) {
    os << "  " << graph.fifo(f).name << " max_occupancy " << report.max_occupancy[f];
    if (f < report.slots.size()) os << " slots " << report.slots[f];
    os << '\n';
  }
  os << "rate_checks: " << report.rate_checks << " violations: " << report.rate_violations << '\n';
}

}  // namespace prune

#include "prune/rules.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace prune {

std::string_view rule_name(int rule) {
  switch (rule) {
    case 1: return "linked port control";
    case 2: return "balanced delay";
    case 3: return "connecting subchain";
    case 4: return "single-sided dynamism";
    case 5: return "encapsulation";
  }
  return "unknown";
}

namespace {

bool is_input_drp(const Port& p) { return p.kind == PortKind::Drp && p.is_input(); }

struct PairAccumulator {
  bool direct = false;
  std::set<Subchain> subchains;
};

class SubchainSearch {
 public:
  SubchainSearch(const Graph& g, ActorId x, PortId px, std::map<std::pair<PortId, PortId>, PairAccumulator>& out)
      : g_(g), x_(x), px_(px), out_(out) {}

  void run(ActorId first) {
    path_.push_back(first);
    extend();
    path_.pop_back();
  }

 private:
  void extend() {
    const ActorId last = path_.back();
    for (PortId o : g_.outputs(last)) {
      for (FifoId f : g_.port(o).fifos) {
        const PortId t = g_.fifo(f).dst;
        const ActorId b = g_.port(t).actor;
        if (b == x_ || std::find(path_.begin(), path_.end(), b) != path_.end()) continue;
        if (is_input_drp(g_.port(t))) out_[{px_, t}].subchains.insert(path_);
        if (g_.actor(b).kind == ActorKind::Dynamic) continue;
        path_.push_back(b);
        extend();
        path_.pop_back();
      }
    }
  }

  const Graph& g_;
  ActorId x_;
  PortId px_;
  std::map<std::pair<PortId, PortId>, PairAccumulator>& out_;
  Subchain path_;
};

std::string names(const Graph& g, const Subchain& chain) {
  std::string s = "(";
  for (std::size_t i = 0; i < chain.size(); ++i) s += (i ? ", " : "") + g.actor(chain[i]).name;
  return s + ")";
}

/// Unit-capacity vertex-disjoint path test: can b reach both x and y along
/// two paths sharing only b? Equivalent to b lying on a simple x-y chain.
class DisjointPaths {
 public:
  explicit DisjointPaths(std::size_t n) : adj_(2 * n + 1) {}

  void add_edge(std::size_t u, std::size_t v, int c) {
    adj_[u].push_back(edges_.size());
    edges_.push_back({v, c});
    adj_[v].push_back(edges_.size());
    edges_.push_back({u, 0});
  }

  int max_flow(std::size_t s, std::size_t t, int limit) {
    int flow = 0;
    while (flow < limit) {
      std::vector<std::ptrdiff_t> via(adj_.size(), -1);
      std::vector<bool> seen(adj_.size(), false);
      std::queue<std::size_t> q;
      q.push(s);
      seen[s] = true;
      while (!q.empty() && !seen[t]) {
        auto u = q.front();
        q.pop();
        for (std::size_t e : adj_[u]) {
          if (edges_[e].cap > 0 && !seen[edges_[e].to]) {
            seen[edges_[e].to] = true;
            via[edges_[e].to] = static_cast<std::ptrdiff_t>(e);
            q.push(edges_[e].to);
          }
        }
      }
      if (!seen[t]) break;
      for (std::size_t v = t; v != s;) {
        auto e = static_cast<std::size_t>(via[v]);
        edges_[e].cap -= 1;
        edges_[e ^ 1].cap += 1;
        v = edges_[e ^ 1].to;
      }
      ++flow;
    }
    return flow;
  }

 private:
  struct Edge {
    std::size_t to;
    int cap;
  };
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
};

}  // namespace

bool on_simple_chain(const Graph& graph, const Adjacency& adj, ActorId x, ActorId y, ActorId b) {
  if (b == x || b == y || x == y) return false;
  const std::size_t n = graph.actors().size();
  // Node v splits into in(v) = v and out(v) = n + v; the sink is 2n.
  DisjointPaths net(n);
  const std::size_t sink = 2 * n;
  for (ActorId v = 0; v < n; ++v) {
    if (v == x || v == y) {
      net.add_edge(v, sink, 1);
      continue;
    }
    net.add_edge(v, n + v, v == b ? 2 : 1);
    for (ActorId w : adj.neighbors(v)) net.add_edge(n + v, w, 1);
  }
  return net.max_flow(b, sink, 2) == 2;
}

std::vector<LinkedDrpPair> find_linked_drps(const Graph& graph) {
  std::map<std::pair<PortId, PortId>, PairAccumulator> acc;
  for (ActorId x = 0; x < graph.actors().size(); ++x) {
    for (PortId px : graph.drps(x)) {
      if (graph.port(px).is_input()) continue;
      for (FifoId f : graph.port(px).fifos) {
        const PortId d = graph.fifo(f).dst;
        const ActorId a1 = graph.port(d).actor;
        if (a1 == x) continue;
        if (is_input_drp(graph.port(d))) acc[{px, d}].direct = true;
        if (graph.actor(a1).kind == ActorKind::Dynamic) continue;
        SubchainSearch(graph, x, px, acc).run(a1);
      }
    }
  }
  std::vector<LinkedDrpPair> out;
  for (auto& [key, a] : acc)
    out.push_back(LinkedDrpPair{key.first, key.second, a.direct, {a.subchains.begin(), a.subchains.end()}});
  return out;
}

std::vector<Violation> check_rule1_linked_port_control(const Graph& graph, const std::vector<LinkedDrpPair>& pairs) {
  std::vector<Violation> out;
  for (const auto& pair : pairs) {
    const ControlBinding bx = control_lookup(graph, pair.px);
    const ControlBinding by = control_lookup(graph, pair.py);
    if (bx.control_port == by.control_port && bx.element == by.element) continue;
    std::ostringstream os;
    os << "linked DRPs " << graph.port_name(pair.px) << " and " << graph.port_name(pair.py)
       << " are controlled by different control elements (" << graph.port_name(bx.control_port) << "[" << bx.element
       << "] vs " << graph.port_name(by.control_port) << "[" << by.element << "])";
    out.push_back({1, {graph.port_name(pair.px), graph.port_name(pair.py)}, os.str()});
  }
  return out;
}

std::vector<Violation> check_rule2_balanced_delay(const Graph& graph) {
  std::vector<Violation> out;
  for (PortId p = 0; p < graph.ports().size(); ++p) {
    const Port& port = graph.port(p);
    if (port.kind != PortKind::ControlOut || port.fifos.size() < 2) continue;
    std::set<int> delays;
    for (FifoId f : port.fifos) delays.insert(graph.fifo(f).delay);
    if (delays.size() == 1) continue;
    std::ostringstream os;
    os << "control port " << graph.port_name(p) << " reaches its control inputs with unequal delays:";
    std::vector<std::string> subjects{graph.port_name(p)};
    for (FifoId f : port.fifos) {
      os << " " << graph.port_name(graph.fifo(f).dst) << "=" << graph.fifo(f).delay;
      subjects.push_back(graph.port_name(graph.fifo(f).dst));
    }
    out.push_back({2, subjects, os.str()});
  }
  return out;
}

std::vector<Violation> check_rule3_connecting_subchain(const Graph& graph, const std::vector<LinkedDrpPair>& pairs) {
  std::map<ActorId, std::set<std::pair<ActorId, ActorId>>> owners;
  std::set<ActorId> non_static;
  for (const auto& pair : pairs) {
    ActorId x = graph.port(pair.px).actor;
    ActorId y = graph.port(pair.py).actor;
    const auto key = std::minmax(x, y);
    for (const Subchain& s : pair.subchains) {
      for (ActorId a : s) {
        owners[a].insert(key);
        if (graph.actor(a).kind != ActorKind::StaticProcessing) non_static.insert(a);
      }
    }
  }
  std::vector<Violation> out;
  for (ActorId a : non_static)
    out.push_back({3,
                   {graph.actor(a).name},
                   "actor " + graph.actor(a).name + " lies on a connecting subchain but is not a static processing actor"});
  for (const auto& [a, keys] : owners) {
    if (keys.size() < 2) continue;
    std::string msg = "actor " + graph.actor(a).name + " lies on connecting subchains of several dynamic actor pairs:";
    for (auto [u, v] : keys) msg += " {" + graph.actor(u).name + ", " + graph.actor(v).name + "}";
    out.push_back({3, {graph.actor(a).name}, msg});
  }
  return out;
}

std::vector<Violation> check_rule4_single_sided(const Graph& graph) {
  std::vector<Violation> out;
  for (ActorId a = 0; a < graph.actors().size(); ++a) {
    if (graph.actor(a).kind != ActorKind::Dynamic) continue;
    bool in = false, outp = false;
    for (PortId p : graph.drps(a)) (graph.port(p).is_input() ? in : outp) = true;
    if (in && outp)
      out.push_back({4, {graph.actor(a).name}, "dynamic actor " + graph.actor(a).name + " has both input and output DRPs"});
  }
  return out;
}

std::vector<Violation> check_rule5_encapsulation(const Graph& graph, const std::vector<LinkedDrpPair>& pairs) {
  const Adjacency adj(graph);
  std::set<std::tuple<ActorId, ActorId, ActorId>> reported;  // (b, x, y)
  std::vector<Violation> out;
  for (const auto& pair : pairs) {
    const ActorId x = graph.port(pair.px).actor;
    const ActorId y = graph.port(pair.py).actor;
    for (const Subchain& s : pair.subchains) {
      for (ActorId ai : s) {
        for (PortId p : graph.actor(ai).ports) {
          for (FifoId f : graph.port(p).fifos) {
            const Fifo& fifo = graph.fifo(f);
            const PortId other = fifo.src == p ? fifo.dst : fifo.src;
            const ActorId b = graph.port(other).actor;
            if (b == x || b == y || b == ai) continue;
            if (graph.port(other).kind != PortKind::Srp) continue;
            if (std::find(s.begin(), s.end(), b) != s.end()) continue;
            if (on_simple_chain(graph, adj, x, y, b)) continue;
            if (!reported.insert({b, x, y}).second) continue;
            out.push_back({5,
                           {graph.actor(b).name, graph.actor(ai).name},
                           "actor " + graph.actor(b).name + " is adjacent to subchain actor " + graph.actor(ai).name +
                               " of " + names(graph, s) + " but is on no chain connecting " + graph.actor(x).name +
                               " and " + graph.actor(y).name});
          }
        }
      }
    }
  }
  return out;
}

std::vector<Violation> check_all(const Graph& graph) {
  const auto pairs = find_linked_drps(graph);
  std::vector<Violation> all;
  auto append = [&all](std::vector<Violation> v) { all.insert(all.end(), v.begin(), v.end()); };
  append(check_rule1_linked_port_control(graph, pairs));
  append(check_rule2_balanced_delay(graph));
  append(check_rule3_connecting_subchain(graph, pairs));
  append(check_rule4_single_sided(graph));
  append(check_rule5_encapsulation(graph, pairs));
  std::stable_sort(all.begin(), all.end(), [](const Violation& a, const Violation& b) {
    if (a.rule != b.rule) return a.rule < b.rule;
    return a.subjects < b.subjects;
  });
  return all;
}

}  // namespace prune

#include "prune/analysis.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace prune {

std::vector<std::string> DynamicComponent::member_names(const Graph& graph) const {
  std::vector<std::string> out;
  for (ActorId a : actors) out.push_back(graph.actor(a).name);
  if (dummy) out.push_back(*dummy);
  return out;
}

namespace {

PortId control_driver(const Graph& g, ActorId dynamic_actor) {
  return g.fifo(g.input_fifo(*g.control_input(dynamic_actor))).src;
}

bool has_drp(const Graph& g, ActorId a, Direction dir) {
  for (PortId p : g.drps(a))
    if (g.port(p).dir == dir) return true;
  return false;
}

}  // namespace

std::vector<Dpg> identify_dpgs(const Graph& graph) {
  using K = AnalysisError::Kind;
  const auto pairs = find_linked_drps(graph);

  std::map<ActorId, std::set<ActorId>> partners_of_x, partners_of_y;
  std::map<std::pair<ActorId, ActorId>, std::set<ActorId>> subchain_actors;
  for (const auto& pair : pairs) {
    const ActorId x = graph.port(pair.px).actor;
    const ActorId y = graph.port(pair.py).actor;
    partners_of_x[x].insert(y);
    partners_of_y[y].insert(x);
    for (const auto& s : pair.subchains) subchain_actors[{x, y}].insert(s.begin(), s.end());
  }

  for (ActorId a = 0; a < graph.actors().size(); ++a) {
    if (graph.actor(a).kind != ActorKind::Dynamic) continue;
    const std::string& name = graph.actor(a).name;
    if (has_drp(graph, a, Direction::Out)) {
      auto it = partners_of_x.find(a);
      if (it == partners_of_x.end())
        throw AnalysisError(K::OrphanDynamicActor, "dynamic actor " + name + " has no partner dynamic actor");
      if (it->second.size() > 1)
        throw AnalysisError(K::SharedMembership, "dynamic actor " + name + " is linked to several dynamic actors");
    }
    if (has_drp(graph, a, Direction::In)) {
      auto it = partners_of_y.find(a);
      if (it == partners_of_y.end())
        throw AnalysisError(K::OrphanDynamicActor, "dynamic actor " + name + " has no partner dynamic actor");
      if (it->second.size() > 1)
        throw AnalysisError(K::SharedMembership, "dynamic actor " + name + " is linked to several dynamic actors");
    }
  }

  std::vector<Dpg> out;
  std::map<ActorId, std::size_t> owner;  // dynamic actors and subchain members
  for (const auto& [x, ys] : partners_of_x) {
    const ActorId y = *ys.begin();
    Dpg d;
    d.x = x;
    d.y = y;
    d.control_port = control_driver(graph, x);
    d.q = graph.port(d.control_port).actor;
    d.declared_len = graph.port(d.control_port).control_len;
    std::set<ActorId> members{d.q, x, y};
    const auto& sub = subchain_actors[{x, y}];
    members.insert(sub.begin(), sub.end());
    for (ActorId a : members) {
      if (a == d.q) continue;
      auto [it, fresh] = owner.emplace(a, out.size());
      if (!fresh)
        throw AnalysisError(K::SharedMembership, "actor " + graph.actor(a).name + " belongs to two dynamic processing graphs");
    }
    d.members.assign(members.begin(), members.end());
    out.push_back(std::move(d));
  }
  return out;
}

Dpg decompose_dcs(const Graph& graph, Dpg dpg) {
  const std::size_t n = graph.actors().size();
  std::vector<bool> inside(n, false);
  for (ActorId a : dpg.members)
    if (a != dpg.q && a != dpg.x && a != dpg.y) inside[a] = true;

  // Union-find over member actors.
  std::vector<ActorId> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<ActorId(ActorId)> find = [&](ActorId a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (const Fifo& f : graph.fifos()) {
    ActorId a = graph.port(f.src).actor, b = graph.port(f.dst).actor;
    if (inside[a] && inside[b]) parent[find(a)] = find(b);
  }

  std::map<ActorId, DynamicComponent> by_root;
  for (ActorId a = 0; a < n; ++a)
    if (inside[a]) by_root[find(a)].actors.push_back(a);

  std::vector<DynamicComponent> dcs;
  for (auto& [root, dc] : by_root) {
    (void)root;
    for (PortId px : graph.drps(dpg.x)) {
      if (graph.port(px).is_input()) continue;
      for (FifoId f : graph.port(px).fifos)
        if (std::binary_search(dc.actors.begin(), dc.actors.end(), graph.consumer(f))) dc.in_drps.push_back(px);
    }
    for (PortId py : graph.drps(dpg.y)) {
      if (!graph.port(py).is_input()) continue;
      if (std::binary_search(dc.actors.begin(), dc.actors.end(), graph.producer(graph.input_fifo(py))))
        dc.out_drps.push_back(py);
    }
    dcs.push_back(std::move(dc));
  }

  // One dummy actor per FIFO joining a DRP of x directly to a DRP of y.
  std::vector<FifoId> direct;
  for (PortId px : graph.drps(dpg.x)) {
    if (graph.port(px).is_input()) continue;
    for (FifoId f : graph.port(px).fifos) {
      const Port& dst = graph.port(graph.fifo(f).dst);
      if (dst.actor == dpg.y && dst.kind == PortKind::Drp) direct.push_back(f);
    }
  }
  for (std::size_t i = 0; i < direct.size(); ++i) {
    std::string name = direct.size() == 1 ? "d" : "d" + std::to_string(i + 1);
    while (graph.find_actor(name)) name += "'";
    DynamicComponent dc;
    dc.dummy = name;
    dc.dummy_fifo = direct[i];
    dc.in_drps.push_back(graph.fifo(direct[i]).src);
    dc.out_drps.push_back(graph.fifo(direct[i]).dst);
    dcs.push_back(std::move(dc));
  }

  for (auto& dc : dcs) {
    std::sort(dc.in_drps.begin(), dc.in_drps.end());
    dc.in_drps.erase(std::unique(dc.in_drps.begin(), dc.in_drps.end()), dc.in_drps.end());
    std::sort(dc.out_drps.begin(), dc.out_drps.end());
  }
  // Order components by the first DRP of x feeding them.
  std::stable_sort(dcs.begin(), dcs.end(), [](const DynamicComponent& a, const DynamicComponent& b) {
    auto key = [](const DynamicComponent& c) {
      return c.in_drps.empty() ? std::numeric_limits<PortId>::max() : c.in_drps.front();
    };
    return key(a) < key(b);
  });
  for (std::size_t i = 0; i < dcs.size(); ++i) dcs[i].id = static_cast<int>(i + 1);
  dpg.dcs = std::move(dcs);
  return dpg;
}

std::vector<Diagnostic> validate_dpg(const Graph& graph, const Dpg& dpg) {
  std::vector<Diagnostic> out;
  const std::string where = "DPG {" + graph.actor(dpg.x).name + ", " + graph.actor(dpg.y).name + "}: ";

  std::set<PortId> covered;
  std::map<int, int> element_owner;  // control element -> DC id
  for (const auto& dc : dpg.dcs) {
    const std::string z = "Z" + std::to_string(dc.id);
    if (dc.in_drps.empty() || dc.out_drps.empty())
      out.push_back({"SurjectivityFailure", where + z + " must connect to at least one DRP of " +
                                                graph.actor(dpg.x).name + " and one DRP of " +
                                                graph.actor(dpg.y).name});
    for (ActorId a : dc.actors)
      if (graph.actor(a).kind != ActorKind::StaticProcessing)
        out.push_back({"NonStaticMember", where + z + " contains non-static actor " + graph.actor(a).name});

    std::set<int> elements;
    std::vector<PortId> drps = dc.in_drps;
    drps.insert(drps.end(), dc.out_drps.begin(), dc.out_drps.end());
    for (PortId p : drps) {
      covered.insert(p);
      const ControlBinding b = control_lookup(graph, p);
      if (b.control_port != dpg.control_port)
        out.push_back({"ControlMappingFailure",
                       where + graph.port_name(p) + " is not controlled by " + graph.port_name(dpg.control_port)});
      elements.insert(b.element);
    }
    if (elements.size() > 1) {
      out.push_back({"ControlMappingFailure", where + "DRPs of " + z + " use more than one control element"});
    } else if (elements.size() == 1) {
      auto [it, fresh] = element_owner.emplace(*elements.begin(), dc.id);
      if (!fresh)
        out.push_back({"BijectionFailure", where + "Z" + std::to_string(it->second) + " and " + z +
                                               " share control element " + std::to_string(it->first)});
    }
  }
  for (ActorId a : {dpg.x, dpg.y})
    for (PortId p : graph.drps(a))
      if (!covered.count(p))
        out.push_back({"SurjectivityFailure", where + graph.port_name(p) + " is not linked to any dynamic component"});

  if (dpg.declared_len != dpg.m())
    out.push_back({"BijectionFailure", where + "control value length " + std::to_string(dpg.declared_len) +
                                           " declared on " + graph.port_name(dpg.control_port) + " but M = " +
                                           std::to_string(dpg.m())});
  return out;
}

std::vector<FifoId> region_fifos(const Graph& graph, const Region& region) {
  std::vector<bool> in(graph.actors().size(), false);
  for (ActorId a : region.actors) in[a] = true;
  std::vector<FifoId> out;
  for (FifoId f = 0; f < graph.fifos().size(); ++f)
    if (in[graph.producer(f)] && in[graph.consumer(f)]) out.push_back(f);
  return out;
}

namespace {

struct TokenSim {
  const Graph& g;
  std::vector<bool> in_region;
  std::vector<int> tokens;
  std::vector<int> peak;

  TokenSim(const Graph& graph, const std::vector<ActorId>& actors)
      : g(graph), in_region(graph.actors().size(), false), tokens(graph.fifos().size(), 0),
        peak(graph.fifos().size(), 0) {
    for (ActorId a : actors) in_region[a] = true;
    for (FifoId f = 0; f < g.fifos().size(); ++f)
      if (internal(f)) tokens[f] = peak[f] = g.fifo(f).delay;
  }

  bool internal(FifoId f) const { return in_region[g.producer(f)] && in_region[g.consumer(f)]; }

  /// Internal input FIFOs lacking tokens for one firing.
  std::vector<FifoId> starving(ActorId a) const {
    std::vector<FifoId> out;
    for (PortId p : g.inputs(a)) {
      FifoId f = g.input_fifo(p);
      if (internal(f) && tokens[f] < g.fifo(f).rate) out.push_back(f);
    }
    return out;
  }

  void fire(ActorId a) {
    for (PortId p : g.inputs(a)) {
      FifoId f = g.input_fifo(p);
      if (internal(f)) tokens[f] -= g.fifo(f).rate;
    }
    for (PortId p : g.outputs(a))
      for (FifoId f : g.port(p).fifos)
        if (internal(f)) {
          tokens[f] += g.fifo(f).rate;
          peak[f] = std::max(peak[f], tokens[f]);
        }
  }
};

std::vector<ActorId> find_wait_cycle(const Graph& g, const TokenSim& sim, const std::vector<ActorId>& stuck) {
  std::map<ActorId, std::vector<ActorId>> waits;
  std::set<ActorId> stuck_set(stuck.begin(), stuck.end());
  for (ActorId a : stuck)
    for (FifoId f : sim.starving(a))
      if (stuck_set.count(g.producer(f))) waits[a].push_back(g.producer(f));
  for (auto& [a, w] : waits) {
    std::sort(w.begin(), w.end(), [&g](ActorId l, ActorId r) { return g.actor(l).name < g.actor(r).name; });
    w.erase(std::unique(w.begin(), w.end()), w.end());
  }
  // Follow wait-for edges from the lexicographically first stuck actor until
  // an actor repeats.
  std::vector<ActorId> ordered = stuck;
  std::sort(ordered.begin(), ordered.end(), [&g](ActorId l, ActorId r) { return g.actor(l).name < g.actor(r).name; });
  for (ActorId start : ordered) {
    std::vector<ActorId> path;
    std::map<ActorId, std::size_t> pos;
    ActorId cur = start;
    while (true) {
      if (auto it = pos.find(cur); it != pos.end())
        return std::vector<ActorId>(path.begin() + static_cast<std::ptrdiff_t>(it->second), path.end());
      auto w = waits.find(cur);
      if (w == waits.end() || w->second.empty()) break;
      pos[cur] = path.size();
      path.push_back(cur);
      cur = w->second.front();
    }
  }
  return {};
}

}  // namespace

Schedule compute_schedule(const Graph& graph, const Region& region) {
  TokenSim sim(graph, region.actors);
  std::vector<ActorId> pending = region.actors;
  std::sort(pending.begin(), pending.end(),
            [&graph](ActorId l, ActorId r) { return graph.actor(l).name < graph.actor(r).name; });
  Schedule s;
  s.region = region.label;
  s.members = region.actors;
  std::sort(s.members.begin(), s.members.end());
  while (!pending.empty()) {
    auto it = std::find_if(pending.begin(), pending.end(), [&sim](ActorId a) { return sim.starving(a).empty(); });
    if (it == pending.end()) {
      const auto cycle = find_wait_cycle(graph, sim, pending);
      std::ostringstream os;
      os << "deadlock in region " << region.label;
      if (!cycle.empty()) {
        os << ": cycle ";
        for (ActorId a : cycle) os << graph.actor(a).name << " -> ";
        os << graph.actor(cycle.front()).name;
      }
      os << " (stuck:";
      for (ActorId a : pending) os << " " << graph.actor(a).name;
      os << ")";
      std::map<FifoId, int> tokens;
      for (FifoId f : region_fifos(graph, region)) tokens[f] = sim.tokens[f];
      throw DeadlockError(region.label, cycle, tokens, os.str());
    }
    const ActorId a = *it;
    pending.erase(it);
    sim.fire(a);
    if (!s.firings.empty() && s.firings.back().actor == a)
      ++s.firings.back().count;
    else
      s.firings.push_back({a, 1});
  }
  return s;
}

namespace {

TokenSim replay(const Graph& graph, const Schedule& schedule) {
  TokenSim sim(graph, schedule.members);
  for (const auto& e : schedule.firings)
    for (int i = 0; i < e.count; ++i) sim.fire(e.actor);
  return sim;
}

}  // namespace

bool is_periodic(const Graph& graph, const Schedule& schedule) {
  TokenSim sim = replay(graph, schedule);
  for (FifoId f = 0; f < graph.fifos().size(); ++f)
    if (sim.internal(f) && sim.tokens[f] != graph.fifo(f).delay) return false;
  return true;
}

BufferBounds compute_bounds(const Graph& graph, const std::vector<Schedule>& schedules) {
  BufferBounds b;
  b.beta.assign(graph.fifos().size(), 0);
  for (const Schedule& s : schedules) {
    TokenSim sim = replay(graph, s);
    auto& region = b.per_region[s.region];
    for (FifoId f = 0; f < graph.fifos().size(); ++f) {
      if (!sim.internal(f)) continue;
      region[f] = sim.peak[f];
      b.beta[f] = std::max(b.beta[f], sim.peak[f]);
    }
  }
  return b;
}

ConsistencyReport analyze(const Graph& graph) {
  ConsistencyReport r;
  r.violations = check_all(graph);
  if (!r.violations.empty()) {
    for (const auto& v : r.violations)
      r.diagnostics.push_back({"Rule" + std::to_string(v.rule), "rule " + std::to_string(v.rule) + " " +
                                                                    std::string(rule_name(v.rule)) + ": " + v.message});
    return r;
  }

  try {
    r.dpgs = identify_dpgs(graph);
  } catch (const AnalysisError& e) {
    r.diagnostics.push_back(
        {e.kind() == AnalysisError::Kind::OrphanDynamicActor ? "OrphanDynamicActor" : "SharedMembership", e.what()});
    return r;
  }
  for (auto& d : r.dpgs) {
    d = decompose_dcs(graph, std::move(d));
    auto diags = validate_dpg(graph, d);
    r.diagnostics.insert(r.diagnostics.end(), diags.begin(), diags.end());
  }
  if (!r.diagnostics.empty()) return r;

  std::vector<Region> regions;
  Region whole{"static", {}};
  for (ActorId a = 0; a < graph.actors().size(); ++a) whole.actors.push_back(a);
  regions.push_back(whole);
  for (std::size_t i = 0; i < r.dpgs.size(); ++i)
    for (const auto& dc : r.dpgs[i].dcs)
      regions.push_back({"D" + std::to_string(i + 1) + ".Z" + std::to_string(dc.id), dc.actors});

  bool deadlock = false;
  for (const Region& region : regions) {
    try {
      r.schedules.push_back(compute_schedule(graph, region));
    } catch (const DeadlockError& e) {
      r.diagnostics.push_back({"DeadlockError", e.what()});
      deadlock = true;
    }
  }
  if (deadlock) return r;
  r.bounds = compute_bounds(graph, r.schedules);
  r.consistent = true;
  return r;
}

}  // namespace prune

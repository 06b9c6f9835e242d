#include "prune/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace prune {

std::string_view to_string(ActorKind kind) {
  switch (kind) {
    case ActorKind::StaticProcessing: return "static";
    case ActorKind::Dynamic: return "dynamic";
    case ActorKind::Configuration: return "configuration";
  }
  return "?";
}

std::string_view to_string(Direction dir) { return dir == Direction::In ? "in" : "out"; }

std::string_view to_string(PortKind kind) {
  switch (kind) {
    case PortKind::Srp: return "srp";
    case PortKind::Drp: return "drp";
    case PortKind::ControlIn: return "control_in";
    case PortKind::ControlOut: return "control_out";
  }
  return "?";
}

std::string_view to_string(GraphError::Kind kind) {
  using K = GraphError::Kind;
  switch (kind) {
    case K::DanglingPort: return "DanglingPort";
    case K::RateMismatch: return "RateMismatch";
    case K::DuplicateId: return "DuplicateId";
    case K::BadActorShape: return "BadActorShape";
    case K::UnknownReference: return "UnknownReference";
    case K::BadFifo: return "BadFifo";
    case K::BadControlTable: return "BadControlTable";
    case K::Uncontrolled: return "Uncontrolled";
  }
  return "?";
}

// ---------------------------------------------------------------------------

ControlTable::ControlTable(std::vector<PortId> rows, std::vector<PortId> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)), cells_(rows_.size() * cols_.size(), 0) {}

std::optional<std::size_t> ControlTable::row_of(PortId control) const {
  auto it = std::find(rows_.begin(), rows_.end(), control);
  if (it == rows_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rows_.begin());
}

std::optional<std::size_t> ControlTable::col_of(PortId drp) const {
  auto it = std::find(cols_.begin(), cols_.end(), drp);
  if (it == cols_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - cols_.begin());
}

int ControlTable::at(PortId control, PortId drp) const {
  auto r = row_of(control);
  auto c = col_of(drp);
  if (!r || !c) return 0;
  return entry(*r, *c);
}

// ---------------------------------------------------------------------------

std::optional<ActorId> Graph::find_actor(std::string_view name) const {
  auto it = actor_index_.find(name);
  if (it == actor_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<FifoId> Graph::find_fifo(std::string_view name) const {
  auto it = fifo_index_.find(name);
  if (it == fifo_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<PortId> Graph::find_port(std::string_view qualified) const {
  auto dot = qualified.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto a = find_actor(qualified.substr(0, dot));
  if (!a) return std::nullopt;
  auto pname = qualified.substr(dot + 1);
  for (PortId p : actors_[*a].ports)
    if (ports_[p].name == pname) return p;
  return std::nullopt;
}

std::string Graph::port_name(PortId id) const {
  const Port& p = ports_.at(id);
  return actors_[p.actor].name + "." + p.name;
}

std::optional<PortId> Graph::control_input(ActorId a) const {
  for (PortId p : actors_.at(a).ports)
    if (ports_[p].kind == PortKind::ControlIn) return p;
  return std::nullopt;
}

std::vector<PortId> Graph::drps(ActorId a) const {
  std::vector<PortId> out;
  for (PortId p : actors_.at(a).ports)
    if (ports_[p].kind == PortKind::Drp) out.push_back(p);
  return out;
}

std::vector<PortId> Graph::inputs(ActorId a) const {
  std::vector<PortId> out;
  for (PortId p : actors_.at(a).ports)
    if (ports_[p].is_input()) out.push_back(p);
  return out;
}

std::vector<PortId> Graph::outputs(ActorId a) const {
  std::vector<PortId> out;
  for (PortId p : actors_.at(a).ports)
    if (!ports_[p].is_input()) out.push_back(p);
  return out;
}

bool Graph::is_source(ActorId a) const { return inputs(a).empty(); }
bool Graph::is_sink(ActorId a) const { return outputs(a).empty(); }

GraphDescription Graph::describe() const {
  GraphDescription d;
  d.name = name_;
  for (const Actor& a : actors_) {
    ActorDesc ad;
    ad.id = a.name;
    ad.kind = a.kind;
    ad.behavior = a.behavior;
    ad.params = a.params;
    for (PortId p : a.ports) {
      const Port& port = ports_[p];
      ad.ports.push_back(PortDesc{port.name, port.dir, port.kind, port.atr, port.control_len});
    }
    d.actors.push_back(std::move(ad));
  }
  for (const Fifo& f : fifos_) {
    FifoDesc fd;
    fd.id = f.name;
    fd.src = port_name(f.src);
    fd.dst = port_name(f.dst);
    fd.rate = f.rate;
    fd.delay = f.delay;
    fd.token_bytes = f.token_bytes;
    if (std::any_of(f.delay_payload.begin(), f.delay_payload.end(), [](unsigned char b) { return b != 0; }))
      fd.delay_payload = f.delay_payload;
    d.fifos.push_back(std::move(fd));
  }
  for (std::size_t r = 0; r < table_.rows().size(); ++r)
    for (std::size_t c = 0; c < table_.cols().size(); ++c)
      if (int e = table_.entry(r, c); e > 0)
        d.control_table.push_back({port_name(table_.rows()[r]), port_name(table_.cols()[c]), e});
  return d;
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(GraphError::Kind kind, const std::string& msg) { throw GraphError(kind, msg); }

void check_actor_shape(const Graph& g, ActorId a) {
  const Actor& actor = g.actor(a);
  int control_in = 0, control_out = 0, drp = 0;
  for (PortId p : actor.ports) {
    const Port& port = g.port(p);
    switch (port.kind) {
      case PortKind::ControlIn: ++control_in; break;
      case PortKind::ControlOut: ++control_out; break;
      case PortKind::Drp: ++drp; break;
      case PortKind::Srp: break;
    }
  }
  const std::string who = "actor '" + actor.name + "' (" + std::string(to_string(actor.kind)) + ")";
  switch (actor.kind) {
    case ActorKind::StaticProcessing:
      if (control_in || control_out || drp) fail(GraphError::Kind::BadActorShape, who + " may only have SRPs");
      break;
    case ActorKind::Dynamic:
      if (control_in != 1) fail(GraphError::Kind::BadActorShape, who + " needs exactly one control input port");
      if (drp < 1) fail(GraphError::Kind::BadActorShape, who + " needs at least one DRP");
      if (control_out) fail(GraphError::Kind::BadActorShape, who + " may not have control output ports");
      break;
    case ActorKind::Configuration:
      if (control_out < 1) fail(GraphError::Kind::BadActorShape, who + " needs at least one control output port");
      if (drp || control_in) fail(GraphError::Kind::BadActorShape, who + " may only have control outputs and SRPs");
      break;
  }
}

}  // namespace

Graph build_graph(const GraphDescription& desc) {
  using K = GraphError::Kind;
  Graph g;
  g.name_ = desc.name;

  for (const ActorDesc& ad : desc.actors) {
    if (ad.id.empty() || ad.id.find('.') != std::string::npos)
      fail(K::BadActorShape, "invalid actor id '" + ad.id + "'");
    if (g.actor_index_.count(ad.id)) fail(K::DuplicateId, "duplicate actor id '" + ad.id + "'");
    ActorId a = g.actors_.size();
    g.actor_index_.emplace(ad.id, a);
    Actor actor{ad.id, ad.kind, ad.behavior.empty() ? "generic" : ad.behavior, ad.params, {}};
    std::set<std::string> seen;
    for (const PortDesc& pd : ad.ports) {
      if (!seen.insert(pd.id).second) fail(K::DuplicateId, "duplicate port id '" + ad.id + "." + pd.id + "'");
      Port port{pd.id, a, pd.dir, pd.kind, pd.atr, pd.control_len, {}};
      const std::string pn = ad.id + "." + pd.id;
      if (pd.kind == PortKind::ControlIn && pd.dir != Direction::In)
        fail(K::BadActorShape, "control input port '" + pn + "' must be an input");
      if (pd.kind == PortKind::ControlOut && pd.dir != Direction::Out)
        fail(K::BadActorShape, "control output port '" + pn + "' must be an output");
      if (pd.kind == PortKind::ControlIn || pd.kind == PortKind::ControlOut) {
        if (pd.atr != 1) fail(K::BadActorShape, "control port '" + pn + "' must have rate 1");
      } else if (pd.atr < 1) {
        fail(K::BadActorShape, "port '" + pn + "' needs a positive active token rate");
      }
      if (pd.kind == PortKind::ControlOut) {
        if (pd.control_len < 1) fail(K::BadActorShape, "control output port '" + pn + "' needs control_len >= 1");
      } else {
        port.control_len = 0;
      }
      actor.ports.push_back(g.ports_.size());
      g.ports_.push_back(std::move(port));
    }
    g.actors_.push_back(std::move(actor));
  }

  for (const FifoDesc& fd : desc.fifos) {
    if (fd.id.empty()) fail(K::BadFifo, "fifo without id");
    if (g.fifo_index_.count(fd.id)) fail(K::DuplicateId, "duplicate fifo id '" + fd.id + "'");
    auto src = g.find_port(fd.src);
    auto dst = g.find_port(fd.dst);
    if (!src) fail(K::UnknownReference, "fifo '" + fd.id + "': unknown source port '" + fd.src + "'");
    if (!dst) fail(K::UnknownReference, "fifo '" + fd.id + "': unknown sink port '" + fd.dst + "'");
    const Port& sp = g.ports_[*src];
    const Port& dp = g.ports_[*dst];
    if (sp.dir != Direction::Out) fail(K::BadFifo, "fifo '" + fd.id + "': source '" + fd.src + "' is not an output");
    if (dp.dir != Direction::In) fail(K::BadFifo, "fifo '" + fd.id + "': sink '" + fd.dst + "' is not an input");
    const bool control_src = sp.kind == PortKind::ControlOut;
    const bool control_dst = dp.kind == PortKind::ControlIn;
    if (control_src != control_dst)
      fail(K::BadFifo, "fifo '" + fd.id + "': control output ports connect exactly to control input ports");
    const int rate = fd.rate.value_or(sp.atr);
    if (rate < 1) fail(K::BadFifo, "fifo '" + fd.id + "': rate must be positive");
    if (sp.atr != rate || dp.atr != rate) {
      std::ostringstream os;
      os << "fifo '" << fd.id << "' has rate " << rate << " but atr(" << fd.src << ")=" << sp.atr << ", atr(" << fd.dst
         << ")=" << dp.atr;
      fail(K::RateMismatch, os.str());
    }
    if (fd.delay < 0) fail(K::BadFifo, "fifo '" + fd.id + "': negative delay");
    if (fd.token_bytes < 1) fail(K::BadFifo, "fifo '" + fd.id + "': token_bytes must be positive");
    if (control_src && fd.token_bytes < sp.control_len)
      fail(K::BadFifo, "fifo '" + fd.id + "': token_bytes smaller than the control value length");
    Fifo f{fd.id, *src, *dst, rate, fd.delay, fd.token_bytes, {}};
    const std::size_t payload = static_cast<std::size_t>(fd.delay) * static_cast<std::size_t>(fd.token_bytes);
    if (fd.delay_payload) {
      if (fd.delay_payload->size() != payload)
        fail(K::BadFifo, "fifo '" + fd.id + "': delay payload must hold exactly delay * token_bytes bytes");
      f.delay_payload = *fd.delay_payload;
    } else {
      f.delay_payload.assign(payload, 0);
    }
    FifoId id = g.fifos_.size();
    g.fifo_index_.emplace(fd.id, id);
    g.ports_[*src].fifos.push_back(id);
    g.ports_[*dst].fifos.push_back(id);
    g.fifos_.push_back(std::move(f));
  }

  for (PortId p = 0; p < g.ports_.size(); ++p) {
    const Port& port = g.ports_[p];
    if (port.fifos.empty()) fail(K::DanglingPort, "port '" + g.port_name(p) + "' is not connected to any fifo");
    if (port.is_input() && port.fifos.size() != 1)
      fail(K::BadFifo, "input port '" + g.port_name(p) + "' is the sink of more than one fifo");
  }

  for (ActorId a = 0; a < g.actors_.size(); ++a) check_actor_shape(g, a);

  std::vector<PortId> rows, cols;
  for (PortId p = 0; p < g.ports_.size(); ++p) {
    if (g.ports_[p].kind == PortKind::ControlOut) rows.push_back(p);
    if (g.ports_[p].kind == PortKind::Drp) cols.push_back(p);
  }
  g.table_ = ControlTable(rows, cols);
  for (const ControlEntry& e : desc.control_table) {
    auto c = g.find_port(e.control);
    auto d = g.find_port(e.drp);
    if (!c) fail(K::UnknownReference, "control table: unknown control port '" + e.control + "'");
    if (!d) fail(K::UnknownReference, "control table: unknown DRP '" + e.drp + "'");
    auto r = g.table_.row_of(*c);
    auto col = g.table_.col_of(*d);
    if (!r) fail(K::BadControlTable, "control table: '" + e.control + "' is not a control output port");
    if (!col) fail(K::BadControlTable, "control table: '" + e.drp + "' is not a DRP");
    if (e.element < 1 || e.element > g.ports_[*c].control_len)
      fail(K::BadControlTable, "control table: element " + std::to_string(e.element) + " out of range for '" +
                                   e.control + "'");
    if (g.table_.entry(*r, *col) != 0)
      fail(K::BadControlTable, "control table: duplicate entry for (" + e.control + ", " + e.drp + ")");
    g.table_.entry(*r, *col) = e.element;
  }
  for (std::size_t col = 0; col < cols.size(); ++col) {
    const PortId drp = cols[col];
    std::vector<std::size_t> controlling;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (g.table_.entry(r, col) > 0) controlling.push_back(r);
    if (controlling.empty()) fail(K::Uncontrolled, "DRP '" + g.port_name(drp) + "' has no controlling port");
    if (controlling.size() > 1)
      fail(K::BadControlTable, "DRP '" + g.port_name(drp) + "' is controlled by more than one control port");
    // The controlling port must drive the control input of the DRP's parent.
    const PortId control = rows[controlling.front()];
    const PortId cport = *g.control_input(g.ports_[drp].actor);
    const PortId driver = g.fifos_[g.input_fifo(cport)].src;
    if (driver != control)
      fail(K::BadControlTable, "DRP '" + g.port_name(drp) + "' is controlled by '" + g.port_name(control) +
                                   "' which does not drive '" + g.port_name(cport) + "'");
  }
  return g;
}

// ---------------------------------------------------------------------------

Adjacency::Adjacency(const Graph& graph) : neighbors_(graph.actors().size()) {
  for (const Fifo& f : graph.fifos()) {
    ActorId a = graph.port(f.src).actor;
    ActorId b = graph.port(f.dst).actor;
    if (a == b) continue;
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
  }
  for (auto& n : neighbors_) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
}

bool Adjacency::adjacent(ActorId a, ActorId b) const {
  const auto& n = neighbors_.at(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::vector<std::pair<ActorId, ActorId>> Adjacency::pairs() const {
  std::vector<std::pair<ActorId, ActorId>> out;
  for (ActorId a = 0; a < neighbors_.size(); ++a)
    for (ActorId b : neighbors_[a])
      if (a < b) out.emplace_back(a, b);
  return out;
}

ControlBinding control_lookup(const Graph& graph, PortId drp) {
  const ControlTable& t = graph.control_table();
  auto col = t.col_of(drp);
  if (col) {
    for (std::size_t r = 0; r < t.rows().size(); ++r)
      if (int e = t.entry(r, *col); e > 0) return {t.rows()[r], e};
  }
  throw GraphError(GraphError::Kind::Uncontrolled, "port '" + graph.port_name(drp) + "' is not a controlled DRP");
}

}  // namespace prune

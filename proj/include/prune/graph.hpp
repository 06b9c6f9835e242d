#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prune {

using ActorId = std::size_t;
using PortId = std::size_t;
using FifoId = std::size_t;

enum class ActorKind { StaticProcessing, Dynamic, Configuration };
enum class Direction { In, Out };
enum class PortKind { Srp, Drp, ControlIn, ControlOut };

std::string_view to_string(ActorKind kind);
std::string_view to_string(Direction dir);
std::string_view to_string(PortKind kind);

// ---------------------------------------------------------------------------
// Unresolved description, as read from a graph file or assembled in code.
// ---------------------------------------------------------------------------

struct PortDesc {
  std::string id;
  Direction dir = Direction::In;
  PortKind kind = PortKind::Srp;
  int atr = 1;
  /// Length of the Boolean control value; ControlOut ports only.
  int control_len = 0;
};

struct ActorDesc {
  std::string id;
  ActorKind kind = ActorKind::StaticProcessing;
  std::string behavior = "generic";
  std::map<std::string, std::string> params;
  std::vector<PortDesc> ports;
};

struct FifoDesc {
  std::string id;
  std::string src;  // "actor.port"
  std::string dst;  // "actor.port"
  std::optional<int> rate;
  int delay = 0;
  int token_bytes = 1;
  std::optional<std::vector<unsigned char>> delay_payload;
};

struct ControlEntry {
  std::string control;  // "actor.port" of a ControlOut port
  std::string drp;      // "actor.port" of a DRP
  int element = 0;      // 1-based index into the control value
};

struct GraphDescription {
  std::string name;
  std::vector<ActorDesc> actors;
  std::vector<FifoDesc> fifos;
  std::vector<ControlEntry> control_table;
};

// ---------------------------------------------------------------------------
// Resolved, immutable graph.
// ---------------------------------------------------------------------------

struct Port {
  std::string name;
  ActorId actor = 0;
  Direction dir = Direction::In;
  PortKind kind = PortKind::Srp;
  int atr = 1;
  int control_len = 0;
  std::vector<FifoId> fifos;  // exactly one for inputs, >= 1 for outputs

  /// Inactive token rate: zero for DRPs, the fixed rate otherwise.
  int itr() const { return kind == PortKind::Drp ? 0 : atr; }
  bool is_input() const { return dir == Direction::In; }
};

struct Actor {
  std::string name;
  ActorKind kind = ActorKind::StaticProcessing;
  std::string behavior;
  std::map<std::string, std::string> params;
  std::vector<PortId> ports;  // declaration order
};

struct Fifo {
  std::string name;
  PortId src = 0;
  PortId dst = 0;
  int rate = 1;
  int delay = 0;
  int token_bytes = 1;
  std::vector<unsigned char> delay_payload;  // delay * token_bytes bytes
};

/// T[control-output port][DRP] -> 1-based control value element, 0 when the
/// row does not control the column.
class ControlTable {
 public:
  ControlTable() = default;
  ControlTable(std::vector<PortId> rows, std::vector<PortId> cols);

  const std::vector<PortId>& rows() const { return rows_; }
  const std::vector<PortId>& cols() const { return cols_; }

  int at(PortId control, PortId drp) const;
  int& entry(std::size_t row, std::size_t col) { return cells_[row * cols_.size() + col]; }
  int entry(std::size_t row, std::size_t col) const { return cells_[row * cols_.size() + col]; }

  std::optional<std::size_t> row_of(PortId control) const;
  std::optional<std::size_t> col_of(PortId drp) const;

 private:
  std::vector<PortId> rows_;
  std::vector<PortId> cols_;
  std::vector<int> cells_;
};

class GraphError : public std::runtime_error {
 public:
  enum class Kind {
    DanglingPort,
    RateMismatch,
    DuplicateId,
    BadActorShape,
    UnknownReference,
    BadFifo,
    BadControlTable,
    Uncontrolled,
  };
  GraphError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(GraphError::Kind kind);

class Graph {
 public:
  const std::string& name() const { return name_; }
  const std::vector<Actor>& actors() const { return actors_; }
  const std::vector<Port>& ports() const { return ports_; }
  const std::vector<Fifo>& fifos() const { return fifos_; }
  const ControlTable& control_table() const { return table_; }

  const Actor& actor(ActorId id) const { return actors_.at(id); }
  const Port& port(PortId id) const { return ports_.at(id); }
  const Fifo& fifo(FifoId id) const { return fifos_.at(id); }

  std::optional<ActorId> find_actor(std::string_view name) const;
  std::optional<PortId> find_port(std::string_view qualified) const;
  std::optional<FifoId> find_fifo(std::string_view name) const;

  /// "actor.port"
  std::string port_name(PortId id) const;

  /// The unique FIFO feeding an input port.
  FifoId input_fifo(PortId input) const { return ports_.at(input).fifos.front(); }
  ActorId producer(FifoId f) const { return ports_[fifos_[f].src].actor; }
  ActorId consumer(FifoId f) const { return ports_[fifos_[f].dst].actor; }

  /// Control input port of a dynamic actor.
  std::optional<PortId> control_input(ActorId a) const;
  std::vector<PortId> drps(ActorId a) const;
  std::vector<PortId> inputs(ActorId a) const;
  std::vector<PortId> outputs(ActorId a) const;

  bool is_source(ActorId a) const;
  bool is_sink(ActorId a) const;

  /// Back to the external description; build_graph(describe()) is
  /// structurally identical to *this.
  GraphDescription describe() const;

  friend Graph build_graph(const GraphDescription& description);

 private:
  std::string name_;
  std::vector<Actor> actors_;
  std::vector<Port> ports_;
  std::vector<Fifo> fifos_;
  ControlTable table_;
  std::map<std::string, ActorId, std::less<>> actor_index_;
  std::map<std::string, FifoId, std::less<>> fifo_index_;
};

/// Resolves identifiers and enforces every structural invariant. Throws
/// GraphError; no partially-built graph is ever returned.
Graph build_graph(const GraphDescription& description);

/// Symmetric, irreflexive actor adjacency: a ~ b iff a FIFO joins them.
class Adjacency {
 public:
  explicit Adjacency(const Graph& graph);

  bool adjacent(ActorId a, ActorId b) const;
  const std::vector<ActorId>& neighbors(ActorId a) const { return neighbors_.at(a); }
  /// Unordered pairs with first < second, sorted.
  std::vector<std::pair<ActorId, ActorId>> pairs() const;

 private:
  std::vector<std::vector<ActorId>> neighbors_;
};

inline Adjacency adjacency(const Graph& graph) { return Adjacency(graph); }

struct ControlBinding {
  PortId control_port;
  int element;  // 1-based
};

/// Controlling output port and control value element of a DRP.
ControlBinding control_lookup(const Graph& graph, PortId drp);

}  // namespace prune

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prune/graph.hpp"
#include "prune/rules.hpp"

namespace prune {

/// Connected component of a DPG after removing q, x and y. A component built
/// around a direct x -> y FIFO holds a synthetic dummy actor instead.
struct DynamicComponent {
  int id = 0;                     // 1..M
  std::vector<ActorId> actors;    // real members, sorted
  std::optional<std::string> dummy;
  std::optional<FifoId> dummy_fifo;
  std::vector<PortId> in_drps;    // DRPs of x feeding the component
  std::vector<PortId> out_drps;   // DRPs of y fed by the component

  std::vector<std::string> member_names(const Graph& graph) const;
};

/// Dynamic processing graph: configuration actor q, dynamic pair {x, y} and
/// the actors on connecting subchains between them.
struct Dpg {
  ActorId q = 0;
  ActorId x = 0;  // dynamic actor with output DRPs
  ActorId y = 0;  // dynamic actor with input DRPs
  PortId control_port = 0;
  std::vector<ActorId> members;  // includes q, x, y; sorted
  std::vector<DynamicComponent> dcs;
  int declared_len = 0;  // control value length declared on control_port

  int m() const { return static_cast<int>(dcs.size()); }
};

class AnalysisError : public std::runtime_error {
 public:
  enum class Kind { OrphanDynamicActor, SharedMembership };
  AnalysisError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Region {
  std::string label;
  std::vector<ActorId> actors;
};

struct ScheduleEntry {
  ActorId actor;
  int count;
};

/// Periodic schedule of one region: every member fires once per period.
struct Schedule {
  std::string region;
  std::vector<ActorId> members;
  std::vector<ScheduleEntry> firings;
};

class DeadlockError : public std::runtime_error {
 public:
  DeadlockError(std::string region, std::vector<ActorId> cycle, std::map<FifoId, int> tokens, const std::string& what)
      : std::runtime_error(what), region_(std::move(region)), cycle_(std::move(cycle)), tokens_(std::move(tokens)) {}

  const std::string& region() const { return region_; }
  /// Actors of a wait-for cycle, first actor repeated implicitly.
  const std::vector<ActorId>& cycle() const { return cycle_; }
  /// Token counts of region FIFOs when the simulation got stuck.
  const std::map<FifoId, int>& tokens() const { return tokens_; }

 private:
  std::string region_;
  std::vector<ActorId> cycle_;
  std::map<FifoId, int> tokens_;
};

struct BufferBounds {
  /// region label -> FIFO -> B_k(f)
  std::map<std::string, std::map<FifoId, int>> per_region;
  /// beta(f) = max_k B_k(f); indexed by FifoId, 0 for FIFOs in no region.
  std::vector<int> beta;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

struct ConsistencyReport {
  bool consistent = false;
  std::vector<Violation> violations;
  std::vector<Dpg> dpgs;
  std::vector<Schedule> schedules;
  BufferBounds bounds;
  std::vector<Diagnostic> diagnostics;
};

/// Requires check_all(graph) to be empty. Throws AnalysisError.
std::vector<Dpg> identify_dpgs(const Graph& graph);

Dpg decompose_dcs(const Graph& graph, Dpg dpg);

/// Empty result means the DPG is valid.
std::vector<Diagnostic> validate_dpg(const Graph& graph, const Dpg& dpg);

/// FIFOs with both endpoints inside the region.
std::vector<FifoId> region_fifos(const Graph& graph, const Region& region);

/// Simulates one period with every DRP at its active rate. Fireable actors
/// are picked in lexicographic name order. Throws DeadlockError.
Schedule compute_schedule(const Graph& graph, const Region& region);

/// Replays a schedule; true when all region FIFOs return to their delays.
bool is_periodic(const Graph& graph, const Schedule& schedule);

BufferBounds compute_bounds(const Graph& graph, const std::vector<Schedule>& schedules);

ConsistencyReport analyze(const Graph& graph);

}  // namespace prune

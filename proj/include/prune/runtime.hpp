#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "prune/analysis.hpp"
#include "prune/behavior.hpp"
#include "prune/fifo.hpp"
#include "prune/graph.hpp"

namespace prune {

struct RuntimeConfig {
  /// Firings of every source actor (actors without inputs).
  std::uint64_t source_firings = 0;
  std::map<std::string, std::uint64_t> source_firings_override;
  /// actor name -> CPU core
  std::map<std::string, int> pinning;
  std::uint64_t seed = 1;
  int c_factor = 3;
  std::chrono::milliseconds timeout{30000};
  bool trace = false;
  bool capture_sink_bytes = false;
  /// Cap each channel's logical occupancy at the analyzer's beta(f).
  bool enforce_bounds = true;
  /// Called on the actor's thread right before each fire.
  std::function<void(ActorId, std::uint64_t)> before_fire;

  std::uint64_t firings_for(const std::string& actor) const;
};

struct TraceLine {
  char op;  // 'w', 'r' or 'c' (copy)
  int occupancy;
};

struct RunReport {
  std::map<std::string, std::uint64_t> sink_digests;
  std::map<std::string, std::vector<unsigned char>> sink_bytes;  // when captured
  std::vector<int> max_occupancy;  // per FIFO
  std::vector<int> slots;          // per FIFO, allocated (runtime only)
  std::vector<std::uint64_t> firings;  // per actor
  std::vector<ActorId> firing_log;     // interpreter only
  std::uint64_t rate_checks = 0;
  std::uint64_t rate_violations = 0;
  double wall_seconds = 0;
  std::vector<std::vector<TraceLine>> traces;  // per FIFO, when tracing
};

/// One line per transaction: "<fifo id> <w|r|copy> <occupancy>".
void write_trace(std::ostream& os, const Graph& graph, const RunReport& report);

class RuntimeError : public std::runtime_error {
 public:
  enum class Kind { InconsistentGraph, AllocationFailure, ActorPanic, Timeout, Unterminated };
  RuntimeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(RuntimeError::Kind kind);

/// Every actor must be reachable from a source actor, otherwise the end of
/// stream protocol cannot terminate it.
void check_terminates(const Graph& graph);

/// One OS thread per actor over blocking channels sized by layout_plan.
class Runtime {
 public:
  /// Refuses graphs that fail analysis (RuntimeError::InconsistentGraph).
  Runtime(const Graph& graph, const BehaviorRegistry& registry, RuntimeConfig config);
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const ConsistencyReport& analysis() const { return analysis_; }
  const Channel& channel(FifoId f) const { return *channels_.at(f); }

  /// Runs to completion: sources fire, EOS drains the graph, threads join.
  /// Single use. Throws RuntimeError (ActorPanic, Timeout).
  RunReport run();

 private:
  struct ActorState;
  void actor_loop(ActorId a);
  void poison_adjacent(ActorId a);
  void poison_all();

  const Graph& graph_;
  RuntimeConfig config_;
  ConsistencyReport analysis_;
  std::vector<std::unique_ptr<Channel>> channels_;
  std::vector<std::unique_ptr<ActorState>> actors_;
  bool ran_ = false;
};

inline std::unique_ptr<Runtime> instantiate(const Graph& graph, const BehaviorRegistry& registry,
                                            RuntimeConfig config) {
  return std::make_unique<Runtime>(graph, registry, std::move(config));
}

}  // namespace prune

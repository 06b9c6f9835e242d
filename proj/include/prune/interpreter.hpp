#pragma once

#include <stdexcept>
#include <string>

#include "prune/behavior.hpp"
#include "prune/graph.hpp"
#include "prune/runtime.hpp"

namespace prune {

/// The interpreter stopped with tokens stuck beyond some FIFO's delay.
class OracleDeadlock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-threaded reference execution over unbounded queues. Each round
/// visits the actors in name order and fires every one that can fire. Stops
/// after a round with no firing. Uses the same behaviors and RuntimeConfig
/// (source_firings, seed, capture_sink_bytes) as the runtime, so sink digests
/// must agree. Throws RuntimeError::InconsistentGraph and OracleDeadlock.
RunReport interpret(const Graph& graph, const BehaviorRegistry& registry, const RuntimeConfig& config);

}  // namespace prune

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prune/graph.hpp"

namespace prune {

/// Boolean control value. On the wire: one byte per element (0 or 1),
/// zero-padded to the control FIFO's token width.
struct ControlToken {
  std::vector<bool> bits;

  static ControlToken decode(std::span<const unsigned char> bytes, int length);
  void encode(std::span<unsigned char> bytes) const;
};

/// 64-bit FNV-1a.
class Digest {
 public:
  void update(std::span<const unsigned char> bytes);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

/// Everything an actor sees during one firing. Port indices are local to the
/// actor, in declaration order. Inactive ports have empty spans.
class FiringContext {
 public:
  FiringContext(const Graph& graph, ActorId actor);

  const Graph& graph() const { return *graph_; }
  ActorId actor() const { return actor_; }
  std::uint64_t firing() const { return firing_; }
  std::size_t num_ports() const { return ports_.size(); }
  /// Local index of a port by name; throws std::out_of_range.
  std::size_t port(std::string_view name) const;
  const Port& port_info(std::size_t local) const { return graph_->port(ports_[local]); }

  int rate(std::size_t local) const { return rates_[local]; }
  bool active(std::size_t local) const { return rates_[local] > 0; }
  std::span<const unsigned char> input(std::size_t local) const { return inputs_.at(local); }
  std::span<unsigned char> output(std::size_t local) const { return outputs_.at(local); }
  /// Control token consumed by a dynamic actor this firing.
  const ControlToken& control() const { return control_; }

  void write_control(std::size_t local, const ControlToken& token) const { token.encode(output(local)); }

  // Executor side.
  void begin(std::uint64_t firing);
  void set_rate(std::size_t local, int rate) { rates_[local] = rate; }
  void set_input(std::size_t local, std::span<const unsigned char> s) { inputs_[local] = s; }
  void set_output(std::size_t local, std::span<unsigned char> s) { outputs_[local] = s; }
  void set_control(ControlToken token) { control_ = std::move(token); }

 private:
  const Graph* graph_;
  ActorId actor_;
  std::uint64_t firing_ = 0;
  std::vector<PortId> ports_;
  std::vector<int> rates_;
  std::vector<std::span<const unsigned char>> inputs_;
  std::vector<std::span<unsigned char>> outputs_;
  ControlToken control_;
};

struct DrpBinding {
  std::size_t local;  // local port index
  int element;        // 1-based control value element
};

/// Actor function bundle. `fire` is mandatory; the rest are optional.
class ActorBehavior {
 public:
  virtual ~ActorBehavior() = default;

  virtual void init() {}
  /// Dynamic actors: activation of each DRP (same order as `drps`) for the
  /// firing that consumed `token`. The default applies the control table.
  virtual std::vector<bool> control(const ControlToken& token, std::span<const DrpBinding> drps);
  virtual void fire(FiringContext& ctx) = 0;
  virtual void finish() {}
};

struct BehaviorContext {
  const Graph& graph;
  ActorId actor;
  std::uint64_t seed;

  const std::map<std::string, std::string>& params() const { return graph.actor(actor).params; }
  std::string param(const std::string& key, const std::string& fallback) const;
  long long param_int(const std::string& key, long long fallback) const;
};

using BehaviorFactory = std::function<std::unique_ptr<ActorBehavior>(const BehaviorContext&)>;

class BehaviorRegistry {
 public:
  /// Registry holding the built-in "generic" and "copy" behaviors.
  static BehaviorRegistry with_builtins();

  void add(std::string name, BehaviorFactory factory);
  bool contains(std::string_view name) const;
  /// Throws std::invalid_argument for unknown names.
  std::unique_ptr<ActorBehavior> create(const BehaviorContext& ctx) const;

 private:
  std::map<std::string, BehaviorFactory, std::less<>> factories_;
};

/// Control table bindings of an actor's DRPs, in local port order.
std::vector<DrpBinding> drp_bindings(const Graph& graph, ActorId actor);

/// tokrate(p, phi) = BTOI(v[T[j][p]]) * atr(p) for DRPs, atr(p) otherwise.
int expected_rate(const Graph& graph, PortId port, const ControlToken* token);

}  // namespace prune

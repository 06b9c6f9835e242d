#include "prune/behavior.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace prune {

ControlToken ControlToken::decode(std::span<const unsigned char> bytes, int length) {
  ControlToken t;
  t.bits.resize(static_cast<std::size_t>(length));
  for (int i = 0; i < length && static_cast<std::size_t>(i) < bytes.size(); ++i) t.bits[i] = bytes[i] != 0;
  return t;
}

void ControlToken::encode(std::span<unsigned char> bytes) const {
  std::fill(bytes.begin(), bytes.end(), 0);
  for (std::size_t i = 0; i < bits.size() && i < bytes.size(); ++i) bytes[i] = bits[i] ? 1 : 0;
}

void Digest::update(std::span<const unsigned char> bytes) {
  for (unsigned char b : bytes) {
    state_ ^= b;
    state_ *= 0x100000001b3ULL;
  }
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string Digest::hex() const { return to_hex(state_); }

// ---------------------------------------------------------------------------

FiringContext::FiringContext(const Graph& graph, ActorId actor)
    : graph_(&graph), actor_(actor), ports_(graph.actor(actor).ports) {
  rates_.assign(ports_.size(), 0);
  inputs_.assign(ports_.size(), {});
  outputs_.assign(ports_.size(), {});
}

std::size_t FiringContext::port(std::string_view name) const {
  for (std::size_t i = 0; i < ports_.size(); ++i)
    if (graph_->port(ports_[i]).name == name) return i;
  throw std::out_of_range("actor " + graph_->actor(actor_).name + " has no port '" + std::string(name) + "'");
}

void FiringContext::begin(std::uint64_t firing) {
  firing_ = firing;
  std::fill(inputs_.begin(), inputs_.end(), std::span<const unsigned char>{});
  std::fill(outputs_.begin(), outputs_.end(), std::span<unsigned char>{});
}

std::vector<bool> ActorBehavior::control(const ControlToken& token, std::span<const DrpBinding> drps) {
  std::vector<bool> active;
  active.reserve(drps.size());
  for (const auto& d : drps) {
    const auto idx = static_cast<std::size_t>(d.element - 1);
    active.push_back(idx < token.bits.size() && token.bits[idx]);
  }
  return active;
}

std::vector<DrpBinding> drp_bindings(const Graph& graph, ActorId actor) {
  std::vector<DrpBinding> out;
  const auto& ports = graph.actor(actor).ports;
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (graph.port(ports[i]).kind == PortKind::Drp) out.push_back({i, control_lookup(graph, ports[i]).element});
  return out;
}

int expected_rate(const Graph& graph, PortId port, const ControlToken* token) {
  const Port& p = graph.port(port);
  if (p.kind != PortKind::Drp) return p.atr;
  const auto idx = static_cast<std::size_t>(control_lookup(graph, port).element - 1);
  const bool on = token && idx < token->bits.size() && token->bits[idx];
  return (on ? 1 : 0) * p.atr;
}

// ---------------------------------------------------------------------------

std::string BehaviorContext::param(const std::string& key, const std::string& fallback) const {
  auto it = params().find(key);
  return it == params().end() ? fallback : it->second;
}

long long BehaviorContext::param_int(const std::string& key, long long fallback) const {
  auto it = params().find(key);
  if (it == params().end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("actor " + graph.actor(actor).name + ": parameter '" + key + "' is not an integer");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic function of (seed, actor, firing, active inputs). Works for
// any actor shape, which makes it the default for graph files.
class GenericBehavior final : public ActorBehavior {
 public:
  explicit GenericBehavior(const BehaviorContext& ctx) {
    Digest d;
    const auto& name = ctx.graph.actor(ctx.actor).name;
    d.update({reinterpret_cast<const unsigned char*>(name.data()), name.size()});
    salt_ = splitmix64(d.value() ^ ctx.seed);
  }

  void fire(FiringContext& ctx) override {
    Digest d;
    const std::uint64_t head[2] = {salt_, ctx.firing()};
    d.update({reinterpret_cast<const unsigned char*>(head), sizeof head});
    for (std::size_t i = 0; i < ctx.num_ports(); ++i)
      if (ctx.port_info(i).is_input()) d.update(ctx.input(i));
    const std::uint64_t h = d.value();
    for (std::size_t i = 0; i < ctx.num_ports(); ++i) {
      const Port& p = ctx.port_info(i);
      if (p.is_input() || !ctx.active(i)) continue;
      std::uint64_t s = splitmix64(h ^ (0x51ed2701ULL * (i + 1)));
      if (p.kind == PortKind::ControlOut) {
        ControlToken t;
        for (int k = 0; k < p.control_len; ++k) t.bits.push_back((splitmix64(s + k) & 1) != 0);
        ctx.write_control(i, t);
        continue;
      }
      auto out = ctx.output(i);
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (k % 8 == 0) s = splitmix64(s);
        out[k] = static_cast<unsigned char>(s >> (8 * (k % 8)));
      }
    }
  }

 private:
  std::uint64_t salt_ = 0;
};

// i-th active input to i-th active output; sources emit their firing index.
class CopyBehavior final : public ActorBehavior {
 public:
  void fire(FiringContext& ctx) override {
    std::vector<std::span<const unsigned char>> ins;
    for (std::size_t i = 0; i < ctx.num_ports(); ++i)
      if (ctx.port_info(i).is_input() && ctx.port_info(i).kind != PortKind::ControlIn && ctx.active(i))
        ins.push_back(ctx.input(i));
    std::size_t next = 0;
    for (std::size_t i = 0; i < ctx.num_ports(); ++i) {
      if (ctx.port_info(i).is_input() || !ctx.active(i)) continue;
      auto out = ctx.output(i);
      std::fill(out.begin(), out.end(), 0);
      if (next < ins.size()) {
        const auto& in = ins[next++];
        std::copy_n(in.begin(), std::min(in.size(), out.size()), out.begin());
      } else {
        const std::uint64_t f = ctx.firing();
        std::memcpy(out.data(), &f, std::min(out.size(), sizeof f));
      }
    }
  }
};

}  // namespace

BehaviorRegistry BehaviorRegistry::with_builtins() {
  BehaviorRegistry r;
  r.add("generic", [](const BehaviorContext& c) { return std::make_unique<GenericBehavior>(c); });
  r.add("copy", [](const BehaviorContext&) { return std::make_unique<CopyBehavior>(); });
  return r;
}

void BehaviorRegistry::add(std::string name, BehaviorFactory factory) {
  factories_[std::move(name)] = std::move(factory);
}

bool BehaviorRegistry::contains(std::string_view name) const { return factories_.find(name) != factories_.end(); }

std::unique_ptr<ActorBehavior> BehaviorRegistry::create(const BehaviorContext& ctx) const {
  const auto& name = ctx.graph.actor(ctx.actor).behavior;
  auto it = factories_.find(name);
  if (it == factories_.end())
    throw std::invalid_argument("unknown behavior '" + name + "' for actor " + ctx.graph.actor(ctx.actor).name);
  return it->second(ctx);
}

}  // namespace prune

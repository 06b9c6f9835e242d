#include "prune/runtime.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <ostream>
#include <thread>

namespace prune {

std::uint64_t RuntimeConfig::firings_for(const std::string& actor) const {
  auto it = source_firings_override.find(actor);
  return it == source_firings_override.end() ? source_firings : it->second;
}

std::string_view to_string(RuntimeError::Kind kind) {
  using K = RuntimeError::Kind;
  switch (kind) {
    case K::InconsistentGraph: return "InconsistentGraph";
    case K::AllocationFailure: return "AllocationFailure";
    case K::ActorPanic: return "ActorPanic";
    case K::Timeout: return "Timeout";
    case K::Unterminated: return "Unterminated";
  }
  return "?";
}

void write_trace(std::ostream& os, const Graph& graph, const RunReport& report) {
  for (FifoId f = 0; f < report.traces.size(); ++f)
    for (const TraceLine& t : report.traces[f]) {
      os << graph.fifo(f).name << ' ';
      if (t.op == 'c')
        os << "copy";
      else
        os << t.op;
      os << ' ' << t.occupancy << '\n';
    }
}

void check_terminates(const Graph& graph) {
  std::vector<bool> reached(graph.actors().size(), false);
  std::deque<ActorId> queue;
  for (ActorId a = 0; a < graph.actors().size(); ++a)
    if (graph.is_source(a)) {
      reached[a] = true;
      queue.push_back(a);
    }
  while (!queue.empty()) {
    ActorId a = queue.front();
    queue.pop_front();
    for (PortId p : graph.outputs(a))
      for (FifoId f : graph.port(p).fifos) {
        ActorId b = graph.consumer(f);
        if (!reached[b]) {
          reached[b] = true;
          queue.push_back(b);
        }
      }
  }
  for (ActorId a = 0; a < graph.actors().size(); ++a)
    if (!reached[a])
      throw RuntimeError(RuntimeError::Kind::Unterminated,
                         "actor " + graph.actor(a).name + " is not reachable from any source actor");
}

struct Runtime::ActorState {
  ActorState(const Graph& g, ActorId a) : ctx(g, a) {}

  std::unique_ptr<ActorBehavior> behavior;
  FiringContext ctx;
  std::vector<DrpBinding> drps;
  std::thread thread;
  std::uint64_t firings = 0;
  Digest sink_digest;
  std::vector<unsigned char> sink_bytes;
  std::uint64_t rate_checks = 0;
  std::uint64_t rate_violations = 0;
  std::string panic;
};

Runtime::Runtime(const Graph& graph, const BehaviorRegistry& registry, RuntimeConfig config)
    : graph_(graph), config_(std::move(config)) {
  analysis_ = analyze(graph);
  if (!analysis_.consistent) {
    std::string msg = "graph failed consistency analysis";
    for (const auto& d : analysis_.diagnostics) msg += "\n  " + d.code + ": " + d.message;
    throw RuntimeError(RuntimeError::Kind::InconsistentGraph, msg);
  }
  check_terminates(graph);

  try {
    for (FifoId f = 0; f < graph.fifos().size(); ++f) {
      const Fifo& fifo = graph.fifo(f);
      const CapacityPlan plan = layout_plan(fifo.rate, fifo.delay, config_.c_factor, fifo.token_bytes);
      const int limit = config_.enforce_bounds ? analysis_.bounds.beta[f] : 0;
      channels_.push_back(std::make_unique<Channel>(plan, fifo.delay_payload, limit, config_.trace));
    }
  } catch (const FifoError& e) {
    throw RuntimeError(RuntimeError::Kind::AllocationFailure, e.what());
  } catch (const std::bad_alloc&) {
    throw RuntimeError(RuntimeError::Kind::AllocationFailure, "out of memory allocating channels");
  }

  for (ActorId a = 0; a < graph.actors().size(); ++a) {
    auto st = std::make_unique<ActorState>(graph, a);
    st->behavior = registry.create(BehaviorContext{graph, a, config_.seed});
    st->drps = drp_bindings(graph, a);
    actors_.push_back(std::move(st));
  }
}

Runtime::~Runtime() {
  for (auto& st : actors_)
    if (st->thread.joinable()) {
      poison_all();
      st->thread.join();
    }
}

void Runtime::poison_adjacent(ActorId a) {
  for (PortId p : graph_.actor(a).ports)
    for (FifoId f : graph_.port(p).fifos) channels_[f]->poison();
}

void Runtime::poison_all() {
  for (auto& c : channels_) c->poison();
}

namespace {

void pin_thread(std::thread& t, int core) {
  const unsigned n = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<unsigned>(core) % n, &set);
  pthread_setaffinity_np(t.native_handle(), sizeof set, &set);
}

}  // namespace

void Runtime::actor_loop(ActorId a) {
  ActorState& st = *actors_[a];
  const Actor& actor = graph_.actor(a);
  const bool source = graph_.is_source(a);
  const std::uint64_t limit = source ? config_.firings_for(actor.name) : 0;
  const bool sink = graph_.is_sink(a);
  const auto& ports = actor.ports;

  std::optional<std::size_t> cport;
  std::vector<std::size_t> ins, outs;
  for (std::size_t i = 0; i < ports.size(); ++i) {
    const Port& p = graph_.port(ports[i]);
    if (p.kind == PortKind::ControlIn)
      cport = i;
    else if (p.is_input())
      ins.push_back(i);
    else
      outs.push_back(i);
  }
  int control_len = 0;
  if (cport) control_len = graph_.port(graph_.fifo(graph_.input_fifo(ports[*cport])).src).control_len;

  struct PendingWrite {
    Channel* channel;
    std::span<unsigned char> span;
    std::size_t local;
  };
  std::vector<Channel*> claimed;
  std::vector<PendingWrite> writes;
  std::vector<std::int64_t> before(ports.size() + 1, 0);

  for (std::uint64_t firing = 0;; ++firing) {
    if (source && firing >= limit) break;
    st.ctx.begin(firing);

    ControlToken token;
    const ControlToken* token_ptr = nullptr;
    if (cport) {
      Channel& ch = *channels_[graph_.input_fifo(ports[*cport])];
      auto span = ch.read_start();
      if (!span) break;
      token = ControlToken::decode(*span, control_len);
      ch.read_end();
      token_ptr = &token;
    }
    for (std::size_t i = 0; i < ports.size(); ++i) {
      const Port& p = graph_.port(ports[i]);
      st.ctx.set_rate(i, p.kind == PortKind::ControlIn ? 1 : p.atr);
    }
    if (token_ptr) {
      const auto active = st.behavior->control(token, st.drps);
      for (std::size_t k = 0; k < st.drps.size(); ++k)
        st.ctx.set_rate(st.drps[k].local, k < active.size() && active[k] ? graph_.port(ports[st.drps[k].local]).atr : 0);
      st.ctx.set_control(token);
    }

    // Counters for the per-firing rate check.
    for (std::size_t i : ins) before[i] = channels_[graph_.input_fifo(ports[i])]->tokens_read();
    for (std::size_t i : outs) before[i] = channels_[graph_.port(ports[i]).fifos.front()]->tokens_written();

    bool eos = false;
    claimed.clear();
    for (std::size_t i : ins) {
      if (!st.ctx.active(i)) continue;
      Channel& ch = *channels_[graph_.input_fifo(ports[i])];
      auto span = ch.read_start();
      if (!span) {
        eos = true;
        break;
      }
      st.ctx.set_input(i, *span);
      claimed.push_back(&ch);
    }
    if (eos) {
      for (Channel* ch : claimed) ch->read_end();
      break;
    }

    writes.clear();
    for (std::size_t i : outs) {
      if (!st.ctx.active(i)) continue;
      for (FifoId f : graph_.port(ports[i]).fifos) {
        Channel& ch = *channels_[f];
        writes.push_back({&ch, ch.write_start(), i});
      }
    }
    for (const auto& w : writes)
      if (st.ctx.output(w.local).empty()) st.ctx.set_output(w.local, w.span);

    if (config_.before_fire) config_.before_fire(a, firing);
    st.behavior->fire(st.ctx);

    if (sink) {
      for (std::size_t i : ins) {
        if (!st.ctx.active(i)) continue;
        st.sink_digest.update(st.ctx.input(i));
        if (config_.capture_sink_bytes) st.sink_bytes.insert(st.sink_bytes.end(), st.ctx.input(i).begin(), st.ctx.input(i).end());
      }
    }
    for (const auto& w : writes) {
      auto primary = st.ctx.output(w.local);
      if (w.span.data() != primary.data()) std::memcpy(w.span.data(), primary.data(), primary.size());
    }
    for (const auto& w : writes) w.channel->write_end();
    for (Channel* ch : claimed) ch->read_end();

    // tokrate(p, phi) check against what actually crossed each channel.
    auto check = [&](std::int64_t moved, PortId p) {
      ++st.rate_checks;
      if (moved != expected_rate(graph_, p, token_ptr)) ++st.rate_violations;
    };
    for (std::size_t i : ins) check(channels_[graph_.input_fifo(ports[i])]->tokens_read() - before[i], ports[i]);
    for (std::size_t i : outs) check(channels_[graph_.port(ports[i]).fifos.front()]->tokens_written() - before[i], ports[i]);
    if (cport) check(1, ports[*cport]);
    ++st.firings;
  }
  for (std::size_t i : outs)
    for (FifoId f : graph_.port(ports[i]).fifos) channels_[f]->close();
}

RunReport Runtime::run() {
  if (ran_) throw std::logic_error("Runtime::run called twice");
  ran_ = true;

  RunReport report;
  const std::size_t n = actors_.size();
  for (auto& st : actors_) st->behavior->init();

  std::mutex done_mu;
  std::condition_variable done_cv;
  std::size_t done = 0;

  const auto t0 = std::chrono::steady_clock::now();
  for (ActorId a = 0; a < n; ++a) {
    actors_[a]->thread = std::thread([this, a, &done_mu, &done_cv, &done] {
      ActorState& st = *actors_[a];
      try {
        actor_loop(a);
      } catch (const FifoError& e) {
        if (e.kind() != FifoError::Kind::Poisoned) st.panic = e.what();
        poison_adjacent(a);
      } catch (const std::exception& e) {
        st.panic = e.what();
        poison_adjacent(a);
      }
      try {
        st.behavior->finish();
      } catch (const std::exception& e) {
        if (st.panic.empty()) st.panic = std::string("finish: ") + e.what();
      }
      {
        std::lock_guard lock(done_mu);
        ++done;
      }
      done_cv.notify_all();
    });
    if (auto it = config_.pinning.find(graph_.actor(a).name); it != config_.pinning.end())
      pin_thread(actors_[a]->thread, it->second);
  }

  bool timed_out = false;
  {
    std::unique_lock lock(done_mu);
    if (!done_cv.wait_for(lock, config_.timeout, [&] { return done == n; })) timed_out = true;
  }
  if (timed_out) poison_all();
  for (auto& st : actors_) st->thread.join();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (timed_out)
    throw RuntimeError(RuntimeError::Kind::Timeout,
                       "run did not finish within " + std::to_string(config_.timeout.count()) + " ms");
  for (ActorId a = 0; a < n; ++a)
    if (!actors_[a]->panic.empty())
      throw RuntimeError(RuntimeError::Kind::ActorPanic,
                         "actor " + graph_.actor(a).name + " failed: " + actors_[a]->panic);

  for (ActorId a = 0; a < n; ++a) {
    ActorState& st = *actors_[a];
    report.firings.push_back(st.firings);
    report.rate_checks += st.rate_checks;
    report.rate_violations += st.rate_violations;
    if (graph_.is_sink(a)) {
      report.sink_digests[graph_.actor(a).name] = st.sink_digest.value();
      if (config_.capture_sink_bytes) report.sink_bytes[graph_.actor(a).name] = std::move(st.sink_bytes);
    }
  }
  for (const auto& ch : channels_) {
    report.max_occupancy.push_back(ch->max_occupancy());
    report.slots.push_back(ch->plan().slots);
    if (config_.trace) {
      std::vector<TraceLine> lines;
      for (const auto& e : ch->trace()) lines.push_back({static_cast<char>(e.op), e.occupancy});
      report.traces.push_back(std::move(lines));
    }
  }
  return report;
}

}  // namespace prune

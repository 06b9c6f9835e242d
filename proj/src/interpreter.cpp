#include "prune/interpreter.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "prune/analysis.hpp"

namespace prune {

namespace {

struct Queue {
  std::deque<unsigned char> bytes;
  int tokens = 0;
  int max_tokens = 0;
};

}  // namespace

RunReport interpret(const Graph& graph, const BehaviorRegistry& registry, const RuntimeConfig& config) {
  const ConsistencyReport analysis = analyze(graph);
  if (!analysis.consistent)
    throw RuntimeError(RuntimeError::Kind::InconsistentGraph, "graph failed consistency analysis");
  check_terminates(graph);

  const std::size_t n = graph.actors().size();
  std::vector<Queue> queues(graph.fifos().size());
  for (FifoId f = 0; f < queues.size(); ++f) {
    const Fifo& fifo = graph.fifo(f);
    queues[f].bytes.assign(fifo.delay_payload.begin(), fifo.delay_payload.end());
    queues[f].tokens = queues[f].max_tokens = fifo.delay;
  }

  std::vector<std::unique_ptr<ActorBehavior>> behaviors;
  std::vector<FiringContext> contexts;
  std::vector<std::vector<DrpBinding>> drps;
  for (ActorId a = 0; a < n; ++a) {
    behaviors.push_back(registry.create(BehaviorContext{graph, a, config.seed}));
    contexts.emplace_back(graph, a);
    drps.push_back(drp_bindings(graph, a));
  }
  std::vector<ActorId> order(n);
  std::iota(order.begin(), order.end(), ActorId{0});
  std::sort(order.begin(), order.end(),
            [&](ActorId a, ActorId b) { return graph.actor(a).name < graph.actor(b).name; });

  RunReport report;
  report.firings.assign(n, 0);
  std::vector<Digest> digests(n);
  std::vector<std::vector<unsigned char>> captured(n);

  for (auto& b : behaviors) b->init();

  auto take = [&](FifoId f, int rate) {
    Queue& q = queues[f];
    const std::size_t len = static_cast<std::size_t>(rate) * graph.fifo(f).token_bytes;
    std::vector<unsigned char> out(q.bytes.begin(), q.bytes.begin() + static_cast<std::ptrdiff_t>(len));
    q.bytes.erase(q.bytes.begin(), q.bytes.begin() + static_cast<std::ptrdiff_t>(len));
    q.tokens -= rate;
    return out;
  };

  // Activation of every port for the next firing of `a`, or nothing when the
  // actor cannot fire yet.
  auto plan_firing = [&](ActorId a, ControlToken& token, bool& has_token) -> std::optional<std::vector<int>> {
    const Actor& actor = graph.actor(a);
    if (graph.is_source(a) && report.firings[a] >= config.firings_for(actor.name)) return std::nullopt;
    std::vector<int> rates;
    has_token = false;
    for (PortId p : actor.ports) {
      const Port& port = graph.port(p);
      rates.push_back(port.kind == PortKind::ControlIn ? 1 : port.atr);
      if (port.kind == PortKind::ControlIn) {
        const FifoId f = graph.input_fifo(p);
        if (queues[f].tokens < 1) return std::nullopt;
        const int len = graph.port(graph.fifo(f).src).control_len;
        std::vector<unsigned char> head(queues[f].bytes.begin(), queues[f].bytes.begin() + graph.fifo(f).token_bytes);
        token = ControlToken::decode(head, len);
        has_token = true;
      }
    }
    if (has_token) {
      const auto active = behaviors[a]->control(token, drps[a]);
      for (std::size_t k = 0; k < drps[a].size(); ++k)
        rates[drps[a][k].local] = k < active.size() && active[k] ? graph.port(actor.ports[drps[a][k].local]).atr : 0;
    }
    for (std::size_t i = 0; i < actor.ports.size(); ++i) {
      const Port& port = graph.port(actor.ports[i]);
      if (port.is_input() && queues[graph.input_fifo(actor.ports[i])].tokens < rates[i]) return std::nullopt;
    }
    return rates;
  };

  for (bool progress = true; progress;) {
    progress = false;
    for (ActorId a : order) {
      ControlToken token;
      bool has_token = false;
      auto rates = plan_firing(a, token, has_token);
      if (!rates) continue;
      progress = true;

      const Actor& actor = graph.actor(a);
      FiringContext& ctx = contexts[a];
      ctx.begin(report.firings[a]);
      if (has_token) ctx.set_control(token);
      std::vector<std::vector<unsigned char>> in(actor.ports.size()), out(actor.ports.size());
      for (std::size_t i = 0; i < actor.ports.size(); ++i) {
        const Port& port = graph.port(actor.ports[i]);
        ctx.set_rate(i, (*rates)[i]);
        if ((*rates)[i] == 0) continue;
        if (port.is_input()) {
          in[i] = take(graph.input_fifo(actor.ports[i]), (*rates)[i]);
          if (port.kind != PortKind::ControlIn) ctx.set_input(i, in[i]);
        } else {
          out[i].assign(static_cast<std::size_t>((*rates)[i]) * graph.fifo(port.fifos.front()).token_bytes, 0);
          ctx.set_output(i, out[i]);
        }
      }
      behaviors[a]->fire(ctx);

      for (std::size_t i = 0; i < actor.ports.size(); ++i) {
        const Port& port = graph.port(actor.ports[i]);
        if ((*rates)[i] != expected_rate(graph, actor.ports[i], has_token ? &token : nullptr)) ++report.rate_violations;
        ++report.rate_checks;
        if ((*rates)[i] == 0) continue;
        if (port.is_input()) {
          if (graph.is_sink(a) && port.kind != PortKind::ControlIn) {
            digests[a].update(in[i]);
            if (config.capture_sink_bytes) captured[a].insert(captured[a].end(), in[i].begin(), in[i].end());
          }
          continue;
        }
        for (FifoId f : port.fifos) {
          Queue& q = queues[f];
          q.bytes.insert(q.bytes.end(), out[i].begin(), out[i].end());
          q.tokens += (*rates)[i];
          q.max_tokens = std::max(q.max_tokens, q.tokens);
        }
      }
      ++report.firings[a];
      report.firing_log.push_back(a);
    }
  }

  for (auto& b : behaviors) b->finish();

  for (FifoId f = 0; f < queues.size(); ++f)
    if (queues[f].tokens > graph.fifo(f).delay)
      throw OracleDeadlock("FIFO " + graph.fifo(f).name + " holds " + std::to_string(queues[f].tokens) +
                           " tokens after the run, delay is " + std::to_string(graph.fifo(f).delay));

  for (ActorId a = 0; a < n; ++a)
    if (graph.is_sink(a)) {
      report.sink_digests[graph.actor(a).name] = digests[a].value();
      if (config.capture_sink_bytes) report.sink_bytes[graph.actor(a).name] = std::move(captured[a]);
    }
  for (const Queue& q : queues) report.max_occupancy.push_back(q.max_tokens);
  return report;
}

}  // namespace prune

#include <cstring>

#include <Eigen/Core>

#include "build.hpp"
#include "prune/corpus.hpp"

namespace prune::corpus {

using namespace detail;

namespace {

constexpr int kDim = kBypassDim;
constexpr int kTokenBytes = kDim * kDim * static_cast<int>(sizeof(std::int32_t));
using Mat = Eigen::Matrix<std::int32_t, kDim, kDim, Eigen::RowMajor>;

// Small signed integers so two stages stay far from overflow.
std::vector<std::int32_t> small_ints(std::uint64_t s, int lo, int hi) {
  std::vector<std::int32_t> v(kDim * kDim);
  for (auto& e : v) {
    s = mix(s);
    e = lo + static_cast<std::int32_t>(s % static_cast<std::uint64_t>(hi - lo + 1));
  }
  return v;
}

}  // namespace

std::vector<std::int32_t> bypass_input(std::uint64_t k, std::uint64_t seed) {
  return small_ints(seed ^ 0xb1a5ULL ^ (k * 0x9e3779b97f4a7c15ULL), -8, 8);
}

std::vector<std::int32_t> bypass_weights(int layer, std::uint64_t seed) {
  return small_ints(seed ^ (0x1a7e0000ULL + static_cast<std::uint64_t>(layer)), -4, 4);
}

bool bypass_processes(std::uint64_t k, const std::string& policy) {
  if (policy == "alternate") return k % 2 == 0;
  if (policy == "process") return true;
  if (policy == "bypass") return false;
  throw std::invalid_argument("unknown bypass policy '" + policy + "'");
}

namespace {

Eigen::Map<const Mat> as_mat(std::span<const unsigned char> bytes) {
  return Eigen::Map<const Mat>(reinterpret_cast<const std::int32_t*>(bytes.data()));
}

Eigen::Map<Mat> as_mat(std::span<unsigned char> bytes) { return Eigen::Map<Mat>(reinterpret_cast<std::int32_t*>(bytes.data())); }

class Conf final : public ActorBehavior {
 public:
  explicit Conf(const BehaviorContext& c) : policy_(c.param("policy", "alternate")) {}

  void fire(FiringContext& ctx) override {
    const bool process = bypass_processes(ctx.firing(), policy_);
    ctx.write_control(0, ControlToken{{process, !process}});
  }

 private:
  std::string policy_;
};

class Source final : public ActorBehavior {
 public:
  explicit Source(const BehaviorContext& c) : seed_(c.seed) {}

  void fire(FiringContext& ctx) override {
    const auto m = bypass_input(ctx.firing(), seed_);
    std::memcpy(ctx.output(0).data(), m.data(), kTokenBytes);
  }

 private:
  std::uint64_t seed_;
};

class SelectPad final : public ActorBehavior {
 public:
  void fire(FiringContext& ctx) override {
    const auto in = ctx.input(ctx.port("in"));
    for (const char* name : {"process", "bypass"})
      if (const auto p = ctx.port(name); ctx.active(p)) std::memcpy(ctx.output(p).data(), in.data(), in.size());
  }
};

// out = max(W * in, 0) >> shift
class Stage final : public ActorBehavior {
 public:
  explicit Stage(const BehaviorContext& c) {
    const auto w = bypass_weights(static_cast<int>(c.param_int("layer", 1)), c.seed);
    w_ = Eigen::Map<const Mat>(w.data());
    shift_ = static_cast<int>(c.param_int("shift", 0));
  }

  void fire(FiringContext& ctx) override {
    Mat m = (w_ * as_mat(ctx.input(0))).cwiseMax(0);
    as_mat(ctx.output(1)) = m.unaryExpr([this](std::int32_t v) { return v >> shift_; });
  }

 private:
  Mat w_;
  int shift_ = 0;
};

class Merge final : public ActorBehavior {
 public:
  void fire(FiringContext& ctx) override {
    auto out = as_mat(ctx.output(ctx.port("out")));
    if (const auto p = ctx.port("processed"); ctx.active(p))
      out = as_mat(ctx.input(p));
    else
      out.setConstant(kBypassMarker);
  }
};

}  // namespace

void register_bypass(BehaviorRegistry& r) {
  r.add("ab_conf", [](const BehaviorContext& c) { return std::make_unique<Conf>(c); });
  r.add("ab_source", [](const BehaviorContext& c) { return std::make_unique<Source>(c); });
  r.add("ab_selectpad", [](const BehaviorContext&) { return std::make_unique<SelectPad>(); });
  r.add("ab_stage", [](const BehaviorContext& c) { return std::make_unique<Stage>(c); });
  r.add("ab_merge", [](const BehaviorContext&) { return std::make_unique<Merge>(); });
}

CorpusApp adaptive_bypass(int frames, const std::string& policy) {
  bypass_processes(0, policy);
  CorpusApp app;
  app.name = "adaptive_bypass";
  app.source_firings = static_cast<std::uint64_t>(frames);
  app.expected_dpgs = 1;
  app.expected_m = 2;
  GraphDescription& g = app.graph;
  g.name = app.name;
  g.actors = {
      {"q", ActorKind::Configuration, "ab_conf", {{"policy", policy}}, {control_out("c", 2)}},
      {"source", ActorKind::StaticProcessing, "ab_source", {}, {out("out")}},
      {"selectpad", ActorKind::Dynamic, "ab_selectpad", {},
       {in("cin", PortKind::ControlIn), in("in"), out("process", PortKind::Drp), out("bypass", PortKind::Drp)}},
      {"l1", ActorKind::StaticProcessing, "ab_stage", {{"layer", "1"}}, {in("in"), out("out")}},
      {"l2", ActorKind::StaticProcessing, "ab_stage", {{"layer", "2"}, {"shift", "4"}}, {in("in"), out("out")}},
      {"merge", ActorKind::Dynamic, "ab_merge", {},
       {in("cin", PortKind::ControlIn), in("processed", PortKind::Drp), in("bypass", PortKind::Drp), out("out")}},
      {"sink", ActorKind::StaticProcessing, "discard", {}, {in("in")}},
  };
  g.fifos = {
      fifo("q_selectpad", "q.c", "selectpad.cin", 1, 2),
      fifo("q_merge", "q.c", "merge.cin", 1, 2),
      fifo("source_selectpad", "source.out", "selectpad.in", 1, kTokenBytes),
      fifo("selectpad_l1", "selectpad.process", "l1.in", 1, kTokenBytes),
      fifo("l1_l2", "l1.out", "l2.in", 1, kTokenBytes),
      fifo("l2_merge", "l2.out", "merge.processed", 1, kTokenBytes),
      fifo("bypass", "selectpad.bypass", "merge.bypass", 1, kTokenBytes),
      fifo("merge_sink", "merge.out", "sink.in", 1, kTokenBytes),
  };
  g.control_table = {
      {"q.c", "selectpad.process", 1},
      {"q.c", "selectpad.bypass", 2},
      {"q.c", "merge.processed", 1},
      {"q.c", "merge.bypass", 2},
  };
  return app;
}

}  // namespace prune::corpus

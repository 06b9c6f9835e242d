#include <algorithm>
#include <bit>
#include <cstring>

#include "build.hpp"
#include "prune/corpus.hpp"

namespace prune::corpus {

using namespace detail;

namespace {

// Uniform in [-1, 1) with 24 significant bits, exact in float.
float unit(std::uint64_t bits) { return static_cast<float>(bits >> 40) / 8388608.0f - 1.0f; }

std::string key(const char* prefix, int i) { return prefix + std::to_string(i); }

}  // namespace

std::vector<cfloat> dpd_input_block(int block, std::uint64_t k, std::uint64_t seed, const std::string& input) {
  std::vector<cfloat> out(static_cast<std::size_t>(block));
  if (input == "impulse") {
    out[0] = {1.0f, 0.0f};
    return out;
  }
  if (input != "random") throw std::invalid_argument("unknown predistortion input '" + input + "'");
  std::uint64_t s = mix(seed ^ 0x5eed0000ULL ^ (k * 0x9e3779b97f4a7c15ULL));
  for (auto& v : out) {
    const std::uint64_t re = s = mix(s);
    const std::uint64_t im = s = mix(s);
    v = {unit(re), unit(im)};
  }
  return out;
}

std::vector<cfloat> dpd_taps(int branch, int taps, std::uint64_t seed) {
  std::vector<cfloat> h(static_cast<std::size_t>(taps));
  std::uint64_t s = mix(seed ^ (0xf1f0ULL + static_cast<std::uint64_t>(branch)));
  for (auto& v : h) {
    const std::uint64_t re = s = mix(s);
    const std::uint64_t im = s = mix(s);
    v = {unit(re) * 0.5f, unit(im) * 0.5f};
  }
  return h;
}

std::vector<bool> dpd_control(int branches, std::uint64_t k, std::uint64_t seed, const std::string& policy) {
  std::vector<bool> bits(static_cast<std::size_t>(branches), false);
  if (policy == "all") {
    bits.assign(bits.size(), true);
  } else if (policy == "random") {
    if (branches < 2) throw std::invalid_argument("random policy needs at least two branches");
    // Rejection sampling keeps the choice uniform over subsets of size >= 2.
    std::uint64_t s = mix(seed ^ 0xc0ffeeULL ^ (k * 0xd1b54a32d192ed03ULL));
    const std::uint64_t mask = branches >= 64 ? ~0ULL : (1ULL << branches) - 1;
    std::uint64_t pick;
    do {
      s = mix(s);
      pick = s & mask;
    } while (std::popcount(pick) < 2);
    for (int i = 0; i < branches; ++i) bits[i] = (pick >> i) & 1;
  } else {
    if (policy.size() != bits.size() || policy.find_first_not_of("01") != std::string::npos)
      throw std::invalid_argument("policy must be random, all or a 0/1 mask of length " + std::to_string(branches));
    for (int i = 0; i < branches; ++i) bits[i] = policy[i] == '1';
  }
  return bits;
}

namespace {

std::span<const cfloat> samples(std::span<const unsigned char> bytes) {
  return {reinterpret_cast<const cfloat*>(bytes.data()), bytes.size() / sizeof(cfloat)};
}

std::span<cfloat> samples(std::span<unsigned char> bytes) {
  return {reinterpret_cast<cfloat*>(bytes.data()), bytes.size() / sizeof(cfloat)};
}

class Conf final : public ActorBehavior {
 public:
  explicit Conf(const BehaviorContext& c)
      : branches_(static_cast<int>(c.param_int("branches", 4))), seed_(c.seed), policy_(c.param("policy", "random")) {}

  void fire(FiringContext& ctx) override {
    ctx.write_control(0, ControlToken{dpd_control(branches_, ctx.firing(), seed_, policy_)});
  }

 private:
  int branches_;
  std::uint64_t seed_;
  std::string policy_;
};

class Source final : public ActorBehavior {
 public:
  explicit Source(const BehaviorContext& c)
      : block_(static_cast<int>(c.param_int("block", 256))), seed_(c.seed), input_(c.param("input", "random")) {}

  void fire(FiringContext& ctx) override {
    const auto b = dpd_input_block(block_, ctx.firing(), seed_, input_);
    std::memcpy(ctx.output(0).data(), b.data(), b.size() * sizeof(cfloat));
  }

 private:
  int block_;
  std::uint64_t seed_;
  std::string input_;
};

class Splitter final : public ActorBehavior {
 public:
  void fire(FiringContext& ctx) override {
    const auto in = ctx.input(ctx.port("in"));
    for (std::size_t i = 0; i < ctx.num_ports(); ++i)
      if (ctx.port_info(i).kind == PortKind::Drp && ctx.active(i)) std::memcpy(ctx.output(i).data(), in.data(), in.size());
  }
};

// Complex FIR with explicit real arithmetic. History only advances on
// firings, so an idle branch resumes where it stopped.
class Fir final : public ActorBehavior {
 public:
  explicit Fir(const BehaviorContext& c)
      : h_(dpd_taps(static_cast<int>(c.param_int("branch", 1)), static_cast<int>(c.param_int("taps", 10)), c.seed)),
        history_(h_.size() - 1) {}

  void fire(FiringContext& ctx) override {
    const auto x = samples(ctx.input(0));
    auto y = samples(ctx.output(1));
    const std::size_t past = history_.size();
    auto at = [&](std::ptrdiff_t n) { return n >= 0 ? x[n] : history_[past + n]; };
    for (std::size_t n = 0; n < x.size(); ++n) {
      float re = 0.0f, im = 0.0f;
      for (std::size_t k = 0; k < h_.size(); ++k) {
        const cfloat v = at(static_cast<std::ptrdiff_t>(n) - static_cast<std::ptrdiff_t>(k));
        re = re + (h_[k].real() * v.real() - h_[k].imag() * v.imag());
        im = im + (h_[k].real() * v.imag() + h_[k].imag() * v.real());
      }
      y[n] = {re, im};
    }
    for (std::size_t i = 0; i < past; ++i) {
      const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size()) - static_cast<std::ptrdiff_t>(past - i);
      history_[i] = at(n);
    }
  }

 private:
  std::vector<cfloat> h_;
  std::vector<cfloat> history_;  // last taps-1 inputs, oldest first
};

class Adder final : public ActorBehavior {
 public:
  void fire(FiringContext& ctx) override {
    auto out = samples(ctx.output(ctx.port("out")));
    std::fill(out.begin(), out.end(), cfloat{});
    for (std::size_t i = 0; i < ctx.num_ports(); ++i) {
      if (ctx.port_info(i).kind != PortKind::Drp || !ctx.active(i)) continue;
      const auto in = samples(ctx.input(i));
      for (std::size_t n = 0; n < out.size(); ++n) out[n] = {out[n].real() + in[n].real(), out[n].imag() + in[n].imag()};
    }
  }
};

}  // namespace

void register_dpd(BehaviorRegistry& r) {
  r.add("dpd_conf", [](const BehaviorContext& c) { return std::make_unique<Conf>(c); });
  r.add("dpd_source", [](const BehaviorContext& c) { return std::make_unique<Source>(c); });
  r.add("dpd_split", [](const BehaviorContext&) { return std::make_unique<Splitter>(); });
  r.add("dpd_fir", [](const BehaviorContext& c) { return std::make_unique<Fir>(c); });
  r.add("dpd_add", [](const BehaviorContext&) { return std::make_unique<Adder>(); });
}

CorpusApp dynamic_predistortion(int branches, int taps, int block, int blocks, const std::string& policy,
                                const std::string& input) {
  if (branches < 1 || taps < 1 || block < taps) throw std::invalid_argument("bad predistortion parameters");
  dpd_control(branches, 0, 0, policy);  // validates the policy string
  const int tb = sizeof(cfloat);

  CorpusApp app;
  app.name = "dynamic_predistortion";
  app.source_firings = static_cast<std::uint64_t>(blocks);
  app.expected_dpgs = 1;
  app.expected_m = branches;
  GraphDescription& g = app.graph;
  g.name = app.name;

  ActorDesc x{"x", ActorKind::Dynamic, "dpd_split", {}, {in("cin", PortKind::ControlIn), in("in", PortKind::Srp, block)}};
  ActorDesc y{"y", ActorKind::Dynamic, "dpd_add", {}, {in("cin", PortKind::ControlIn)}};
  g.actors.push_back({"q", ActorKind::Configuration, "dpd_conf",
                      {{"branches", std::to_string(branches)}, {"policy", policy}}, {control_out("c", branches)}});
  g.actors.push_back({"source", ActorKind::StaticProcessing, "dpd_source",
                      {{"block", std::to_string(block)}, {"input", input}}, {out("out", PortKind::Srp, block)}});
  g.fifos.push_back(fifo("q_x", "q.c", "x.cin", 1, branches));
  g.fifos.push_back(fifo("q_y", "q.c", "y.cin", 1, branches));
  g.fifos.push_back(fifo("source_x", "source.out", "x.in", block, tb));
  for (int i = 1; i <= branches; ++i) {
    const std::string fir = key("fir", i);
    x.ports.push_back(out(key("o", i), PortKind::Drp, block));
    y.ports.push_back(in(key("i", i), PortKind::Drp, block));
    g.actors.push_back({fir, ActorKind::StaticProcessing, "dpd_fir",
                        {{"branch", std::to_string(i)}, {"taps", std::to_string(taps)}},
                        {in("in", PortKind::Srp, block), out("out", PortKind::Srp, block)}});
    g.fifos.push_back(fifo(key("x_fir", i), "x." + key("o", i), fir + ".in", block, tb));
    g.fifos.push_back(fifo(key("fir_y", i), fir + ".out", "y." + key("i", i), block, tb));
    g.control_table.push_back({"q.c", "x." + key("o", i), i});
    g.control_table.push_back({"q.c", "y." + key("i", i), i});
  }
  y.ports.push_back(out("out", PortKind::Srp, block));
  g.actors.push_back(std::move(x));
  g.actors.push_back(std::move(y));
  g.actors.push_back({"sink", ActorKind::StaticProcessing, "discard", {}, {in("in", PortKind::Srp, block)}});
  g.fifos.push_back(fifo("y_sink", "y.out", "sink.in", block, tb));
  return app;
}

}  // namespace prune::corpus

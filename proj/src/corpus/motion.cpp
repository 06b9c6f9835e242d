#include <algorithm>
#include <cstdlib>

#include "build.hpp"
#include "prune/corpus.hpp"

namespace prune::corpus {

using namespace detail;

std::vector<std::uint8_t> motion_input_frame(int w, int h, std::uint64_t k, std::uint64_t seed,
                                             const std::string& pattern) {
  std::vector<std::uint8_t> frame(static_cast<std::size_t>(w) * h, 0);
  if (pattern == "zero") return frame;
  const std::uint64_t base = pattern == "shift" ? 0 : k;
  std::uint64_t s = mix(seed ^ (base * 0x632be59bd9b4e019ULL));
  for (auto& px : frame) {
    s = mix(s);
    px = static_cast<std::uint8_t>(s >> 56);
  }
  if (pattern == "shift") {
    std::vector<std::uint8_t> moved(frame.size());
    const std::uint64_t dx = (2 * k) % static_cast<std::uint64_t>(w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        moved[y * w + (x + dx) % w] = frame[y * w + x];
    return moved;
  }
  if (pattern != "random") throw std::invalid_argument("unknown motion input pattern '" + pattern + "'");
  return frame;
}

namespace {

struct Frame {
  int w = 0, h = 0;

  explicit Frame(const BehaviorContext& c)
      : w(static_cast<int>(c.param_int("w", 64))), h(static_cast<int>(c.param_int("h", 64))) {}
};

class Source final : public ActorBehavior {
 public:
  explicit Source(const BehaviorContext& c) : f_(c), seed_(c.seed), pattern_(c.param("pattern", "random")) {}

  void fire(FiringContext& ctx) override {
    const auto frame = motion_input_frame(f_.w, f_.h, ctx.firing(), seed_, pattern_);
    auto out = ctx.output(0);
    std::copy(frame.begin(), frame.end(), out.begin());
  }

 private:
  Frame f_;
  std::uint64_t seed_;
  std::string pattern_;
};

// 5x5 binomial blur; the two outermost rows and columns are copied through.
class Gauss final : public ActorBehavior {
 public:
  explicit Gauss(const BehaviorContext& c) : f_(c) {}

  void fire(FiringContext& ctx) override {
    static constexpr int k[5] = {1, 4, 6, 4, 1};
    auto in = ctx.input(0);
    auto out = ctx.output(1);
    const int w = f_.w, h = f_.h;
    std::copy(in.begin(), in.end(), out.begin());
    for (int y = 2; y < h - 2; ++y)
      for (int x = 2; x < w - 2; ++x) {
        int sum = 0;
        for (int j = -2; j <= 2; ++j)
          for (int i = -2; i <= 2; ++i) sum += k[j + 2] * k[i + 2] * in[(y + j) * w + x + i];
        out[y * w + x] = static_cast<unsigned char>((sum + 128) >> 8);
      }
  }

 private:
  Frame f_;
};

class Thres final : public ActorBehavior {
 public:
  explicit Thres(const BehaviorContext&) {}

  void fire(FiringContext& ctx) override {
    auto cur = ctx.input(ctx.port("cur"));
    auto prev = ctx.input(ctx.port("prev"));
    auto out = ctx.output(ctx.port("out"));
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = std::abs(int(cur[i]) - int(prev[i])) > kMotionThreshold ? 255 : 0;
  }
};

// Median of the pixel and its four direct neighbours; border pixels copied.
class Med final : public ActorBehavior {
 public:
  explicit Med(const BehaviorContext& c) : f_(c) {}

  void fire(FiringContext& ctx) override {
    auto in = ctx.input(0);
    auto out = ctx.output(1);
    const int w = f_.w, h = f_.h;
    std::copy(in.begin(), in.end(), out.begin());
    for (int y = 1; y < h - 1; ++y)
      for (int x = 1; x < w - 1; ++x) {
        unsigned char v[5] = {in[y * w + x], in[(y - 1) * w + x], in[(y + 1) * w + x], in[y * w + x - 1],
                              in[y * w + x + 1]};
        std::nth_element(v, v + 2, v + 5);
        out[y * w + x] = v[2];
      }
  }

 private:
  Frame f_;
};

class Discard final : public ActorBehavior {
 public:
  void fire(FiringContext&) override {}
};

template <class B>
BehaviorFactory make() {
  return [](const BehaviorContext& c) { return std::make_unique<B>(c); };
}

}  // namespace

void register_motion(BehaviorRegistry& r) {
  r.add("md_source", make<Source>());
  r.add("md_gauss", make<Gauss>());
  r.add("md_thres", make<Thres>());
  r.add("md_med", make<Med>());
  r.add("discard", [](const BehaviorContext&) { return std::make_unique<Discard>(); });
}

CorpusApp motion_detection(int w, int h, int frames, const std::string& pattern) {
  if (w < 5 || h < 5) throw std::invalid_argument("motion detection frames must be at least 5x5");
  const int bytes = w * h;
  const std::map<std::string, std::string> dims{{"w", std::to_string(w)}, {"h", std::to_string(h)}};
  auto with = [&](std::map<std::string, std::string> extra) {
    extra.insert(dims.begin(), dims.end());
    return extra;
  };

  CorpusApp app;
  app.name = "motion_detection";
  app.source_firings = static_cast<std::uint64_t>(frames);
  GraphDescription& g = app.graph;
  g.name = app.name;
  g.actors = {
      {"source", ActorKind::StaticProcessing, "md_source", with({{"pattern", pattern}}), {out("out")}},
      {"gauss", ActorKind::StaticProcessing, "md_gauss", with({}), {in("in"), out("out")}},
      {"thres", ActorKind::StaticProcessing, "md_thres", with({}), {in("cur"), in("prev"), out("out")}},
      {"med", ActorKind::StaticProcessing, "md_med", with({}), {in("in"), out("out")}},
      {"sink", ActorKind::StaticProcessing, "discard", {}, {in("in")}},
  };
  g.fifos = {
      fifo("source_gauss", "source.out", "gauss.in", 1, bytes),
      fifo("gauss_cur", "gauss.out", "thres.cur", 1, bytes),
      fifo("gauss_prev", "gauss.out", "thres.prev", 1, bytes, 1),
      fifo("thres_med", "thres.out", "med.in", 1, bytes),
      fifo("med_sink", "med.out", "sink.in", 1, bytes),
  };
  return app;
}

}  // namespace prune::corpus

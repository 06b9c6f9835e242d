#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <random>
#include <thread>

#include "prune/fifo.hpp"

using namespace prune;

namespace {

// Capacity formula written branch by branch without the modulo shortcut.
std::int64_t eq2_oracle(std::int64_t r, std::int64_t b, std::int64_t q, std::int64_t c) {
  bool multiple = false;
  for (std::int64_t k = 0; k * r <= q; ++k)
    if (k * r == q) multiple = true;
  if (!multiple) return b * (r * c + q);
  const std::int64_t rc = r * c;
  return b * (rc > q ? rc : q);
}

std::vector<unsigned char> zeros(std::size_t n) { return std::vector<unsigned char>(n, 0); }

struct Op {
  char op;
  SlotRange slots;
};

std::vector<Op> ops(const Channel& ch) {
  std::vector<Op> out;
  for (const auto& e : ch.trace()) out.push_back({static_cast<char>(e.op), e.slots});
  return out;
}

}  // namespace

TEST_SUITE("fifo") {
  TEST_CASE("capacity examples") {
    CHECK(capacity(4, 1, 1, 3) == 13);
    CHECK(capacity(1, 4, 0, 2) == 8);
    CHECK(capacity(4, 1, 8, 3) == 12);
    CHECK(capacity(3, 2, 2, 2) == 16);
  }

  TEST_CASE("capacity sweep against an independent formula") {
    int cases = 0;
    for (int r = 1; r <= 5; ++r)
      for (int q = 0; q <= 9; q += 1 + (q % 3))
        for (int c = 2; c <= 4; ++c)
          for (int b : {1, 3, 8}) {
            if (cases == 200) break;
            INFO("r=" << r << " B=" << b << " Q=" << q << " C=" << c);
            CHECK(capacity(r, b, q, c) == eq2_oracle(r, b, q, c));
            ++cases;
          }
    CHECK(cases == 200);
  }

  TEST_CASE("capacity rejects bad parameters") {
    CHECK_THROWS_AS(capacity(0, 1, 0, 3), FifoError);
    CHECK_THROWS_AS(capacity(1, 0, 0, 3), FifoError);
    CHECK_THROWS_AS(capacity(1, 1, -1, 3), FifoError);
    CHECK_THROWS_AS(capacity(1, 1, 0, 1), FifoError);
    // Q >= r*C unaligned: formula still answers, the layout refuses.
    CHECK(capacity(4, 1, 13, 3) == 25);
    CHECK_THROWS_AS(layout_plan(4, 13, 3), FifoError);
  }

  TEST_CASE("layout plans") {
    const CapacityPlan unaligned_delay = layout_plan(4, 1, 3);
    CHECK(unaligned_delay.slots == 13);
    CHECK(unaligned_delay.write_chunks == std::vector<int>{1, 5, 9});
    CHECK(unaligned_delay.read_chunks == std::vector<int>{0, 4, 8});
    REQUIRE(unaligned_delay.copy.has_value());
    CHECK(unaligned_delay.copy->first == SlotRange{12, 13});
    CHECK(unaligned_delay.copy->second == SlotRange{0, 1});

    const CapacityPlan ring = layout_plan(1, 0, 3);
    CHECK(ring.slots == 3);
    CHECK_FALSE(ring.copy.has_value());

    const CapacityPlan odd = layout_plan(2, 3, 2);
    CHECK(odd.slots == 7);
    CHECK(odd.write_chunks == std::vector<int>{3, 5});
    CHECK(odd.read_chunks == std::vector<int>{0, 2});
    CHECK(odd.copy->first == SlotRange{4, 7});
    CHECK(odd.copy->second == SlotRange{0, 3});

    for (int r = 1; r <= 4; ++r)
      for (int q = 0; q < 3 * r; ++q)
        for (int c = 2; c <= 4; ++c) {
          if (q % r != 0 && q >= r * c) continue;
          const CapacityPlan p = layout_plan(r, q, c, 3);
          CHECK(p.bytes == capacity(r, 3, q, c));
          CHECK(p.bytes == 3LL * p.slots);
        }
  }

  TEST_CASE("slot trace over three cycles with one delay token, rate 4, C=3") {
    Channel ch(layout_plan(4, 1, 3), zeros(1), 0, true);
    for (int i = 0; i < 9; ++i) {
      ch.write_start();
      ch.write_end();
      REQUIRE(ch.read_start().has_value());
      ch.read_end();
    }
    // First write fills 1..4, first read takes 0..3, the third write ends at
    // slot 12 and is followed by the copy of slot 12 to slot 0.
    std::vector<Op> expected;
    for (int cycle = 0; cycle < 3; ++cycle) {
      expected.push_back({'w', {1, 5}});
      expected.push_back({'r', {0, 4}});
      expected.push_back({'w', {5, 9}});
      expected.push_back({'r', {4, 8}});
      expected.push_back({'w', {9, 13}});
      expected.push_back({'c', {0, 1}});
      expected.push_back({'r', {8, 12}});
    }
    const auto got = ops(ch);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      INFO("event " << i);
      CHECK(got[i].op == expected[i].op);
      CHECK(got[i].slots == expected[i].slots);
    }
  }

  TEST_CASE("first read returns the delay token ahead of the stream") {
    const std::vector<unsigned char> d{0xDD};
    Channel ch(layout_plan(4, 1, 3), d);
    auto w = ch.write_start();
    const unsigned char t[4] = {1, 2, 3, 4};
    std::memcpy(w.data(), t, 4);
    ch.write_end();
    auto r = ch.read_start();
    REQUIRE(r.has_value());
    CHECK(std::vector<unsigned char>(r->begin(), r->end()) == std::vector<unsigned char>{0xDD, 1, 2, 3});
    ch.read_end();
    CHECK(ch.occupancy() == 1);
  }

  TEST_CASE("order preservation and conservation") {
    Channel ch(layout_plan(4, 0, 2), {});
    auto w = ch.write_start();
    for (int i = 0; i < 4; ++i) w[i] = static_cast<unsigned char>(i + 1);
    ch.write_end();
    CHECK(ch.tokens_read() + ch.occupancy() == ch.tokens_written() + 0);
    auto r = ch.read_start();
    CHECK(std::vector<unsigned char>(r->begin(), r->end()) == std::vector<unsigned char>{1, 2, 3, 4});
    ch.read_end();
    CHECK(ch.tokens_read() + ch.occupancy() == ch.tokens_written());
  }

  TEST_CASE("aligned wrap after C writes") {
    Channel ch(layout_plan(2, 0, 3), {}, 0, true);
    std::vector<int> starts;
    for (int i = 0; i < 4; ++i) {
      ch.write_start();
      ch.write_end();
      ch.read_start();
      ch.read_end();
    }
    for (const auto& e : ch.trace())
      if (e.op == Channel::Op::Write) starts.push_back(e.slots.begin);
    CHECK(starts == std::vector<int>{0, 2, 4, 0});
  }

  TEST_CASE("writer blocks on a full channel until a read completes") {
    Channel ch(layout_plan(1, 0, 3), {});
    for (int i = 0; i < 3; ++i) {
      ch.write_start();
      ch.write_end();
    }
    std::atomic<bool> wrote{false};
    std::thread writer([&] {
      ch.write_start();
      wrote = true;
      ch.write_end();
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    CHECK_FALSE(wrote.load());
    ch.read_start();
    ch.read_end();
    writer.join();
    CHECK(wrote.load());
    CHECK(ch.occupancy() == 3);
  }

  TEST_CASE("occupancy limit below the physical window") {
    Channel ch(layout_plan(1, 0, 3), {}, 1);
    ch.write_start();
    ch.write_end();
    std::atomic<bool> wrote{false};
    std::thread writer([&] {
      ch.write_start();
      wrote = true;
      ch.write_end();
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    CHECK_FALSE(wrote.load());
    ch.read_start();  // claiming is enough to admit the next write
    writer.join();
    ch.read_end();
    CHECK(ch.max_occupancy() == 1);
  }

  TEST_CASE("end of stream and poisoning") {
    Channel ch(layout_plan(2, 1, 3), zeros(1));
    ch.write_start();
    ch.write_end();
    ch.close();
    auto first = ch.read_start();
    REQUIRE(first.has_value());
    ch.read_end();
    CHECK_FALSE(ch.read_start().has_value());  // one token left, rate is 2
    CHECK(ch.closed());

    Channel p(layout_plan(1, 0, 2), {});
    std::thread reader([&] { CHECK_THROWS_AS(p.read_start(), FifoError); });
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    p.poison();
    reader.join();
    CHECK_THROWS_AS(p.write_start(), FifoError);
  }

  TEST_CASE("protocol errors") {
    Channel ch(layout_plan(1, 0, 2), {});
    CHECK_THROWS_AS(ch.write_end(), FifoError);
    CHECK_THROWS_AS(ch.read_end(), FifoError);
    ch.write_start();
    CHECK_THROWS_AS(ch.write_start(), FifoError);
    CHECK_THROWS_AS(Channel(layout_plan(1, 2, 2), zeros(1)), FifoError);
  }

  TEST_CASE("threaded stress against an in-order oracle") {
    struct Params {
      int r, q, c, b;
    };
    for (const Params p : {Params{1, 0, 2, 1}, Params{4, 1, 3, 1}, Params{3, 2, 2, 2}, Params{2, 3, 2, 3},
                           Params{4, 8, 3, 1}, Params{5, 0, 3, 4}, Params{3, 7, 3, 2}}) {
      INFO("r=" << p.r << " Q=" << p.q << " C=" << p.c << " B=" << p.b);
      const CapacityPlan plan = layout_plan(p.r, p.q, p.c, p.b);
      const int chunks = 1000;
      const std::size_t tb = static_cast<std::size_t>(p.b);
      std::vector<unsigned char> payload(static_cast<std::size_t>(p.q) * tb);
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<unsigned char>(0xA0 + i);
      Channel ch(plan, payload);

      // Token n of the stream carries the byte pattern of n.
      auto token_byte = [&](std::int64_t n, std::size_t k) { return static_cast<unsigned char>((n * 7 + k * 13) & 0xff); };
      std::vector<unsigned char> expected = payload;
      for (std::int64_t n = 0; n < std::int64_t(chunks) * p.r; ++n)
        for (std::size_t k = 0; k < tb; ++k) expected.push_back(token_byte(n, k));

      std::atomic<const unsigned char*> wspan{nullptr}, rspan{nullptr};
      const std::size_t span_bytes = static_cast<std::size_t>(p.r) * tb;
      auto overlap = [&](const unsigned char* a, const unsigned char* b) {
        return a && b && a < b + span_bytes && b < a + span_bytes;
      };
      std::atomic<int> overlaps{0};

      std::thread producer([&] {
        std::mt19937 rng(p.r * 100 + p.q);
        std::int64_t n = 0;
        for (int i = 0; i < chunks; ++i) {
          auto w = ch.write_start();
          wspan = w.data();
          if (overlap(w.data(), rspan.load())) ++overlaps;
          for (int t = 0; t < p.r; ++t, ++n)
            for (std::size_t k = 0; k < tb; ++k) w[t * tb + k] = token_byte(n, k);
          if (rng() % 8 == 0) std::this_thread::yield();
          wspan = nullptr;
          ch.write_end();
        }
        ch.close();
      });
      std::vector<unsigned char> received;
      std::mt19937 rng(p.c);
      while (auto r = ch.read_start()) {
        rspan = r->data();
        if (overlap(r->data(), wspan.load())) ++overlaps;
        received.insert(received.end(), r->begin(), r->end());
        if (rng() % 8 == 0) std::this_thread::yield();
        rspan = nullptr;
        ch.read_end();
      }
      producer.join();
      CHECK(overlaps == 0);
      CHECK(ch.max_occupancy() <= plan.slots);
      // Everything but a final partial chunk arrives, in order.
      const std::size_t whole = (expected.size() / span_bytes) * span_bytes;
      REQUIRE(received.size() == whole);
      CHECK(std::equal(received.begin(), received.end(), expected.begin()));
    }
  }
}

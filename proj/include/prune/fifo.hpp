#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prune {

class FifoError : public std::runtime_error {
 public:
  enum class Kind { InvalidParams, Poisoned, ProtocolError };
  FifoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Channel capacity in bytes:
///   B * (r*C + Q)       when Q is not an integer multiple of r
///   B * max(r*C, Q)     otherwise (Q = 0 counts as a multiple)
/// Requires r >= 1, B >= 1, Q >= 0, C >= 2.
std::int64_t capacity(int rate, int token_bytes, int delay, int factor);

struct SlotRange {
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
  friend bool operator==(const SlotRange&, const SlotRange&) = default;
};

/// Slot layout of one channel. In the unaligned case (Q not a multiple of r)
/// write chunk k starts at Q + k*r, read chunk k at k*r, and after the C-th
/// write the tail slots [r*C, r*C + Q) are copied to [0, Q). The aligned case
/// is a plain ring of max(r*C, Q) / r chunks.
struct CapacityPlan {
  int rate = 1;
  int delay = 0;
  int factor = 2;
  int token_bytes = 1;
  int slots = 0;
  std::int64_t bytes = 0;
  bool needs_wrap_copy = false;
  std::vector<int> write_chunks;  // slot offsets, one cycle
  std::vector<int> read_chunks;   // slot offsets, one cycle
  std::optional<std::pair<SlotRange, SlotRange>> copy;  // (from, to)

  /// Tokens that may be outstanding (written, not yet released by the reader).
  int window() const { return needs_wrap_copy ? rate * factor : slots; }
};

/// Throws FifoError(InvalidParams). The unaligned case additionally needs
/// Q < r*C so the copied tail fits ahead of the first write chunk.
CapacityPlan layout_plan(int rate, int delay, int factor, int token_bytes = 1);

/// Blocking single-producer/single-consumer channel with a two-phase API.
/// Each transaction moves exactly `rate` tokens through a contiguous span.
class Channel {
 public:
  enum class Op : char { Write = 'w', Read = 'r', Copy = 'c' };

  struct TraceEvent {
    Op op;
    int occupancy;   // tokens on the channel after the operation
    SlotRange slots; // slots touched
  };

  /// `occupancy_limit` caps written-but-unclaimed tokens; 0 means the
  /// physical window. `delay_payload` must hold delay * token_bytes bytes.
  Channel(const CapacityPlan& plan, std::span<const unsigned char> delay_payload, int occupancy_limit = 0,
          bool trace = false);

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  /// Blocks until `rate` free slots are available; returns the write span.
  std::span<unsigned char> write_start();
  /// Publishes the tokens of the pending write.
  void write_end();
  /// Blocks until `rate` tokens are readable. Empty at end of stream.
  std::optional<std::span<const unsigned char>> read_start();
  /// Releases the slots of the pending read.
  void read_end();

  /// End of stream from the producer. Pending tokens stay readable.
  void close();
  /// Wakes both sides; any blocked or later call throws FifoError(Poisoned).
  void poison();

  const CapacityPlan& plan() const { return plan_; }
  int occupancy() const;
  int max_occupancy() const;
  std::int64_t tokens_written() const;  // excluding delay tokens
  std::int64_t tokens_read() const;
  bool closed() const;
  std::vector<TraceEvent> trace() const;

 private:
  int slot_of(std::int64_t position) const;
  bool can_write() const;
  std::int64_t readable_end() const;
  void record(Op op, SlotRange slots);

  CapacityPlan plan_;
  int limit_;
  bool tracing_;
  std::vector<unsigned char> buffer_;

  mutable std::mutex mu_;
  std::condition_variable can_write_;
  std::condition_variable can_read_;
  // Stream positions, delay tokens included.
  std::int64_t written_ = 0;
  std::int64_t published_ = 0;
  std::int64_t claimed_ = 0;
  std::int64_t released_ = 0;
  bool writing_ = false;
  bool reading_ = false;
  bool eos_ = false;
  bool poisoned_ = false;
  int max_occupancy_ = 0;
  std::vector<TraceEvent> trace_;
};

}  // namespace prune

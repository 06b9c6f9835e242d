#include "prune/fifo.hpp"

#include <algorithm>
#include <cstring>

namespace prune {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw FifoError(FifoError::Kind::InvalidParams, msg);
}

void check_params(int rate, int token_bytes, int delay, int factor) {
  require(rate >= 1, "rate must be >= 1");
  require(token_bytes >= 1, "token size must be >= 1");
  require(delay >= 0, "delay must be >= 0");
  require(factor >= 2, "buffering factor must be >= 2");
}

}  // namespace

std::int64_t capacity(int rate, int token_bytes, int delay, int factor) {
  check_params(rate, token_bytes, delay, factor);
  const std::int64_t r = rate, b = token_bytes, q = delay, c = factor;
  if (q % r != 0) return b * (r * c + q);
  return b * std::max(r * c, q);
}

CapacityPlan layout_plan(int rate, int delay, int factor, int token_bytes) {
  check_params(rate, token_bytes, delay, factor);
  CapacityPlan p;
  p.rate = rate;
  p.delay = delay;
  p.factor = factor;
  p.token_bytes = token_bytes;
  p.bytes = capacity(rate, token_bytes, delay, factor);
  p.slots = static_cast<int>(p.bytes / token_bytes);
  p.needs_wrap_copy = delay % rate != 0;
  if (p.needs_wrap_copy) {
    require(delay < rate * factor, "delay must be below rate * factor when it is not a multiple of the rate");
    for (int k = 0; k < factor; ++k) {
      p.write_chunks.push_back(delay + k * rate);
      p.read_chunks.push_back(k * rate);
    }
    p.copy = std::make_pair(SlotRange{rate * factor, rate * factor + delay}, SlotRange{0, delay});
  } else {
    const int chunks = p.slots / rate;
    for (int k = 0; k < chunks; ++k) {
      p.write_chunks.push_back((delay + k * rate) % p.slots);
      p.read_chunks.push_back(k * rate);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

Channel::Channel(const CapacityPlan& plan, std::span<const unsigned char> delay_payload, int occupancy_limit,
                 bool trace)
    : plan_(plan),
      limit_(occupancy_limit > 0 ? std::min(occupancy_limit, plan.window()) : plan.window()),
      tracing_(trace),
      buffer_(static_cast<std::size_t>(plan.bytes), 0) {
  if (delay_payload.size() != static_cast<std::size_t>(plan.delay) * static_cast<std::size_t>(plan.token_bytes))
    throw FifoError(FifoError::Kind::InvalidParams, "delay payload size does not match delay * token size");
  if (limit_ < plan.rate || limit_ < plan.delay)
    throw FifoError(FifoError::Kind::InvalidParams, "occupancy limit below rate or delay");
  // Delay token n sits in slot n in both layouts.
  std::copy(delay_payload.begin(), delay_payload.end(), buffer_.begin());
  written_ = published_ = plan.delay;
  max_occupancy_ = plan.delay;
}

int Channel::slot_of(std::int64_t position) const {
  if (plan_.needs_wrap_copy) {
    const std::int64_t window = static_cast<std::int64_t>(plan_.rate) * plan_.factor;
    return static_cast<int>((position - plan_.delay) % window + plan_.delay);
  }
  return static_cast<int>(position % plan_.slots);
}

bool Channel::can_write() const {
  const std::int64_t end = written_ + plan_.rate;
  return end - released_ <= plan_.window() && end - claimed_ <= limit_;
}

std::int64_t Channel::readable_end() const { return published_; }

void Channel::record(Op op, SlotRange slots) {
  if (tracing_) trace_.push_back({op, static_cast<int>(written_ - claimed_), slots});
}

std::span<unsigned char> Channel::write_start() {
  std::unique_lock lock(mu_);
  if (writing_) throw FifoError(FifoError::Kind::ProtocolError, "write_start while a write is pending");
  can_write_.wait(lock, [this] { return poisoned_ || can_write(); });
  if (poisoned_) throw FifoError(FifoError::Kind::Poisoned, "channel poisoned");
  if (eos_) throw FifoError(FifoError::Kind::ProtocolError, "write after close");
  writing_ = true;
  const auto offset = static_cast<std::size_t>(slot_of(written_)) * static_cast<std::size_t>(plan_.token_bytes);
  return {buffer_.data() + offset, static_cast<std::size_t>(plan_.rate) * static_cast<std::size_t>(plan_.token_bytes)};
}

void Channel::write_end() {
  const std::size_t tb = static_cast<std::size_t>(plan_.token_bytes);
  bool do_copy = false;
  int first_slot = 0;
  {
    std::lock_guard lock(mu_);
    if (!writing_) throw FifoError(FifoError::Kind::ProtocolError, "write_end without write_start");
    first_slot = slot_of(written_);
    do_copy = plan_.needs_wrap_copy && first_slot + plan_.rate == plan_.slots;
  }
  // The copy target slots were released before this write was admitted, and
  // the reader cannot see them until they are published below.
  if (do_copy) {
    const auto& [from, to] = *plan_.copy;
    std::memcpy(buffer_.data() + static_cast<std::size_t>(to.begin) * tb,
                buffer_.data() + static_cast<std::size_t>(from.begin) * tb,
                static_cast<std::size_t>(from.end - from.begin) * tb);
  }
  {
    std::lock_guard lock(mu_);
    writing_ = false;
    written_ += plan_.rate;
    if (plan_.needs_wrap_copy && !do_copy) {
      // Tokens headed for the copied tail become readable with the copy.
      const std::int64_t window = static_cast<std::int64_t>(plan_.rate) * plan_.factor;
      const std::int64_t cycle = (written_ - plan_.delay - 1) / window;
      published_ = std::min(written_, (cycle + 1) * window);
    } else {
      published_ = written_;
    }
    max_occupancy_ = std::max(max_occupancy_, static_cast<int>(written_ - claimed_));
    record(Op::Write, {first_slot, first_slot + plan_.rate});
    if (do_copy) record(Op::Copy, plan_.copy->second);
  }
  can_read_.notify_one();
}

std::optional<std::span<const unsigned char>> Channel::read_start() {
  std::unique_lock lock(mu_);
  if (reading_) throw FifoError(FifoError::Kind::ProtocolError, "read_start while a read is pending");
  can_read_.wait(lock, [this] { return poisoned_ || eos_ || readable_end() - claimed_ >= plan_.rate; });
  if (poisoned_) throw FifoError(FifoError::Kind::Poisoned, "channel poisoned");
  if (readable_end() - claimed_ < plan_.rate) return std::nullopt;
  reading_ = true;
  const int slot = static_cast<int>(claimed_ % (plan_.needs_wrap_copy ? plan_.rate * plan_.factor : plan_.slots));
  claimed_ += plan_.rate;
  record(Op::Read, {slot, slot + plan_.rate});
  lock.unlock();
  can_write_.notify_one();
  const auto offset = static_cast<std::size_t>(slot) * static_cast<std::size_t>(plan_.token_bytes);
  return std::span<const unsigned char>(
      buffer_.data() + offset, static_cast<std::size_t>(plan_.rate) * static_cast<std::size_t>(plan_.token_bytes));
}

void Channel::read_end() {
  {
    std::lock_guard lock(mu_);
    if (!reading_) throw FifoError(FifoError::Kind::ProtocolError, "read_end without read_start");
    reading_ = false;
    released_ = claimed_;
  }
  can_write_.notify_one();
}

void Channel::close() {
  {
    std::lock_guard lock(mu_);
    eos_ = true;
    // Tokens parked in the copy tail of an unfinished cycle move to the front
    // so the reader can drain them.
    const std::size_t tb = static_cast<std::size_t>(plan_.token_bytes);
    const std::int64_t window = static_cast<std::int64_t>(plan_.rate) * plan_.factor;
    for (std::int64_t p = published_; plan_.needs_wrap_copy && p < written_; ++p) {
      const int from = slot_of(p);
      if (from >= window)
        std::memcpy(buffer_.data() + static_cast<std::size_t>(p % window) * tb,
                    buffer_.data() + static_cast<std::size_t>(from) * tb, tb);
    }
    published_ = written_;
  }
  can_read_.notify_all();
}

void Channel::poison() {
  {
    std::lock_guard lock(mu_);
    poisoned_ = true;
  }
  can_read_.notify_all();
  can_write_.notify_all();
}

int Channel::occupancy() const {
  std::lock_guard lock(mu_);
  return static_cast<int>(written_ - claimed_);
}

int Channel::max_occupancy() const {
  std::lock_guard lock(mu_);
  return max_occupancy_;
}

std::int64_t Channel::tokens_written() const {
  std::lock_guard lock(mu_);
  return written_ - plan_.delay;
}

std::int64_t Channel::tokens_read() const {
  std::lock_guard lock(mu_);
  return claimed_;
}

bool Channel::closed() const {
  std::lock_guard lock(mu_);
  return eos_;
}

std::vector<Channel::TraceEvent> Channel::trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

}  // namespace prune

#pragma once

#include <string>

#include "prune/graph.hpp"

namespace prune::corpus::detail {

inline PortDesc in(std::string id, PortKind kind = PortKind::Srp, int atr = 1) {
  return {std::move(id), Direction::In, kind, atr, 0};
}

inline PortDesc out(std::string id, PortKind kind = PortKind::Srp, int atr = 1) {
  return {std::move(id), Direction::Out, kind, atr, 0};
}

inline PortDesc control_out(std::string id, int len) { return {std::move(id), Direction::Out, PortKind::ControlOut, 1, len}; }

inline FifoDesc fifo(std::string id, std::string src, std::string dst, int rate, int token_bytes, int delay = 0) {
  FifoDesc f;
  f.id = std::move(id);
  f.src = std::move(src);
  f.dst = std::move(dst);
  f.rate = rate;
  f.token_bytes = token_bytes;
  f.delay = delay;
  return f;
}

}  // namespace prune::corpus::detail

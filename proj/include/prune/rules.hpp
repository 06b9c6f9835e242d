#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "prune/graph.hpp"

namespace prune {

/// A connecting subchain (a_1, ..., a_N) between two linked DRPs. Empty when
/// both DRPs sit on the same FIFO.
using Subchain = std::vector<ActorId>;

/// Linked DRPs {px, py}: px is an output DRP of x, py an input DRP of y.
struct LinkedDrpPair {
  PortId px;
  PortId py;
  bool direct = false;             // fifo(px) = fifo(py)
  std::vector<Subchain> subchains; // sorted

  friend bool operator==(const LinkedDrpPair&, const LinkedDrpPair&) = default;
};

struct Violation {
  int rule = 0;  // 1..5
  std::vector<std::string> subjects;
  std::string message;
};

std::string_view rule_name(int rule);

/// Every linked DRP pair with all of its connecting subchains, sorted by
/// (px, py). Subchains follow FIFO direction from x towards y and never pass
/// through a dynamic actor.
std::vector<LinkedDrpPair> find_linked_drps(const Graph& graph);

std::vector<Violation> check_rule1_linked_port_control(const Graph& graph, const std::vector<LinkedDrpPair>& pairs);
std::vector<Violation> check_rule2_balanced_delay(const Graph& graph);
std::vector<Violation> check_rule3_connecting_subchain(const Graph& graph, const std::vector<LinkedDrpPair>& pairs);
std::vector<Violation> check_rule4_single_sided(const Graph& graph);
std::vector<Violation> check_rule5_encapsulation(const Graph& graph, const std::vector<LinkedDrpPair>& pairs);

/// All five rules, ordered by rule number then subject.
std::vector<Violation> check_all(const Graph& graph);

/// True when some simple chain between x and y has `b` as an interior actor.
bool on_simple_chain(const Graph& graph, const Adjacency& adj, ActorId x, ActorId y, ActorId b);

}  // namespace prune

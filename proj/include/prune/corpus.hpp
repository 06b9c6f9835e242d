#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "prune/behavior.hpp"
#include "prune/graph.hpp"

namespace prune::corpus {

struct CorpusApp {
  std::string name;
  GraphDescription graph;
  std::uint64_t source_firings = 0;
  int expected_dpgs = 0;
  int expected_m = 0;  // of the first DPG, 0 when there is none
};

/// Built-ins plus every corpus behavior.
BehaviorRegistry registry();
void register_behaviors(BehaviorRegistry& r);

// Motion detection: source -> gauss -> thres (cur, prev with one zero frame
// of delay) -> med -> sink. One token is one w*h grayscale frame.
// pattern: "random", "zero" or "shift" (frame k is frame 0 moved 2k px right).
CorpusApp motion_detection(int w = 64, int h = 64, int frames = 16, const std::string& pattern = "random");
std::vector<std::uint8_t> motion_input_frame(int w, int h, std::uint64_t k, std::uint64_t seed,
                                             const std::string& pattern);
inline constexpr int kMotionThreshold = 16;

// Dynamic predistortion: q picks the active branches per block, splitter x
// feeds the active FIR branches, adder y sums them.
// policy: "random" (seeded subset of at least two branches), "all", or a
// fixed mask such as "0100". input: "random" or "impulse" (sample 0 of every
// block is 1+0i, the rest zero).
CorpusApp dynamic_predistortion(int branches = 4, int taps = 10, int block = 256, int blocks = 32,
                                const std::string& policy = "random", const std::string& input = "random");
using cfloat = std::complex<float>;
std::vector<cfloat> dpd_input_block(int block, std::uint64_t k, std::uint64_t seed, const std::string& input);
std::vector<cfloat> dpd_taps(int branch, int taps, std::uint64_t seed);
std::vector<bool> dpd_control(int branches, std::uint64_t k, std::uint64_t seed, const std::string& policy);

// Adaptive bypass: selectpad x either sends the frame through two integer
// matrix stages l1, l2 or straight to y over the bypass FIFO, which then
// emits the marker. policy: "alternate" (even frames processed), "process"
// or "bypass".
CorpusApp adaptive_bypass(int frames = 16, const std::string& policy = "alternate");
inline constexpr int kBypassDim = 8;
inline constexpr std::int32_t kBypassMarker = -1;
std::vector<std::int32_t> bypass_input(std::uint64_t k, std::uint64_t seed);
/// Row-major weights of stage 1 or 2.
std::vector<std::int32_t> bypass_weights(int layer, std::uint64_t seed);
bool bypass_processes(std::uint64_t k, const std::string& policy);

std::vector<CorpusApp> all_apps();

/// splitmix64 step used by every generator.
std::uint64_t mix(std::uint64_t x);

}  // namespace prune::corpus

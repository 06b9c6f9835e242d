#include "prune/corpus.hpp"

namespace prune::corpus {

void register_motion(BehaviorRegistry& r);
void register_dpd(BehaviorRegistry& r);
void register_bypass(BehaviorRegistry& r);

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void register_behaviors(BehaviorRegistry& r) {
  register_motion(r);
  register_dpd(r);
  register_bypass(r);
}

BehaviorRegistry registry() {
  BehaviorRegistry r = BehaviorRegistry::with_builtins();
  register_behaviors(r);
  return r;
}

std::vector<CorpusApp> all_apps() {
  return {motion_detection(), dynamic_predistortion(), adaptive_bypass()};
}

}  // namespace prune::corpus

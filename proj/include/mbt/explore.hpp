#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mbt/symbolic.hpp"
#include "mbt/testspec.hpp"

namespace mbt::gen {

struct GenerationConfig {
  int len_min = 8;
  int len_max = 25;
  UniverseConfig universe;
  int seed_count = 15;
  int per_seed_pick = 2;
  long long fuel = 100000;
  size_t tuple_cap = 20000;
  size_t max_nodes = 100000;   // deterministic search budget per explore run
  size_t max_traces = 512;     // candidate pool cap per explore run
  double max_wall_seconds = 60.0;  // safety net; determinism holds unless hit
  bool use_store = true;
};

// One emitted step of a symbolic trace (the branch data explore committed).
struct SymTraceStep {
  std::map<std::string, SymVal> inputs;
  std::map<std::string, SymVal> outputs;
  std::vector<int> choices;
};
using SymTrace = std::vector<SymTraceStep>;

// Visited-set pruning with pointwise-inclusion subsumption. Entries remember
// how much exploration budget remained when stored: a stored cover only
// prunes revisits that have no more budget than it had, otherwise the search
// would lose states reachable only through longer suffixes.
class StateStore {
 public:
  // True: `st` is covered by a stored entry (prune). False: `st` was inserted
  // (evicting entries it covers at no greater budget).
  bool subsumed_or_insert(const SymState& st, int remaining);

  size_t size() const { return entries_; }

 private:
  struct Entry {
    std::vector<SymVal> data;  // locals of all instances, then buffers
    int remaining = 0;
  };
  std::map<std::vector<int>, std::vector<Entry>> by_control_;
  size_t entries_ = 0;
};

struct ExploreStats {
  size_t nodes = 0;
  size_t emitted = 0;
  size_t pruned = 0;
  bool node_budget_hit = false;
  bool timed_out = false;
  std::set<std::vector<int>> controls_seen;  // control vectors of visited states
};

// Randomized bounded DFS through the symbolic state graph. Emits every
// candidate trace whose length lies in [len_min, len_max] and whose monitor
// is definitely satisfied (or possibly satisfied at len_max); stops when the
// sink returns false, the node/trace budgets run out, or the space is
// exhausted. `spec` may be null (trivially satisfied).
ExploreStats explore(const SymEngine& se, const TestSpec* spec, const GenerationConfig& cfg,
                     uint64_t seed, const std::function<bool(const SymTrace&)>& sink);

// Convenience: collect up to cfg.max_traces candidates.
std::vector<SymTrace> explore_collect(const SymEngine& se, const TestSpec* spec,
                                      const GenerationConfig& cfg, uint64_t seed,
                                      ExploreStats* stats = nullptr);

}  // namespace mbt::gen

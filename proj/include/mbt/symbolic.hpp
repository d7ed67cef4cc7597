#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbt/engine.hpp"
#include "mbt/universe.hpp"

namespace mbt::gen {

// Finite, sorted, duplicate-free set of concrete values (possibly Absent for
// channel positions). The set-based symbolic domain.
struct SymVal {
  std::vector<Value> vals;

  static SymVal single(Value v);
  static SymVal from(std::vector<Value> vs);  // sorts, dedupes
  bool empty() const { return vals.empty(); }
  size_t size() const { return vals.size(); }
  bool contains(const Value& v) const;
  void insert(const Value& v);  // keeps order
  bool subset_of(const SymVal& other) const;
  friend bool operator==(const SymVal& a, const SymVal& b) { return a.vals == b.vals; }
};

// Set-valued analogue of SystemState: concrete control states, set-valued
// locals and delayed-wire buffers.
struct SymState {
  struct CompSym {
    int control = 0;
    std::vector<SymVal> locals;
  };
  std::vector<CompSym> comps;
  std::vector<SymVal> buffers;

  friend bool operator==(const SymState& a, const SymState& b);
};

// One successor branch of a symbolic tick: the per-instance choice vector
// (transition index, or -1 for stutter), the post-state, and the set of
// external input/output values compatible with the choices.
struct SymSucc {
  std::vector<int> choices;
  SymState state;
  std::map<std::string, SymVal> ext_inputs;   // every open input channel
  std::map<std::string, SymVal> ext_outputs;  // every open output channel
};

// Set-based symbolic executor. Per instance and tick it enumerates all
// combinations of in-port and local values, classifies each through the
// concrete transition-enabling semantics, and projects survivors back to
// sets. Correlations between distinct instances (or distinct ports) are not
// tracked: the domain is a cartesian abstraction, exact per variable.
class SymEngine {
 public:
  SymEngine(const Model& m, const Validated& v, const UniverseTable& universes,
            long long fuel = 100000, size_t tuple_cap = 20000);

  SymState initial() const;

  // All successor branches of one tick, deterministically ordered (instances
  // in topological order; per instance: transitions in declaration order,
  // stutter last). Branches with an empty compatible input set are dropped.
  std::vector<SymSucc> successors(const SymState& st) const;

  const Net& net() const { return *net_; }
  const UniverseTable& universes() const { return universes_; }

 private:
  const Model& model_;
  const Validated& v_;
  const UniverseTable& universes_;
  const Net* net_;
  long long fuel_;
  size_t tuple_cap_;
};

// Free-function form of one symbolic tick from an explicit input assignment:
// each open input channel ranges over `input_universe` entries (callers pass
// the full channel universe or a restriction). Helper for tests.
std::vector<SymSucc> sym_step(const SymEngine& se, const SymState& st);

}  // namespace mbt::gen

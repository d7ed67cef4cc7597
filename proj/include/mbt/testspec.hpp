#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mbt/engine.hpp"
#include "mbt/validate.hpp"

namespace mbt::gen {

// Three-valued logic for symbolic monitoring: over a set-valued trace a
// property may hold in every concretization (Yes), none (No), or some (Maybe).
enum class Tri { No, Maybe, Yes };

Tri tri_not(Tri t);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);

// A trace event: channel carries a value matching the pattern (the absent
// pattern observes silence). Patterns may not bind variables.
struct EventPat {
  std::string channel;
  Pattern pattern;
};

// Constraint tree over traces. Leaves:
//   Occurs(e, min, max)   — e happens between min and max times in the trace
//   NotOccurs(e)          — e never happens (== Occurs(e, 0, 0))
//   Precedes(a, b)        — any occurrence of b has an occurrence of a on a
//                           strictly earlier tick; vacuous without b
//   WithinSteps(e, lo, hi)— e happens at least once on a tick in [lo, hi]
// Node: And(children). An empty And is trivially satisfied.
struct Constraint {
  enum class Kind { Occurs, NotOccurs, Precedes, WithinSteps, And };
  Kind kind = Kind::And;
  EventPat event;        // Occurs / NotOccurs / WithinSteps; Precedes: first
  EventPat event2;       // Precedes: then
  long long min = 0, max = 0;  // Occurs counts or WithinSteps window [lo, hi]
  std::vector<Constraint> children;  // And

  static Constraint occurs(EventPat e, long long mn, long long mx);
  static Constraint not_occurs(EventPat e);
  static Constraint precedes(EventPat first, EventPat then);
  static Constraint within_steps(EventPat e, long long lo, long long hi);
  static Constraint all(std::vector<Constraint> children);
};

struct TestSpec {
  std::string id;
  Constraint root;
};

// Trivial specification: satisfied by every trace.
TestSpec trivial_spec();

// Checks structural invariants and that every referenced channel is an
// external channel of the elaborated network; throws MbtError on violations.
// `inputs_only` additionally requires events to mention input channels only.
void check_spec(const TestSpec& spec, const Net& net, bool inputs_only = false);

// Set of values a channel may carry on one tick (symbolic step view).
using SymValuation = std::map<std::string, std::vector<Value>>;

// Incremental three-valued evaluation of one constraint tree over a trace fed
// tick by tick. Copyable: exploration snapshots it per branch.
class Monitor {
 public:
  Monitor(const TestSpec& spec, int max_len);

  // Feed one tick. Concrete traces use singleton (or empty=Absent) sets.
  void step(const SymValuation& channels);
  void step_concrete(const Valuation& inputs, const Valuation& outputs);

  // Status if the trace ended now.
  Tri status() const;
  // True when no extension within the length budget can reach Yes or Maybe.
  bool dead() const;

  int ticks() const { return tick_; }

 private:
  struct LeafState {
    long long definite = 0;  // Occurs: count lower bound
    long long possible = 0;  // Occurs: count upper bound
    Tri seen_first = Tri::No;   // Precedes: A occurred on an earlier tick
    Tri violated = Tri::No;     // Precedes
    Tri occurred = Tri::No;     // WithinSteps
  };

  const Constraint* spec_root_;  // owned by the TestSpec (outlives monitor)
  std::shared_ptr<const TestSpec> owned_;  // keeps spec alive across copies
  int max_len_ = 0;
  int tick_ = 0;
  std::vector<LeafState> leaves_;  // pre-order over constraint leaves

  void step_node(const Constraint& c, size_t& leaf, const SymValuation& channels);
  Tri status_node(const Constraint& c, size_t& leaf) const;
  bool dead_node(const Constraint& c, size_t& leaf) const;
};

}  // namespace mbt::gen

namespace mbt::dsl {

// Spec files are JSON: {id, constraint}; constraint nodes are
// {kind: "occurs"|"notOccurs"|"precedes"|"withinSteps"|"and", ...} with
// events {channel, pattern} (pattern in trigger syntax, epsilon = silence).
gen::TestSpec parse_spec(const std::string& text);
std::string print_spec(const gen::TestSpec& s);

// A spec file may also hold an array of spec documents — a family refined
// into concrete specifications. Ids must be unique within the file.
std::vector<gen::TestSpec> parse_specs(const std::string& text);

}  // namespace mbt::dsl

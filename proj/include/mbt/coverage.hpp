#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbt/eval.hpp"
#include "mbt/model.hpp"

namespace mbt::cov {

// One coverable item: a decision (a transition guard, an if-condition, or a
// Bool-typed function body) or an atomic condition (a maximal Bool
// subexpression of a decision containing no boolean operator). Ids are
// derived from syntax alone, so they are stable across print/parse.
struct Item {
  enum class Kind { Decision, Atom };
  Kind kind = Kind::Decision;
  std::string id;
  uint32_t uid = 0;          // expression node this item observes
  bool concrete_owner = false;  // owned by a `concrete`-tagged component
};

struct Universe {
  std::vector<Item> items;  // deterministic enumeration order
  std::map<uint32_t, std::vector<size_t>> by_uid;
  uint64_t hash = 0;
  size_t decisions = 0;
  size_t atoms = 0;

  // 100% coverage needs every item seen both true and false.
  size_t target() const { return 2 * items.size(); }
  int find(const std::string& id) const;
};

// Enumerates decisions and atoms of a validated model (uids assigned).
// Pattern-match dispatch is deliberately not a decision, and local-variable
// initializers are excluded (they run once at elaboration, not during tests).
Universe enumerate_universe(const Model& m);

struct Map {
  uint64_t universe_hash = 0;
  std::vector<bool> saw_true;   // parallel to Universe::items
  std::vector<bool> saw_false;

  size_t flags_set() const;
};

Map make_map(const Universe& u);

// Flips one flag; unknown ids are an error (the observer path below filters
// silently instead, since evaluation reports every Bool node it computes).
void record(Map& m, const Universe& u, const std::string& id, bool outcome);

// Adapter from the evaluator's Bool observer to a coverage map.
class Recorder {
 public:
  Recorder(const Universe& u, Map& m);
  const BoolObserver& observer() const { return observer_; }

 private:
  BoolObserver observer_;
};

struct Ratio {
  size_t covered = 0;
  size_t target = 0;
  double value() const { return target == 0 ? 0.0 : static_cast<double>(covered) / target; }
};

Ratio cd_ratio(const Map& m, const Universe& u);

// Same universe only; pointwise OR.
Map merge(const Map& a, const Map& b);

std::string to_json(const Map& m, const Universe& u);
Map from_json(const std::string& text, const Universe& u);
std::string to_csv(const Map& m, const Universe& u);

}  // namespace mbt::cov

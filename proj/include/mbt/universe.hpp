#pragma once

#include <map>
#include <vector>

#include "mbt/model.hpp"

namespace mbt::gen {

struct UniverseExhausted : MbtError {
  explicit UniverseExhausted(const std::string& what) : MbtError(what) {}
};

struct UniverseConfig {
  int depth = 3;        // max constructor nesting
  long long int_lo = -3;  // Int is not depth-bounded; explicit range instead
  long long int_hi = 3;
  size_t max_size = 4096;  // per-type cap; blowing it is a config error
};

// Precomputed finite value universes per type: every value of the type whose
// tree depth is at most `depth` (Int clipped to [int_lo, int_hi]). Sorted,
// duplicate-free, hence deterministic. Throws UniverseExhausted for types
// with no inhabitants at this depth.
class UniverseTable {
 public:
  UniverseTable(const Signature& sig, const UniverseConfig& cfg);

  const std::vector<Value>& of(const TypeRef& t) const;

  // of(t) plus Absent in front: the per-tick choice set of a channel.
  const std::vector<Value>& channel(const TypeRef& t) const;

  const UniverseConfig& config() const { return cfg_; }

 private:
  UniverseConfig cfg_;
  std::map<std::string, std::vector<Value>> by_type_;
  std::map<std::string, std::vector<Value>> by_channel_;
};

}  // namespace mbt::gen

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mbt/engine.hpp"

namespace mbt::sut {

enum class MutOp { GuardNegate, ConstantReplace, TransitionRetarget, OutputSwap, AssignmentDrop };

const char* mut_op_name(MutOp op);
MutOp mut_op_parse(const std::string& name);  // throws MbtError on unknown names

struct OperatorInapplicable : MbtError {
  OperatorInapplicable(const std::string& op, const std::string& why)
      : MbtError("mutation operator " + op + " is not applicable: " + why) {}
};

// A seeded single-edit syntactic fault. The mutated model is reprinted and
// reparsed, so it owns its tree and round-trips by construction.
struct Mutant {
  MutOp op = MutOp::GuardNegate;
  uint64_t seed = 0;
  std::string location;  // human-readable edit site
  bool equivalent = false;  // flagged by the probe; suggestive, not proven
  Model model;
};

// Picks an edit site uniformly by seed among the operator's candidates,
// applies it, and revalidates. Sites whose edit does not change the printed
// model or does not validate are skipped deterministically. When a probe is
// given, mutants behaviorally equal to the base on it are flagged.
Mutant mutate(const Model& base, MutOp op, uint64_t seed,
              const std::vector<std::vector<Valuation>>* probe = nullptr);

// Strict-mode replay comparison: true when both models produce identical
// external outputs on every probe sequence, treating an engine error as an
// observable outcome of its tick.
bool behaviorally_equal(const Model& a, const Model& b,
                        const std::vector<std::vector<Valuation>>& probe_inputs,
                        long long fuel = 100000);

// Manifest row for a seeded mutant; `severity` is free-form and unjudged.
struct MutantRecord {
  std::string id;
  std::string op;
  uint64_t seed = 0;
  std::string location;
  bool equivalent = false;
  std::string severity;
};

}  // namespace mbt::sut

namespace mbt::dsl {

// Mutant manifests are JSON: { base_hash, mutants: [ {id, op, seed,
// location, equivalent, severity?} ] }.
std::string print_mutants(uint64_t base_hash, const std::vector<sut::MutantRecord>& ms);
std::pair<uint64_t, std::vector<sut::MutantRecord>> parse_mutants(const std::string& text);

}  // namespace mbt::dsl

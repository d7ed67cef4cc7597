#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbt/engine.hpp"

namespace mbt::gen {

// One clock tick of a test case: inputs to feed and outputs the model
// predicts. Channels absent from a map carry Absent.
struct Step {
  Valuation inputs;
  Valuation expected;
};

struct TestCase {
  std::string id;           // carries provenance, e.g. "B:ts3:s7:1"
  int length = 0;           // body ticks (before the postamble)
  int postamble_length = 0;
  std::vector<Step> steps;  // size == length + postamble_length
};

struct Generator {
  std::string kind;  // "A".."G"
  uint64_t seed = 0;
  std::optional<std::string> spec_id;
  uint64_t duplicates_dropped = 0;  // serialized only when nonzero
  bool timed_out = false;           // serialized only when true
};

struct Suite {
  uint64_t model_hash = 0;
  Generator generator;
  std::vector<TestCase> cases;
};

// Structural hash of a case's input sequence; the dedupe key for pooling.
uint64_t input_hash(const TestCase& tc);

}  // namespace mbt::gen

namespace mbt::dsl {

// Suite files are JSON: { model_hash, generator: {kind, seed, spec_id?},
// cases: [ {id, length, postamble_length, steps: [{inputs, expected}]} ] }.
// Channel values are constructor-syntax terms; the epsilon sign is Absent.
// Throws SchemaError with a JSON-pointer path on malformed documents.
gen::Suite parse_suite(const std::string& text);
std::string print_suite(const gen::Suite& s);

}  // namespace mbt::dsl

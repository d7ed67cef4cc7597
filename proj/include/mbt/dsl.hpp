#pragma once

#include <string>

#include "mbt/model.hpp"

namespace mbt::dsl {

// Parses the textual model format. Top-level blocks: `model`, `type`, `fun`,
// `component`, `root`; comments run from `--` to end of line. Throws
// ParseError at the first syntax error; name/type problems are left to
// validate(). Consumes the entire input.
Model parse_model(const std::string& text, const std::string& filename = "<input>");

// Canonical, order-preserving rendering. parse(print(m)) is structurally
// equal to m, and print(parse(print(m))) equals print(m) byte for byte.
std::string print_model(const Model& m);

// Value terms in constructor syntax ("RCons(E(FAudio, 1), RNil)", "42",
// "true"); the epsilon sign encodes Absent. Used by suite/spec JSON payloads.
Value parse_term(const std::string& text);
std::string print_term(const Value& v);

// Patterns in trigger syntax ("Get(_)", "Cons(h, t)", the epsilon sign),
// used by test-spec event descriptions.
Pattern parse_pattern(const std::string& text);
std::string print_pattern(const Pattern& p);

}  // namespace mbt::dsl

namespace mbt {

// Structural equality ignoring source locations and uids; the round-trip
// contract for parse_model/print_model.
bool model_equal(const Model& a, const Model& b);

// Stable content hash of a model (over its canonical rendering); recorded in
// suite files so stale suites are detected.
uint64_t model_hash(const Model& m);

}  // namespace mbt

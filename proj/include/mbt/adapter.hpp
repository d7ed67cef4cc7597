#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbt/engine.hpp"

namespace mbt::sut {

// Raised when an adapter rule marked strict meets a value outside its map.
struct UncoveredValue : MbtError {
  std::string channel;
  Value value;
  UncoveredValue(std::string ch, Value v)
      : MbtError("adapter rule for channel '" + ch + "' does not cover " + v.term()),
        channel(std::move(ch)),
        value(std::move(v)) {}
};

struct AdapterError : MbtError {
  using MbtError::MbtError;
};

// A step window held more than one signal on a channel with no merge
// function. run_test treats this as a behavioral mismatch, not a crash.
struct MergeOverflow : AdapterError {
  std::string channel;
  size_t count = 0;
  MergeOverflow(std::string ch, size_t n)
      : AdapterError("channel '" + ch + "' carried " + std::to_string(n) +
                     " signals in one step window and has no merge function"),
        channel(std::move(ch)),
        count(n) {}
};

enum class ComparePolicy { Exact, ListAsMultiset, ExceptionOnly };

// How one abstract input channel turns into concrete stimulus. Substitution
// picks a fixed representative (one tick); expansion plays a whole tick
// sequence, e.g. a timer-expire event becoming idle ticks plus an expiry.
struct InputRule {
  enum class Kind { Identity, Substitute, Expand };
  Kind kind = Kind::Identity;
  std::string to;                              // concrete channel; empty = same name
  std::map<Value, Value> subst;                // Substitute
  std::map<Value, std::vector<Value>> expand;  // Expand; sequences non-empty
  bool pass_unmapped = false;                  // unmapped present values pass through
};

// How one abstract output channel is recovered from concrete responses:
// class-collapse each signal, then fold multi-signal windows with a binary
// model function. Collapsing to the epsilon value drops a signal.
struct OutputRule {
  std::string from;                // concrete channel; empty = same name
  std::map<Value, Value> classes;  // class-collapse map
  bool pass_unmapped = true;       // values outside `classes` pass through
  std::string merge;               // model function folding a window; empty = none
  ComparePolicy compare = ComparePolicy::Exact;
  std::vector<std::string> error_heads;  // constructor heads that count as errors
};

struct AdapterSpec {
  std::map<std::string, InputRule> inputs;    // abstract input channel -> rule
  std::map<std::string, OutputRule> outputs;  // abstract output channel -> rule

  const InputRule* input_rule(const std::string& ch) const;
  const OutputRule* output_rule(const std::string& ch) const;
};

// One abstract input step becomes >= 1 aligned concrete ticks. Expansion
// sequences start at the window's first tick; every other channel fires on
// the first tick and stays silent for the rest.
std::vector<Valuation> concretize_step(const AdapterSpec& a, const Valuation& abstract_inputs);

// Collapses one step window of concrete outputs back into a single abstract
// step over `abstract_channels`. No signal on a channel reads as Absent; one
// passes through; several fold left with the rule's merge function.
Valuation abstract_window(const AdapterSpec& a, const std::vector<Valuation>& window,
                          const std::vector<std::string>& abstract_channels,
                          const Signature& sig, long long fuel = 100000);

// exact: structural equality. listAsMultiset: element multisets of list
// terms (non-lists count as singletons, Absent as empty). exceptionOnly:
// both are errors or neither is, judged by the rule's error heads.
bool compare_values(const OutputRule& rule, const Value& expected, const Value& actual);

}  // namespace mbt::sut

namespace mbt::dsl {

// Adapter files are JSON:
//   { "inputs":  { ch: {rule, to?, map?, unmapped?} },
//     "outputs": { ch: {from?, classes?, unmapped?, merge?, compare?, errorHeads?} } }
// Map keys and values are value terms. Throws SchemaError with a JSON
// pointer on malformed documents.
sut::AdapterSpec parse_adapter(const std::string& text);
std::string print_adapter(const sut::AdapterSpec& a);

}  // namespace mbt::dsl

#pragma once

#include <optional>

#include "mbt/explore.hpp"
#include "mbt/suite.hpp"

namespace mbt::gen {

struct SpecUnsatisfiedWithinBound : MbtError {
  std::string spec_id;
  explicit SpecUnsatisfiedWithinBound(const std::string& id)
      : MbtError("spec '" + id + "' yielded no test case within the exploration bound"),
        spec_id(id) {}
};

struct ObservationChannelMissing : MbtError {
  explicit ObservationChannelMissing(const std::string& what) : MbtError(what) {}
};

// The scripted state-observation dialogue appended to generated cases: send
// `query` on `query_channel`, then silence, until `end_pattern` shows up on
// `response_channel`; one settle tick follows. Length is clamped to
// [min_len, max_len].
struct ObservationProtocol {
  std::string query_channel;
  Value query;
  std::string response_channel;
  Pattern end_pattern;
  int min_len = 3;
  int max_len = 12;
};

// Picks one concrete value per input set (seeded, uniform) and recomputes the
// expected outputs by a strict-mode run — the model is the oracle, so the
// result replays green by construction.
TestCase concretize_trace(const Engine& eng, const SymTrace& trace, uint64_t seed,
                          long long fuel = 100000);

// Appends the observation dialogue to a case (expected outputs from the
// model). Throws ObservationChannelMissing when the protocol channels are not
// part of the model's open interface.
TestCase add_postamble(const Engine& eng, const TestCase& tc, const ObservationProtocol& proto,
                       long long fuel = 100000);

struct GenerateOptions {
  GenerationConfig config;
  std::optional<ObservationProtocol> postamble;
  bool keep_going = false;  // suite B: collect per-spec failures instead of throwing
};

struct GenerateOutcome {
  Suite suite;
  std::vector<std::string> unsatisfied_specs;  // nonempty only with keep_going
  bool timed_out = false;
};

// Suite B: per spec, explore with seed_count derived seeds and pick
// per_seed_pick concrete cases per seed whose replay satisfies the spec;
// pooled and deduped by input sequence.
GenerateOutcome generate_B(const Engine& eng, const std::vector<TestSpec>& specs,
                           const GenerateOptions& opt, uint64_t master_seed);

// Suite C: same machinery under the trivial spec; n cases.
GenerateOutcome generate_C(const Engine& eng, int n, const GenerateOptions& opt, uint64_t seed);

// Suite D: uniform random inputs (no model-state guidance) filtered by an
// input-only sanity spec; the strict-mode run supplies expected outputs.
GenerateOutcome generate_D(const Engine& eng, const TestSpec* sanity, int n,
                           const GenerateOptions& opt, uint64_t seed);

// Replays a test case against the model; true when every tick's external
// outputs equal the recorded expectations.
bool replays_green(const Engine& eng, const TestCase& tc, long long fuel = 100000);

}  // namespace mbt::gen

#pragma once

#include <cstdio>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbt/adapter.hpp"
#include "mbt/coverage.hpp"
#include "mbt/suite.hpp"

namespace mbt::sut {

// The SUT misbehaved as a process (engine error, protocol violation, died).
// run_test turns this into a failing verdict on the synthetic "exception"
// channel rather than propagating.
struct SutError : MbtError {
  using MbtError::MbtError;
};

// A system under test: concrete input ticks in, concrete output ticks out.
// One instance serves one test execution at a time; reset() starts the next.
class Sut {
 public:
  virtual ~Sut() = default;
  virtual void reset() = 0;
  virtual Valuation tick(const Valuation& inputs) = 0;
  // Structural coverage since the last reset, when the SUT can report it.
  virtual const cov::Universe* coverage_universe() const { return nullptr; }
  virtual cov::Map coverage() const { return {}; }
};

// A concrete-level model run by the synchronous engine in strict mode, with
// condition/decision coverage recorded. The model and validation result must
// outlive the instance.
class ModelSut : public Sut {
 public:
  ModelSut(const Model& m, const Validated& v, long long fuel = 100000);
  void reset() override;
  Valuation tick(const Valuation& inputs) override;
  const cov::Universe* coverage_universe() const override { return &universe_; }
  cov::Map coverage() const override { return map_; }

 private:
  Engine eng_;
  cov::Universe universe_;
  cov::Map map_;
  cov::Recorder recorder_;
  SystemState st_;
  long long fuel_;
};

// An external implementation spoken to over the line-delimited JSON tick
// protocol: one {"inputs": {channel: term}} object per line on its stdin,
// one {"outputs": {...}} or {"error": "..."} per line on its stdout. The
// process must exit when its stdin closes. reset() starts a fresh process.
class ExecSut : public Sut {
 public:
  explicit ExecSut(std::vector<std::string> argv);
  ~ExecSut() override;
  ExecSut(const ExecSut&) = delete;
  ExecSut& operator=(const ExecSut&) = delete;
  void reset() override;
  Valuation tick(const Valuation& inputs) override;

 private:
  void spawn();
  void stop();
  std::vector<std::string> argv_;
  int pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
};

// The serving side of the tick protocol (the `sut` CLI verb): reads input
// lines, steps the engine strictly, writes output lines. Returns on end of
// input; an engine error is reported on the last line and ends the run.
void serve_sut(const Engine& eng, std::istream& in, std::ostream& out, long long fuel = 100000);

struct Mismatch {
  int step = -1;  // 0-based index into the test case
  std::string channel;
  Value expected;
  Value actual;
};

struct Verdict {
  std::string case_id;
  bool pass = true;
  std::optional<Mismatch> mismatch;  // present exactly when !pass
};

struct RunResult {
  Verdict verdict;
  cov::Map sut_coverage;  // empty when the SUT reports none
};

// Plays one test case against the SUT through the adapter: inputs are
// concretized step by step, the SUT's window of concrete outputs is
// abstracted back, and every abstract output channel is compared under its
// policy. Execution stops at the first mismatch, so the coverage map spans
// only the executed prefix.
RunResult run_test(Sut& s, const AdapterSpec& adapter, const Engine& abstract_engine,
                   const gen::TestCase& tc, long long fuel = 100000);

// What failures are grouped by: where the run diverged and how. The phase is
// the abstract model's control-state label when the failing step began.
struct FailureSignature {
  std::string channel;
  std::string expected_head;
  std::string actual_head;
  std::string phase;

  std::string key() const;
};

FailureSignature failure_signature(const Engine& abstract_engine, const gen::TestCase& tc,
                                   const Mismatch& mm, long long fuel = 100000);

// Groups the failing verdicts of a suite by signature key. Classes and their
// members are sorted, so permuting the verdicts cannot change the result.
std::map<std::string, std::vector<std::string>> classify(const Engine& abstract_engine,
                                                         const gen::Suite& suite,
                                                         const std::vector<Verdict>& verdicts,
                                                         long long fuel = 100000);

}  // namespace mbt::sut

namespace mbt::dsl {

// Verdict logs are JSON: { cases: [ {case_id, pass, mismatch?} ] } where
// mismatch carries {step, channel, expected, actual} as value terms.
std::string print_verdicts(const std::vector<sut::Verdict>& vs);
std::vector<sut::Verdict> parse_verdicts(const std::string& text);

}  // namespace mbt::dsl

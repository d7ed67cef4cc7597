#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbt/eval.hpp"
#include "mbt/validate.hpp"

namespace mbt {

// Valuation over named channels/ports. Missing keys read as Absent.
using Valuation = std::map<std::string, Value>;

const Value& valuation_get(const Valuation& v, const std::string& name);

// Dynamic state of the whole network: per atomic instance a control state and
// local valuation, plus the pending value of every delayed wire (instantaneous
// wires carry values only within a tick).
struct SystemState {
  struct CompState {
    int control = 0;               // index into the EFSM's state list
    std::vector<Value> locals;     // parallel to the EFSM's local decls
  };
  std::vector<CompState> comps;    // parallel to Net::instances
  std::vector<Value> buffers;      // parallel to Net::wires; Absent unless delayed

  friend bool operator==(const SystemState& a, const SystemState& b);
};

enum class StepMode { Strict, Explore };

struct StepOptions {
  StepMode mode = StepMode::Strict;
  Rng* rng = nullptr;              // required in Explore mode
  long long fuel = 100000;
  int max_depth = 4000;
  const BoolObserver* observer = nullptr;
};

struct TraceStep {
  Valuation inputs;    // external inputs of the tick
  SystemState state;   // state after the tick
  Valuation outputs;   // external outputs of the tick
};
using Trace = std::vector<TraceStep>;

// Deterministic synchronous interpreter over an elaborated network. The model
// and validation result must outlive the engine.
class Engine {
 public:
  Engine(const Model& model, const Validated& v);

  const Net& net() const { return *net_; }
  const Model& model() const { return model_; }
  const Signature& sig() const { return v_.sig; }
  const Validated& validated() const { return v_; }

  SystemState initial_state() const;

  // One clock cycle: every instance reads its in-ports (in topological order
  // of instantaneous wires), fires at most one transition or stutters, and
  // outputs propagate. Returns the external outputs.
  Valuation step(SystemState& st, const Valuation& inputs, const StepOptions& opt) const;

  // Runs |inputs| ticks from the initial state. Errors are annotated with the
  // 1-based tick index.
  Trace run(const std::vector<Valuation>& inputs, const StepOptions& opt) const;

  // Human-readable control state of one instance (for verdicts/diagnostics).
  const std::string& control_name(const SystemState& st, int inst) const;
  int control_index(int inst, const std::string& name) const;

  // Tests may substitute a different (still valid) evaluation order.
  void set_order(std::vector<int> order) { order_ = std::move(order); }

 private:
  struct InPort {
    std::string name;
    int wire = -1;  // -1: dangling, reads Absent
  };
  struct OutPort {
    std::string name;
    std::vector<int> wires;  // fan-out
  };

  const Model& model_;
  const Validated& v_;
  const Net* net_;
  std::vector<int> order_;
  std::vector<std::vector<InPort>> in_ports_;    // per instance
  std::vector<std::vector<OutPort>> out_ports_;  // per instance
  std::vector<int> ext_out_wire_;                // per root out-port, -1 if undriven
};

}  // namespace mbt

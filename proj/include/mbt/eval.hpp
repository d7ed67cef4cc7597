#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbt/model.hpp"

namespace mbt {

// Small scoped environment. Bindings are pushed/popped in LIFO order; lookup
// walks back to front so inner binders shadow outer ones. Environments stay
// tiny (locals + pattern binders or function params), so linear scan wins.
class Env {
 public:
  void push(std::string name, Value v) { slots_.emplace_back(std::move(name), std::move(v)); }
  void pop(size_t n) { slots_.resize(slots_.size() - n); }
  size_t size() const { return slots_.size(); }
  const Value* find(const std::string& name) const {
    for (auto it = slots_.rbegin(); it != slots_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }
  const std::vector<std::pair<std::string, Value>>& slots() const { return slots_; }

 private:
  std::vector<std::pair<std::string, Value>> slots_;
};

// Observer for boolean evaluation outcomes, keyed by expression uid. Coverage
// instrumentation subscribes here; expressions short-circuited away are never
// reported because they are never evaluated.
using BoolObserver = std::function<void(uint32_t uid, bool outcome)>;

struct EvalContext {
  const Signature* sig = nullptr;
  long long fuel = 100000;   // one unit per function call and case dispatch
  int depth = 0;             // current call nesting
  int max_depth = 4000;      // C++ stack safety; exceeding raises FuelExhausted
  const BoolObserver* observer = nullptr;

  void spend() {
    if (--fuel < 0) throw FuelExhausted();
  }
};

// Call-by-value evaluation. Short-circuits && and ||; arbitrary-precision
// integers; structural equality; ordering on Int. Never yields Absent.
Value eval(const ExprPtr& e, Env& env, EvalContext& cx);

// Pattern match. On success appends binders to `env` and returns how many
// were pushed; caller pops. Wildcard matches any present value but not
// Absent; the explicit absent-pattern matches Absent only.
std::optional<size_t> match(const Pattern& p, const Value& v, Env& env);

// One enabled transition: its index in the EFSM plus the trigger binders.
struct Enabled {
  int index = 0;
  std::vector<std::pair<std::string, Value>> binders;
};

// All transitions out of `control` whose triggers match `inputs` and whose
// guard holds, in declaration order. `inputs` must assign a value (possibly
// Absent) to every in-port; ports omitted from a transition's triggers
// require Absent.
std::vector<Enabled> enabled(const Component& comp, const std::string& control,
                             Env& locals, const std::map<std::string, Value>& inputs,
                             EvalContext& cx);

}  // namespace mbt

#include "mbt/eval.hpp"

#include <cassert>

namespace mbt {

namespace {

struct DepthGuard {
  EvalContext& cx;
  explicit DepthGuard(EvalContext& c) : cx(c) {
    if (++cx.depth > cx.max_depth)
      throw FuelExhausted("recursion depth limit exceeded (" + std::to_string(cx.max_depth) + ")");
  }
  ~DepthGuard() { --cx.depth; }
};

Value observe(const ExprPtr& e, Value v, EvalContext& cx) {
  if (cx.observer && *cx.observer && v.kind() == Value::Kind::Bool)
    (*cx.observer)(e->uid, v.as_bool());
  return v;
}

}  // namespace

Value eval(const ExprPtr& e, Env& env, EvalContext& cx) {
  if (!e) throw EvalError("null expression");

  if (auto* v = e->as<Expr::Var>()) {
    const Value* bound = env.find(v->name);
    if (!bound) throw EvalError(e->loc.str() + ": unbound variable '" + v->name + "'");
    return observe(e, *bound, cx);
  }
  if (auto* l = e->as<Expr::Lit>()) {
    return observe(e, l->value, cx);
  }
  if (auto* c = e->as<Expr::Con>()) {
    std::vector<Value> args;
    args.reserve(c->args.size());
    for (const auto& a : c->args) args.push_back(eval(a, env, cx));
    return Value::con(c->name, std::move(args));
  }
  if (auto* c = e->as<Expr::Call>()) {
    auto it = cx.sig->functions.find(c->name);
    if (it == cx.sig->functions.end())
      throw EvalError(e->loc.str() + ": unknown function '" + c->name + "'");
    const FuncDef& f = *it->second;
    if (f.params.size() != c->args.size())
      throw EvalError(e->loc.str() + ": '" + c->name + "' expects " +
                      std::to_string(f.params.size()) + " arguments, got " +
                      std::to_string(c->args.size()));
    Env inner;
    for (size_t i = 0; i < c->args.size(); ++i)
      inner.push(f.params[i].first, eval(c->args[i], env, cx));
    cx.spend();
    DepthGuard guard(cx);
    return observe(e, eval(f.body, inner, cx), cx);
  }
  if (auto* i = e->as<Expr::If>()) {
    bool cond = eval(i->cond, env, cx).as_bool();
    return observe(e, eval(cond ? i->then_branch : i->else_branch, env, cx), cx);
  }
  if (auto* c = e->as<Expr::Case>()) {
    Value scrut = eval(c->scrutinee, env, cx);
    cx.spend();
    for (const auto& arm : c->arms) {
      if (auto pushed = match(arm.pattern, scrut, env)) {
        Value out = eval(arm.body, env, cx);
        env.pop(*pushed);
        return observe(e, std::move(out), cx);
      }
    }
    throw MatchFailure(e->loc.str() + ": scrutinee " + scrut.term());
  }
  if (auto* n = e->as<Expr::Not>()) {
    bool v = eval(n->operand, env, cx).as_bool();
    return observe(e, Value::boolean(!v), cx);
  }
  if (auto* n = e->as<Expr::Neg>()) {
    return Value::integer(-eval(n->operand, env, cx).as_int());
  }
  auto* b = e->as<Expr::Binary>();
  assert(b);
  switch (b->op) {
    case BinOp::And: {
      if (!eval(b->lhs, env, cx).as_bool()) return observe(e, Value::boolean(false), cx);
      return observe(e, Value::boolean(eval(b->rhs, env, cx).as_bool()), cx);
    }
    case BinOp::Or: {
      if (eval(b->lhs, env, cx).as_bool()) return observe(e, Value::boolean(true), cx);
      return observe(e, Value::boolean(eval(b->rhs, env, cx).as_bool()), cx);
    }
    default:
      break;
  }
  Value lhs = eval(b->lhs, env, cx);
  Value rhs = eval(b->rhs, env, cx);
  switch (b->op) {
    case BinOp::Eq:
      return observe(e, Value::boolean(lhs == rhs), cx);
    case BinOp::Ne:
      return observe(e, Value::boolean(lhs != rhs), cx);
    case BinOp::Lt:
      return observe(e, Value::boolean(lhs.as_int() < rhs.as_int()), cx);
    case BinOp::Le:
      return observe(e, Value::boolean(lhs.as_int() <= rhs.as_int()), cx);
    case BinOp::Gt:
      return observe(e, Value::boolean(lhs.as_int() > rhs.as_int()), cx);
    case BinOp::Ge:
      return observe(e, Value::boolean(lhs.as_int() >= rhs.as_int()), cx);
    case BinOp::Add:
      return Value::integer(lhs.as_int() + rhs.as_int());
    case BinOp::Sub:
      return Value::integer(lhs.as_int() - rhs.as_int());
    case BinOp::Mul:
      return Value::integer(lhs.as_int() * rhs.as_int());
    case BinOp::Div:
      if (rhs.as_int() == 0) throw EvalError(e->loc.str() + ": division by zero");
      return Value::integer(lhs.as_int() / rhs.as_int());
    case BinOp::Mod:
      if (rhs.as_int() == 0) throw EvalError(e->loc.str() + ": modulo by zero");
      return Value::integer(lhs.as_int() % rhs.as_int());
    default:
      throw EvalError("unhandled binary operator");
  }
}

namespace {

// Recursive matcher; pushes binders as it goes, returns false on mismatch
// (caller rolls the environment back to the recorded size).
bool match_into(const Pattern& p, const Value& v, Env& env) {
  switch (p.kind) {
    case Pattern::Kind::Wildcard:
      return !v.is_absent();
    case Pattern::Kind::AbsentPat:
      return v.is_absent();
    case Pattern::Kind::Var:
      if (v.is_absent()) return false;
      env.push(p.name, v);
      return true;
    case Pattern::Kind::Lit:
      return !v.is_absent() && v == p.literal;
    case Pattern::Kind::Con: {
      if (!v.is_con(p.name)) return false;
      const auto& args = v.con_args();
      if (args.size() != p.args.size()) return false;
      for (size_t i = 0; i < args.size(); ++i)
        if (!match_into(p.args[i], args[i], env)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<size_t> match(const Pattern& p, const Value& v, Env& env) {
  size_t before = env.size();
  if (match_into(p, v, env)) return env.size() - before;
  env.pop(env.size() - before);
  return std::nullopt;
}

std::vector<Enabled> enabled(const Component& comp, const std::string& control,
                             Env& locals, const std::map<std::string, Value>& inputs,
                             EvalContext& cx) {
  if (!comp.efsm) throw MbtError("enabled() on non-atomic component " + comp.name);
  static const Value kAbsent;

  std::vector<Enabled> out;
  const Efsm& efsm = *comp.efsm;
  for (size_t t = 0; t < efsm.transitions.size(); ++t) {
    const Transition& tr = efsm.transitions[t];
    if (tr.source != control) continue;

    size_t base = locals.size();
    bool matched = true;
    for (const auto& [port, pat] : tr.triggers) {
      auto it = inputs.find(port);
      const Value& v = it == inputs.end() ? kAbsent : it->second;
      if (!match(pat, v, locals)) {
        matched = false;
        break;
      }
    }
    if (matched) {
      // Ports not mentioned in the trigger list require silence this tick.
      for (const auto& port : comp.ports) {
        if (port.dir != PortDir::In) continue;
        bool mentioned = false;
        for (const auto& [tp, _] : tr.triggers)
          if (tp == port.name) { mentioned = true; break; }
        if (mentioned) continue;
        auto it = inputs.find(port.name);
        if (it != inputs.end() && !it->second.is_absent()) {
          matched = false;
          break;
        }
      }
    }
    if (matched) {
      EvalContext guard_cx = cx;
      bool fire = eval(tr.guard, locals, guard_cx).as_bool();
      if (fire) {
        Enabled en;
        en.index = static_cast<int>(t);
        for (size_t i = base; i < locals.size(); ++i)
          en.binders.push_back(locals.slots()[i]);
        out.push_back(std::move(en));
      }
    }
    locals.pop(locals.size() - base);
  }
  return out;
}

}  // namespace mbt

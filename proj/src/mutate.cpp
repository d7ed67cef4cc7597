#include "mbt/mutate.hpp"

#include <functional>
#include <optional>

#include <json.hpp>

#include "mbt/dsl.hpp"
#include "mbt/validate.hpp"

namespace mbt::sut {

const char* mut_op_name(MutOp op) {
  switch (op) {
    case MutOp::GuardNegate: return "GuardNegate";
    case MutOp::ConstantReplace: return "ConstantReplace";
    case MutOp::TransitionRetarget: return "TransitionRetarget";
    case MutOp::OutputSwap: return "OutputSwap";
    case MutOp::AssignmentDrop: return "AssignmentDrop";
  }
  return "?";
}

MutOp mut_op_parse(const std::string& name) {
  for (MutOp op : {MutOp::GuardNegate, MutOp::ConstantReplace, MutOp::TransitionRetarget,
                   MutOp::OutputSwap, MutOp::AssignmentDrop})
    if (name == mut_op_name(op)) return op;
  throw MbtError("unknown mutation operator: " + name);
}

namespace {

struct Site {
  std::string location;
  std::function<void(Model&)> apply;
};

std::string site_prefix(const Component& c, const Transition& t) {
  return c.name + ".t" + std::to_string(t.index);
}

// Every transition slot holding an expression, in canonical order.
template <typename Fn>
void each_expr_slot(const Model& m, Fn fn) {
  for (size_t ci = 0; ci < m.components.size(); ++ci) {
    const Component& c = m.components[ci];
    if (!c.efsm) continue;
    for (size_t ti = 0; ti < c.efsm->transitions.size(); ++ti) {
      const Transition& t = c.efsm->transitions[ti];
      fn(ci, ti, -1, t.guard);
      for (size_t j = 0; j < t.outputs.size(); ++j) fn(ci, ti, int(j), t.outputs[j].second);
      for (size_t j = 0; j < t.assignments.size(); ++j)
        fn(ci, ti, int(t.outputs.size() + j), t.assignments[j].second);
    }
  }
}

ExprPtr& slot_ref(Model& m, size_t ci, size_t ti, int slot) {
  Transition& t = m.components[ci].efsm->transitions[ti];
  if (slot < 0) return t.guard;
  if (slot < int(t.outputs.size())) return t.outputs[slot].second;
  return t.assignments[slot - t.outputs.size()].second;
}

// Replacement for one constant node: integers bump by one, booleans flip,
// nullary constructors rotate to the type's next nullary constructor.
std::optional<Expr::Node> const_replacement(const Expr& e, const Signature& sig) {
  if (const auto* l = e.as<Expr::Lit>()) {
    if (l->value.kind() == Value::Kind::Int)
      return Expr::Node{Expr::Lit{Value::integer(l->value.as_int() + 1)}};
    if (l->value.kind() == Value::Kind::Bool)
      return Expr::Node{Expr::Lit{Value::boolean(!l->value.as_bool())}};
    return std::nullopt;
  }
  if (const auto* c = e.as<Expr::Con>()) {
    if (!c->args.empty()) return std::nullopt;
    const CtorInfo* info = sig.find_ctor(c->name);
    if (!info) return std::nullopt;
    const auto& ctors = info->owner->ctors;
    for (size_t off = 1; off < ctors.size(); ++off) {
      const auto& cand = ctors[(size_t(info->tag) + off) % ctors.size()];
      if (cand.arg_types.empty()) return Expr::Node{Expr::Con{cand.name, {}}};
    }
    return std::nullopt;
  }
  return std::nullopt;
}

// Rebuilds the tree with the countdown-th replaceable constant swapped out;
// untouched subtrees are shared. countdown goes negative once spent.
ExprPtr replace_const(const ExprPtr& e, int& countdown, const Signature& sig) {
  if (!e || countdown < 0) return e;
  if (auto repl = const_replacement(*e, sig)) {
    if (countdown == 0) {
      countdown = -1;
      return make_expr(std::move(*repl), e->loc);
    }
    --countdown;
  }
  auto child = [&](const ExprPtr& c) { return replace_const(c, countdown, sig); };
  auto rebuilt = [&e](Expr::Node node) { return make_expr(std::move(node), e->loc); };
  if (const auto* n = e->as<Expr::Con>()) {
    std::vector<ExprPtr> args;
    bool changed = false;
    for (const auto& arg : n->args) {
      args.push_back(child(arg));
      changed |= args.back() != arg;
    }
    return changed ? rebuilt(Expr::Con{n->name, std::move(args)}) : e;
  }
  if (const auto* n = e->as<Expr::Call>()) {
    std::vector<ExprPtr> args;
    bool changed = false;
    for (const auto& arg : n->args) {
      args.push_back(child(arg));
      changed |= args.back() != arg;
    }
    return changed ? rebuilt(Expr::Call{n->name, std::move(args)}) : e;
  }
  if (const auto* n = e->as<Expr::If>()) {
    ExprPtr c = child(n->cond), t = child(n->then_branch), f = child(n->else_branch);
    if (c == n->cond && t == n->then_branch && f == n->else_branch) return e;
    return rebuilt(Expr::If{std::move(c), std::move(t), std::move(f)});
  }
  if (const auto* n = e->as<Expr::Case>()) {
    ExprPtr scrut = child(n->scrutinee);
    std::vector<CaseArm> arms;
    bool changed = scrut != n->scrutinee;
    for (const auto& arm : n->arms) {
      arms.push_back(CaseArm{arm.pattern, child(arm.body)});
      changed |= arms.back().body != arm.body;
    }
    return changed ? rebuilt(Expr::Case{std::move(scrut), std::move(arms)}) : e;
  }
  if (const auto* n = e->as<Expr::Not>()) {
    ExprPtr op = child(n->operand);
    return op == n->operand ? e : rebuilt(Expr::Not{std::move(op)});
  }
  if (const auto* n = e->as<Expr::Neg>()) {
    ExprPtr op = child(n->operand);
    return op == n->operand ? e : rebuilt(Expr::Neg{std::move(op)});
  }
  if (const auto* n = e->as<Expr::Binary>()) {
    ExprPtr l = child(n->lhs), r = child(n->rhs);
    if (l == n->lhs && r == n->rhs) return e;
    return rebuilt(Expr::Binary{n->op, std::move(l), std::move(r)});
  }
  return e;  // Var, Lit without replacement
}

std::vector<Site> collect_sites(const Model& m, MutOp op, const Signature& sig) {
  std::vector<Site> sites;
  switch (op) {
    case MutOp::GuardNegate:
      for (size_t ci = 0; ci < m.components.size(); ++ci) {
        const Component& c = m.components[ci];
        if (!c.efsm) continue;
        for (size_t ti = 0; ti < c.efsm->transitions.size(); ++ti)
          sites.push_back(Site{site_prefix(c, c.efsm->transitions[ti]) + ".guard",
                               [ci, ti](Model& mm) {
                                 ExprPtr& g = slot_ref(mm, ci, ti, -1);
                                 g = make_expr(Expr::Not{g}, g->loc);
                               }});
      }
      break;
    case MutOp::ConstantReplace:
      each_expr_slot(m, [&](size_t ci, size_t ti, int slot, const ExprPtr& e) {
        size_t count = 0;
        walk_expr(e, [&](const ExprPtr& node) {
          if (const_replacement(*node, sig)) ++count;
        });
        const Component& c = m.components[ci];
        for (size_t n = 0; n < count; ++n)
          sites.push_back(Site{site_prefix(c, c.efsm->transitions[ti]) + ".const" +
                                   std::to_string(slot < 0 ? 0 : slot + 1) + "." +
                                   std::to_string(n),
                               [ci, ti, slot, n, &sig](Model& mm) {
                                 ExprPtr& target = slot_ref(mm, ci, ti, slot);
                                 int countdown = int(n);
                                 target = replace_const(target, countdown, sig);
                               }});
      });
      break;
    case MutOp::TransitionRetarget:
      for (size_t ci = 0; ci < m.components.size(); ++ci) {
        const Component& c = m.components[ci];
        if (!c.efsm || c.efsm->states.size() < 2) continue;
        const auto& states = c.efsm->states;
        for (size_t ti = 0; ti < c.efsm->transitions.size(); ++ti) {
          const Transition& t = c.efsm->transitions[ti];
          size_t cur = 0;
          while (cur < states.size() && states[cur] != t.target) ++cur;
          if (cur >= states.size()) continue;
          const std::string& next = states[(cur + 1) % states.size()];
          sites.push_back(Site{site_prefix(c, t) + ".target->" + next,
                               [ci, ti, next](Model& mm) {
                                 mm.components[ci].efsm->transitions[ti].target = next;
                               }});
        }
      }
      break;
    case MutOp::OutputSwap:
      for (size_t ci = 0; ci < m.components.size(); ++ci) {
        const Component& c = m.components[ci];
        if (!c.efsm) continue;
        for (size_t ti = 0; ti < c.efsm->transitions.size(); ++ti) {
          const Transition& t = c.efsm->transitions[ti];
          for (size_t j = 0; j + 1 < t.outputs.size(); ++j)
            for (size_t k = j + 1; k < t.outputs.size(); ++k) {
              const PortDecl* pj = c.find_port(t.outputs[j].first);
              const PortDecl* pk = c.find_port(t.outputs[k].first);
              if (!pj || !pk || pj->type != pk->type) continue;
              sites.push_back(Site{site_prefix(c, t) + ".swap." + t.outputs[j].first + "/" +
                                       t.outputs[k].first,
                                   [ci, ti, j, k](Model& mm) {
                                     auto& outs =
                                         mm.components[ci].efsm->transitions[ti].outputs;
                                     std::swap(outs[j].second, outs[k].second);
                                   }});
            }
        }
      }
      break;
    case MutOp::AssignmentDrop:
      for (size_t ci = 0; ci < m.components.size(); ++ci) {
        const Component& c = m.components[ci];
        if (!c.efsm) continue;
        for (size_t ti = 0; ti < c.efsm->transitions.size(); ++ti) {
          const Transition& t = c.efsm->transitions[ti];
          for (size_t j = 0; j < t.assignments.size(); ++j)
            sites.push_back(Site{site_prefix(c, t) + ".set." + t.assignments[j].first,
                                 [ci, ti, j](Model& mm) {
                                   auto& as = mm.components[ci].efsm->transitions[ti].assignments;
                                   as.erase(as.begin() + long(j));
                                 }});
        }
      }
      break;
  }
  return sites;
}

}  // namespace

Mutant mutate(const Model& base, MutOp op, uint64_t seed,
              const std::vector<std::vector<Valuation>>* probe) {
  Signature sig = build_signature(base);
  std::vector<Site> sites = collect_sites(base, op, sig);
  if (sites.empty()) throw OperatorInapplicable(mut_op_name(op), "no candidate edit site");
  const std::string base_text = dsl::print_model(base);
  Rng rng(seed ^ 0x6d75746174656431ULL);
  size_t first = size_t(rng.below(sites.size()));
  for (size_t k = 0; k < sites.size(); ++k) {
    const Site& site = sites[(first + k) % sites.size()];
    Model copy = base;
    site.apply(copy);
    std::string text = dsl::print_model(copy);
    if (text == base_text) continue;  // no syntactic edit after all
    try {
      Model reparsed = dsl::parse_model(text, base.name + ".mutant");
      Validated v = validate(reparsed);
      if (!v.ok()) continue;
      Mutant out;
      out.op = op;
      out.seed = seed;
      out.location = site.location;
      out.model = std::move(reparsed);
      if (probe) out.equivalent = behaviorally_equal(base, out.model, *probe);
      return out;
    } catch (const MbtError&) {
      continue;
    }
  }
  throw OperatorInapplicable(mut_op_name(op), "every candidate edit fails validation");
}

bool behaviorally_equal(const Model& a0, const Model& b0,
                        const std::vector<std::vector<Valuation>>& probe_inputs,
                        long long fuel) {
  Model a = a0, b = b0;
  Validated va = validate(a), vb = validate(b);
  if (!va.ok() || !vb.ok()) throw MbtError("behaviorally_equal: model does not validate");
  Engine ea(a, va), eb(b, vb);
  for (const auto& seq : probe_inputs) {
    SystemState sa = ea.initial_state(), sb = eb.initial_state();
    for (const auto& inputs : seq) {
      StepOptions opt;
      opt.fuel = fuel;
      Valuation oa, ob;
      bool fa = false, fb = false;
      try {
        oa = ea.step(sa, inputs, opt);
      } catch (const MbtError&) {
        fa = true;
      }
      try {
        ob = eb.step(sb, inputs, opt);
      } catch (const MbtError&) {
        fb = true;
      }
      if (fa != fb) return false;
      if (fa) break;  // both refused this tick; indistinguishable from outside
      for (const auto& p : ea.net().outputs)
        if (valuation_get(oa, p.name) != valuation_get(ob, p.name)) return false;
    }
  }
  return true;
}

}  // namespace mbt::sut

namespace mbt::dsl {

namespace {
using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& pointer, const std::string& why) {
  throw SchemaError(pointer, why);
}

const Json& need(const Json& j, const char* key, const std::string& pointer) {
  if (!j.is_object() || !j.contains(key)) bad(pointer + "/" + key, "missing");
  return j.at(key);
}
}  // namespace

std::string print_mutants(uint64_t base_hash, const std::vector<sut::MutantRecord>& ms) {
  Json doc = Json::object();
  doc["base_hash"] = hex64(base_hash);
  Json arr = Json::array();
  for (const auto& m : ms) {
    Json j = Json::object();
    j["id"] = m.id;
    j["op"] = m.op;
    j["seed"] = m.seed;
    j["location"] = m.location;
    j["equivalent"] = m.equivalent;
    if (!m.severity.empty()) j["severity"] = m.severity;
    arr.push_back(std::move(j));
  }
  doc["mutants"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::pair<uint64_t, std::vector<sut::MutantRecord>> parse_mutants(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad("", std::string("not valid JSON: ") + e.what());
  }
  const Json& bh = need(doc, "base_hash", "");
  if (!bh.is_string()) bad("/base_hash", "expected a hex string");
  uint64_t base_hash = 0;
  try {
    base_hash = std::stoull(bh.get<std::string>(), nullptr, 16);
  } catch (const std::exception&) {
    bad("/base_hash", "expected a hex string");
  }
  const Json& arr = need(doc, "mutants", "");
  if (!arr.is_array()) bad("/mutants", "expected an array");
  std::vector<sut::MutantRecord> ms;
  for (size_t i = 0; i < arr.size(); ++i) {
    std::string mp = "/mutants/" + std::to_string(i);
    const Json& j = arr[i];
    sut::MutantRecord m;
    m.id = need(j, "id", mp).get<std::string>();
    m.op = need(j, "op", mp).get<std::string>();
    sut::mut_op_parse(m.op);  // reject unknown operators early
    m.seed = need(j, "seed", mp).get<uint64_t>();
    m.location = need(j, "location", mp).get<std::string>();
    m.equivalent = need(j, "equivalent", mp).get<bool>();
    if (j.contains("severity")) m.severity = j.at("severity").get<std::string>();
    ms.push_back(std::move(m));
  }
  return {base_hash, std::move(ms)};
}

}  // namespace mbt::dsl

#include "mbt/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "mbt/eval.hpp"

namespace mbt {

int Net::find_instance(const std::string& path) const {
  for (size_t i = 0; i < instances.size(); ++i)
    if (instances[i].path == path) return static_cast<int>(i);
  return -1;
}

int Net::find_input(const std::string& name) const {
  for (size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i].name == name) return static_cast<int>(i);
  return -1;
}

int Net::find_output(const std::string& name) const {
  for (size_t i = 0; i < outputs.size(); ++i)
    if (outputs[i].name == name) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// Canonical uid assignment

namespace {

void assign_uids_expr(const ExprPtr& e, uint32_t& next) {
  walk_expr(e, [&next](const ExprPtr& n) { n->uid = next++; });
}

}  // namespace

void assign_uids(Model& m) {
  uint32_t next = 1;
  for (auto& c : m.components) {
    if (!c.efsm) continue;
    for (auto& l : c.efsm->locals) assign_uids_expr(l.init, next);
    for (auto& t : c.efsm->transitions) {
      assign_uids_expr(t.guard, next);
      for (auto& [port, e] : t.outputs) assign_uids_expr(e, next);
      for (auto& [local, e] : t.assignments) assign_uids_expr(e, next);
    }
  }
  for (auto& f : m.functions) assign_uids_expr(f.body, next);
}

// ---------------------------------------------------------------------------
// Type checking

namespace {

class Checker {
 public:
  Checker(const Model&, const Signature& sig, std::vector<Diagnostic>& diags)
      : sig_(sig), diags_(diags) {}

  void error(const SourceLocation& loc, std::string msg) {
    diags_.push_back({Severity::Error, loc, std::move(msg)});
  }
  void warn(const SourceLocation& loc, std::string msg) {
    diags_.push_back({Severity::Warning, loc, std::move(msg)});
  }

  bool resolve_type(const TypeRef& t, const SourceLocation& loc) {
    if (t.kind != TypeRef::Kind::Named) return true;
    if (sig_.types.count(t.name)) return true;
    error(loc, "unknown type '" + t.name + "'");
    return false;
  }

  // Returns the inferred type, or nullopt after reporting (callers skip
  // dependent checks to avoid cascading noise).
  std::optional<TypeRef> check_expr(const ExprPtr& e,
                                    const std::vector<std::pair<std::string, TypeRef>>& env) {
    if (!e) return std::nullopt;
    if (auto* v = e->as<Expr::Var>()) {
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == v->name) return it->second;
      error(e->loc, "unbound variable '" + v->name + "'");
      return std::nullopt;
    }
    if (auto* l = e->as<Expr::Lit>()) {
      switch (l->value.kind()) {
        case Value::Kind::Int: return TypeRef::builtin_int();
        case Value::Kind::Bool: return TypeRef::builtin_bool();
        default:
          error(e->loc, "literal must be Int or Bool");
          return std::nullopt;
      }
    }
    if (auto* c = e->as<Expr::Con>()) {
      const CtorInfo* info = sig_.find_ctor(c->name);
      if (!info) {
        error(e->loc, "unknown constructor '" + c->name + "'");
        return std::nullopt;
      }
      if (info->ctor->arg_types.size() != c->args.size()) {
        error(e->loc, "constructor '" + c->name + "' expects " +
                          std::to_string(info->ctor->arg_types.size()) + " arguments, got " +
                          std::to_string(c->args.size()));
        return std::nullopt;
      }
      for (size_t i = 0; i < c->args.size(); ++i)
        expect(c->args[i], env, info->ctor->arg_types[i]);
      return TypeRef::named(info->owner->name);
    }
    if (auto* c = e->as<Expr::Call>()) {
      auto it = sig_.functions.find(c->name);
      if (it == sig_.functions.end()) {
        error(e->loc, "unknown function '" + c->name + "'");
        return std::nullopt;
      }
      const FuncDef& f = *it->second;
      if (f.params.size() != c->args.size()) {
        error(e->loc, "function '" + c->name + "' expects " + std::to_string(f.params.size()) +
                          " arguments, got " + std::to_string(c->args.size()));
        return std::nullopt;
      }
      for (size_t i = 0; i < c->args.size(); ++i)
        expect(c->args[i], env, f.params[i].second);
      return f.result_type;
    }
    if (auto* i = e->as<Expr::If>()) {
      expect(i->cond, env, TypeRef::builtin_bool());
      auto t1 = check_expr(i->then_branch, env);
      auto t2 = check_expr(i->else_branch, env);
      if (t1 && t2 && *t1 != *t2)
        error(e->loc, "if branches have different types: " + t1->str() + " vs " + t2->str());
      return t1 ? t1 : t2;
    }
    if (auto* c = e->as<Expr::Case>()) {
      auto scrut = check_expr(c->scrutinee, env);
      if (c->arms.empty()) {
        error(e->loc, "case expression has no arms");
        return std::nullopt;
      }
      std::optional<TypeRef> result;
      for (const auto& arm : c->arms) {
        auto inner = env;
        if (scrut) check_pattern(arm.pattern, *scrut, inner, /*allow_absent=*/false);
        auto bt = check_expr(arm.body, inner);
        if (bt) {
          if (result && *result != *bt)
            error(arm.body->loc,
                  "case arms have different types: " + result->str() + " vs " + bt->str());
          if (!result) result = bt;
        }
      }
      return result;
    }
    if (auto* n = e->as<Expr::Not>()) {
      expect(n->operand, env, TypeRef::builtin_bool());
      return TypeRef::builtin_bool();
    }
    if (auto* n = e->as<Expr::Neg>()) {
      expect(n->operand, env, TypeRef::builtin_int());
      return TypeRef::builtin_int();
    }
    auto* b = e->as<Expr::Binary>();
    if (binop_is_boolean(b->op)) {
      expect(b->lhs, env, TypeRef::builtin_bool());
      expect(b->rhs, env, TypeRef::builtin_bool());
      return TypeRef::builtin_bool();
    }
    if (b->op == BinOp::Eq || b->op == BinOp::Ne) {
      auto t1 = check_expr(b->lhs, env);
      auto t2 = check_expr(b->rhs, env);
      if (t1 && t2 && *t1 != *t2)
        error(e->loc, "cannot compare " + t1->str() + " with " + t2->str());
      return TypeRef::builtin_bool();
    }
    if (binop_is_comparison(b->op)) {
      expect(b->lhs, env, TypeRef::builtin_int());
      expect(b->rhs, env, TypeRef::builtin_int());
      return TypeRef::builtin_bool();
    }
    expect(b->lhs, env, TypeRef::builtin_int());
    expect(b->rhs, env, TypeRef::builtin_int());
    return TypeRef::builtin_int();
  }

  void expect(const ExprPtr& e, const std::vector<std::pair<std::string, TypeRef>>& env,
              const TypeRef& want) {
    auto got = check_expr(e, env);
    if (got && *got != want)
      error(e->loc, "expected " + want.str() + ", got " + got->str());
  }

  // Type-checks a pattern against the scrutinee/port type and appends binder
  // types to `env`. The absent-pattern is legal only at the top of a trigger.
  void check_pattern(const Pattern& p, const TypeRef& want,
                     std::vector<std::pair<std::string, TypeRef>>& env, bool allow_absent) {
    switch (p.kind) {
      case Pattern::Kind::Wildcard:
        return;
      case Pattern::Kind::AbsentPat:
        if (!allow_absent)
          error(p.loc, "absent-pattern is only allowed at the top level of a trigger");
        return;
      case Pattern::Kind::Var:
        env.emplace_back(p.name, want);
        return;
      case Pattern::Kind::Lit: {
        TypeRef got = p.literal.kind() == Value::Kind::Int ? TypeRef::builtin_int()
                                                           : TypeRef::builtin_bool();
        if (got != want)
          error(p.loc, "literal pattern of type " + got.str() + " against " + want.str());
        return;
      }
      case Pattern::Kind::Con: {
        const CtorInfo* info = sig_.find_ctor(p.name);
        if (!info) {
          error(p.loc, "unknown constructor '" + p.name + "' in pattern");
          return;
        }
        TypeRef owner = TypeRef::named(info->owner->name);
        if (owner != want)
          error(p.loc, "constructor '" + p.name + "' belongs to " + owner.str() + ", expected " +
                           want.str());
        if (info->ctor->arg_types.size() != p.args.size()) {
          error(p.loc, "constructor pattern '" + p.name + "' expects " +
                           std::to_string(info->ctor->arg_types.size()) + " sub-patterns, got " +
                           std::to_string(p.args.size()));
          return;
        }
        for (size_t i = 0; i < p.args.size(); ++i)
          check_pattern(p.args[i], info->ctor->arg_types[i], env, /*allow_absent=*/false);
        return;
      }
    }
  }

 private:
  const Signature& sig_;
  std::vector<Diagnostic>& diags_;
};

using TypeEnv = std::vector<std::pair<std::string, TypeRef>>;

void check_definitions(const Model& m, Checker& ck) {
  std::set<std::string> type_names, ctor_names, fun_names;
  for (const auto& t : m.types) {
    if (!type_names.insert(t.name).second)
      ck.error(t.loc, "duplicate type '" + t.name + "'");
    for (const auto& c : t.ctors) {
      if (!ctor_names.insert(c.name).second)
        ck.error(t.loc, "duplicate constructor '" + c.name + "' (constructor names are global)");
      for (const auto& at : c.arg_types) ck.resolve_type(at, t.loc);
    }
    if (t.ctors.empty()) ck.error(t.loc, "type '" + t.name + "' has no constructors");
  }
  for (const auto& f : m.functions) {
    if (!fun_names.insert(f.name).second)
      ck.error(f.loc, "duplicate function '" + f.name + "'");
    TypeEnv env;
    std::set<std::string> seen;
    for (const auto& [pn, pt] : f.params) {
      if (!seen.insert(pn).second) ck.error(f.loc, "duplicate parameter '" + pn + "'");
      ck.resolve_type(pt, f.loc);
      env.emplace_back(pn, pt);
    }
    ck.resolve_type(f.result_type, f.loc);
    ck.expect(f.body, env, f.result_type);
  }
}

void check_efsm(const Component& c, Checker& ck) {
  const Efsm& e = *c.efsm;
  std::set<std::string> states(e.states.begin(), e.states.end());
  if (e.states.empty()) ck.error(c.loc, "component '" + c.name + "' has no control states");
  if (states.size() != e.states.size())
    ck.error(c.loc, "duplicate control state in '" + c.name + "'");
  if (!states.count(e.initial))
    ck.error(c.loc, "initial state '" + e.initial + "' is not a declared state of '" + c.name + "'");

  TypeEnv locals_env;
  std::set<std::string> local_names;
  for (const auto& l : e.locals) {
    if (!local_names.insert(l.name).second)
      ck.error(l.loc, "duplicate local '" + l.name + "'");
    ck.resolve_type(l.type, l.loc);
    // Initializers are constant expressions: checked under an empty scope.
    ck.expect(l.init, {}, l.type);
    locals_env.emplace_back(l.name, l.type);
  }

  for (const auto& t : e.transitions) {
    if (!states.count(t.source))
      ck.error(t.loc, "transition source '" + t.source + "' is not a state");
    if (!states.count(t.target))
      ck.error(t.loc, "transition target '" + t.target + "' is not a state");

    TypeEnv env = locals_env;
    std::set<std::string> trigger_ports;
    size_t binder_base = env.size();
    for (const auto& [port, pat] : t.triggers) {
      const PortDecl* pd = c.find_port(port);
      if (!pd || pd->dir != PortDir::In) {
        ck.error(t.loc, "trigger on unknown in-port '" + port + "'");
        continue;
      }
      if (!trigger_ports.insert(port).second)
        ck.error(t.loc, "duplicate trigger for port '" + port + "'");
      ck.check_pattern(pat, pd->type, env, /*allow_absent=*/true);
    }
    std::set<std::string> binders;
    for (size_t i = binder_base; i < env.size(); ++i) {
      if (!binders.insert(env[i].first).second)
        ck.error(t.loc, "binder '" + env[i].first + "' bound twice in one transition");
      if (local_names.count(env[i].first))
        ck.error(t.loc, "binder '" + env[i].first + "' shadows a local variable");
    }

    ck.expect(t.guard, env, TypeRef::builtin_bool());

    std::set<std::string> out_ports;
    for (const auto& [port, expr] : t.outputs) {
      const PortDecl* pd = c.find_port(port);
      if (!pd || pd->dir != PortDir::Out) {
        ck.error(t.loc, "output to unknown out-port '" + port + "'");
        continue;
      }
      if (!out_ports.insert(port).second)
        ck.error(t.loc, "duplicate output for port '" + port + "'");
      ck.expect(expr, env, pd->type);
    }

    std::set<std::string> assigned;
    for (const auto& [local, expr] : t.assignments) {
      auto it = std::find_if(e.locals.begin(), e.locals.end(),
                             [&](const LocalDecl& l) { return l.name == local; });
      if (it == e.locals.end()) {
        ck.error(t.loc, "assignment to unknown local '" + local + "'");
        continue;
      }
      if (!assigned.insert(local).second)
        ck.error(t.loc, "duplicate assignment to '" + local + "'");
      ck.expect(expr, env, it->type);
    }
  }
}

// ---------------------------------------------------------------------------
// Hierarchy flattening

struct NodeKey {
  std::string path;  // "" = root boundary
  std::string port;
  std::string str() const { return path + ":" + port; }
};

enum class NodeKind { RootIn, RootOut, AtomicIn, AtomicOut, BoundaryIn, BoundaryOut };

struct Flattener {
  const Model& m;
  Checker& ck;
  Net net;
  bool failed = false;

  struct EdgeInfo {
    std::string from;  // node key
    bool delayed = false;
    std::string channel;  // qualified channel name
    SourceLocation loc;
  };
  std::map<std::string, EdgeInfo> incoming;          // node key -> feeding edge
  std::map<std::string, NodeKind> kind;              // node key -> role
  std::map<std::string, std::pair<int, std::string>> atomic_port;  // key -> (inst, port)
  std::map<std::string, TypeRef> port_type;

  Flattener(const Model& model, Checker& checker) : m(model), ck(checker) {}

  std::string join(const std::string& path, const std::string& sub) {
    return path.empty() ? sub : path + "." + sub;
  }

  void register_ports(const Component& c, const std::string& path, bool root_boundary) {
    for (const auto& p : c.ports) {
      NodeKey k{path, p.name};
      if (root_boundary)
        kind[k.str()] = p.dir == PortDir::In ? NodeKind::RootIn : NodeKind::RootOut;
      else if (c.atomic())
        kind[k.str()] = p.dir == PortDir::In ? NodeKind::AtomicIn : NodeKind::AtomicOut;
      else
        kind[k.str()] = p.dir == PortDir::In ? NodeKind::BoundaryIn : NodeKind::BoundaryOut;
      port_type[k.str()] = p.type;
    }
  }

  void instantiate(const Component& c, const std::string& path) {
    if (c.atomic()) {
      int idx = static_cast<int>(net.instances.size());
      net.instances.push_back({path, &c});
      for (const auto& p : c.ports)
        atomic_port[NodeKey{path, p.name}.str()] = {idx, p.name};
      return;
    }
    for (const auto& s : c.subs) {
      const Component* child = m.find_component(s.component);
      if (!child) {
        ck.error(s.loc, "unknown component '" + s.component + "'");
        failed = true;
        continue;
      }
      std::string child_path = join(path, s.name);
      register_ports(*child, child_path, /*root_boundary=*/false);
      instantiate(*child, child_path);
    }
    std::set<std::string> channel_names;
    for (const auto& ch : c.channels) {
      if (!channel_names.insert(ch.name).second)
        ck.error(ch.loc, "duplicate channel name '" + ch.name + "'");
      add_channel(c, path, ch);
    }
  }

  // Resolves one endpoint to a node key; checks existence and direction.
  // `reading` is true for the channel's source side.
  std::optional<std::string> resolve(const Component& c, const std::string& path,
                                     const Endpoint& ep, bool reading,
                                     const SourceLocation& loc) {
    const Component* owner = &c;
    std::string node_path = path;
    if (!ep.sub.empty()) {
      auto it = std::find_if(c.subs.begin(), c.subs.end(),
                             [&](const SubDecl& s) { return s.name == ep.sub; });
      if (it == c.subs.end()) {
        ck.error(loc, "unknown subcomponent '" + ep.sub + "'");
        return std::nullopt;
      }
      owner = m.find_component(it->component);
      if (!owner) return std::nullopt;  // reported in instantiate
      node_path = join(path, ep.sub);
    }
    const PortDecl* pd = owner->find_port(ep.port);
    if (!pd) {
      ck.error(loc, "component '" + owner->name + "' has no port '" + ep.port + "'");
      return std::nullopt;
    }
    // Reading from a sub means its out-port; reading from the boundary means
    // the composite's own in-port (data entering the composite). Writing is
    // the mirror image.
    bool want_out = reading ? !ep.sub.empty() : ep.sub.empty();
    bool is_out = pd->dir == PortDir::Out;
    if (is_out != want_out) {
      ck.error(loc, "channel endpoint " + ep.str() + " has the wrong direction");
      return std::nullopt;
    }
    return NodeKey{node_path, ep.port}.str();
  }

  void add_channel(const Component& c, const std::string& path, const ChannelDecl& ch) {
    auto from = resolve(c, path, ch.from, /*reading=*/true, ch.loc);
    auto to = resolve(c, path, ch.to, /*reading=*/false, ch.loc);
    if (!from || !to) {
      failed = true;
      return;
    }
    if (port_type.at(*from) != port_type.at(*to)) {
      ck.error(ch.loc, "channel '" + ch.name + "' connects " + port_type.at(*from).str() +
                           " to " + port_type.at(*to).str());
      failed = true;
      return;
    }
    if (incoming.count(*to)) {
      ck.error(ch.loc, "port " + *to + " is fed by more than one channel");
      failed = true;
      return;
    }
    incoming[*to] = {*from, ch.delayed, join(path, ch.name), ch.loc};
  }

  // Follows the channel chain feeding `sink` back to a terminal source.
  // Returns false for a dangling sink (no wire; reads Absent forever).
  bool chase(const std::string& sink, Wire& out) {
    std::set<std::string> visited;
    std::string cur = sink;
    bool delayed = false;
    std::string channel_name;
    while (true) {
      auto it = incoming.find(cur);
      if (it == incoming.end()) {
        if (cur == sink) return false;  // nothing attached at all
        NodeKind k = kind.at(cur);
        if (k == NodeKind::AtomicOut || k == NodeKind::RootIn) {
          out.delayed = delayed;
          out.name = channel_name;
          if (k == NodeKind::RootIn) {
            out.src_inst = -1;
            out.src_port = cur.substr(cur.find(':') + 1);
          } else {
            auto [inst, port] = atomic_port.at(cur);
            out.src_inst = inst;
            out.src_port = port;
          }
          return true;
        }
        ck.warn({}, "port " + sink + " is fed through undriven boundary port " + cur);
        return false;
      }
      if (!visited.insert(cur).second) {
        ck.error(it->second.loc, "channel chain through boundary ports forms a cycle at " + cur);
        failed = true;
        return false;
      }
      delayed = delayed || it->second.delayed;
      if (channel_name.empty()) channel_name = it->second.channel;
      cur = it->second.from;
    }
  }

  void resolve_wires() {
    for (size_t i = 0; i < net.instances.size(); ++i) {
      for (const auto& p : net.instances[i].comp->ports) {
        if (p.dir != PortDir::In) continue;
        std::string key = NodeKey{net.instances[i].path, p.name}.str();
        Wire w;
        w.dst_inst = static_cast<int>(i);
        w.dst_port = p.name;
        if (chase(key, w)) net.wires.push_back(w);
      }
    }
    for (const auto& p : net.outputs) {
      std::string key = NodeKey{"", p.name}.str();
      Wire w;
      w.dst_inst = -1;
      w.dst_port = p.name;
      if (chase(key, w)) net.wires.push_back(w);
    }
  }
};

// Rejects recursive component nesting (which would never elaborate).
bool check_instantiation_acyclic(const Model& m, Checker& ck) {
  std::map<std::string, int> mark;  // 0 unvisited, 1 in progress, 2 done
  bool ok = true;
  std::function<void(const Component&)> visit = [&](const Component& c) {
    mark[c.name] = 1;
    for (const auto& s : c.subs) {
      const Component* child = m.find_component(s.component);
      if (!child) continue;  // reported during flattening
      if (mark[child->name] == 1) {
        ck.error(s.loc, "recursive instantiation of component '" + child->name + "'");
        ok = false;
        continue;
      }
      if (mark[child->name] == 0) visit(*child);
    }
    mark[c.name] = 2;
  };
  for (const auto& c : m.components)
    if (mark[c.name] == 0) visit(c);
  return ok;
}

// Topological order over instantaneous wires; on a cycle, reports one
// diagnostic naming every instance involved.
void order_instances(Net& net, Checker& ck, bool& failed) {
  size_t n = net.instances.size();
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indegree(n, 0);
  for (const auto& w : net.wires) {
    if (w.src_inst < 0 || w.dst_inst < 0 || w.delayed) continue;
    succ[w.src_inst].push_back(w.dst_inst);
    ++indegree[w.dst_inst];
  }
  std::vector<bool> placed(n, false);
  net.topo_order.clear();
  while (net.topo_order.size() < n) {
    int pick = -1;
    for (size_t i = 0; i < n; ++i) {
      if (!placed[i] && indegree[i] == 0) {
        pick = static_cast<int>(i);
        break;
      }
    }
    if (pick < 0) break;  // cycle among the rest
    placed[pick] = true;
    net.topo_order.push_back(pick);
    for (int s : succ[pick]) --indegree[s];
  }
  if (net.topo_order.size() < n) {
    std::string members;
    for (size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      if (!members.empty()) members += ", ";
      members += net.instances[i].path;
    }
    ck.error({}, "causality cycle: instantaneous channels form a loop through " + members);
    failed = true;
  }
}

}  // namespace

Validated validate(Model& m) {
  assign_uids(m);

  Validated v;
  v.sig = build_signature(m);
  Checker ck(m, v.sig, v.diagnostics);
  check_definitions(m, ck);

  std::set<std::string> comp_names;
  for (const auto& c : m.components) {
    if (!comp_names.insert(c.name).second)
      ck.error(c.loc, "duplicate component '" + c.name + "'");
    std::set<std::string> port_names;
    for (const auto& p : c.ports) {
      if (!port_names.insert(p.name).second)
        ck.error(p.loc, "duplicate port '" + p.name + "' in component '" + c.name + "'");
      ck.resolve_type(p.type, p.loc);
    }
    bool has_efsm = c.efsm.has_value();
    bool has_subs = !c.subs.empty() || !c.channels.empty();
    if (has_efsm && has_subs)
      ck.error(c.loc, "component '" + c.name + "' mixes an efsm with subcomponents");
    if (!has_efsm && !has_subs)
      ck.error(c.loc, "component '" + c.name + "' has neither an efsm nor subcomponents");
    if (has_efsm && !has_subs) check_efsm(c, ck);
    std::set<std::string> sub_names;
    for (const auto& s : c.subs)
      if (!sub_names.insert(s.name).second)
        ck.error(s.loc, "duplicate subcomponent name '" + s.name + "'");
  }

  const Component* root = m.find_component(m.root);
  if (!root) {
    ck.error({}, m.root.empty() ? "model declares no root component"
                                : "root component '" + m.root + "' is not defined");
    return v;
  }
  if (!check_instantiation_acyclic(m, ck)) return v;
  if (!v.ok()) return v;

  Flattener fl(m, ck);
  fl.net.inputs.clear();
  for (const auto& p : root->ports)
    (p.dir == PortDir::In ? fl.net.inputs : fl.net.outputs).push_back(p);

  if (root->atomic()) {
    // Single-EFSM model: its ports are the external interface directly.
    fl.net.instances.push_back({root->name, root});
    int idx = 0;
    for (const auto& p : root->ports) {
      Wire w;
      if (p.dir == PortDir::In) {
        w.src_inst = -1;
        w.src_port = p.name;
        w.dst_inst = idx;
        w.dst_port = p.name;
      } else {
        w.src_inst = idx;
        w.src_port = p.name;
        w.dst_inst = -1;
        w.dst_port = p.name;
      }
      w.name = p.name;
      fl.net.wires.push_back(w);
    }
  } else {
    fl.register_ports(*root, "", /*root_boundary=*/true);
    fl.instantiate(*root, "");
    fl.resolve_wires();
  }

  bool failed = fl.failed;
  order_instances(fl.net, ck, failed);
  if (!failed) v.net = std::move(fl.net);

  // Late sanity: evaluate local initializers once so constant errors (e.g.
  // division by zero) surface at validation rather than first use.
  if (v.ok()) {
    for (const auto& inst : v.net.instances) {
      for (const auto& l : inst.comp->efsm->locals) {
        try {
          Env empty;
          EvalContext cx;
          cx.sig = &v.sig;
          eval(l.init, empty, cx);
        } catch (const MbtError& e) {
          ck.error(l.loc, "initializer of '" + l.name + "' failed: " + e.what());
        }
      }
    }
  }
  return v;
}

Validated validate_or_throw(Model& m) {
  Validated v = validate(m);
  if (!v.ok()) {
    std::string msg = "model '" + m.name + "' is invalid:";
    for (const auto& d : v.diagnostics)
      if (d.severity == Severity::Error) msg += "\n  " + d.str();
    throw MbtError(msg);
  }
  return v;
}

}  // namespace mbt

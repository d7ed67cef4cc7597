#include "mbt/symbolic.hpp"

#include <algorithm>

#include "mbt/eval.hpp"

namespace mbt::gen {

SymVal SymVal::single(Value v) { return {{std::move(v)}}; }

SymVal SymVal::from(std::vector<Value> vs) {
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return {std::move(vs)};
}

bool SymVal::contains(const Value& v) const {
  return std::binary_search(vals.begin(), vals.end(), v);
}

void SymVal::insert(const Value& v) {
  auto it = std::lower_bound(vals.begin(), vals.end(), v);
  if (it == vals.end() || !(*it == v)) vals.insert(it, v);
}

bool SymVal::subset_of(const SymVal& other) const {
  for (const Value& v : vals)
    if (!other.contains(v)) return false;
  return true;
}

bool operator==(const SymState& a, const SymState& b) {
  if (a.buffers.size() != b.buffers.size() || a.comps.size() != b.comps.size()) return false;
  for (size_t i = 0; i < a.comps.size(); ++i) {
    if (a.comps[i].control != b.comps[i].control) return false;
    if (!(a.comps[i].locals == b.comps[i].locals)) return false;
  }
  return a.buffers == b.buffers;
}

namespace {

// Odometer over a list of sorted sets; yields every combination.
struct Odometer {
  const std::vector<const std::vector<Value>*> sets;
  std::vector<size_t> idx;
  bool done = false;

  explicit Odometer(std::vector<const std::vector<Value>*> s)
      : sets(std::move(s)), idx(sets.size(), 0) {
    for (const auto* set : sets)
      if (set->empty()) done = true;
  }
  const Value& at(size_t k) const { return (*sets[k])[idx[k]]; }
  void next() {
    for (size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < sets[k]->size()) return;
      idx[k] = 0;
    }
    done = true;
  }
  // Saturates at `cap + 1` so callers can compare without overflow.
  size_t count_capped(size_t cap) const {
    size_t n = 1;
    for (const auto* set : sets) {
      if (set->empty()) return 0;
      if (n > cap / set->size()) return cap + 1;
      n *= set->size();
    }
    return n;
  }
};

struct Survivor {
  std::vector<Value> tuple;                          // in-ports then locals
  std::vector<std::pair<std::string, Value>> binders;
};

}  // namespace

SymEngine::SymEngine(const Model& m, const Validated& v, const UniverseTable& universes,
                     long long fuel, size_t tuple_cap)
    : model_(m), v_(v), universes_(universes), net_(&v.net), fuel_(fuel),
      tuple_cap_(tuple_cap) {
  if (!v.ok()) throw MbtError("symbolic execution requires a validated model");
}

SymState SymEngine::initial() const {
  SymState st;
  st.comps.resize(net_->instances.size());
  for (size_t i = 0; i < net_->instances.size(); ++i) {
    const Component& c = *net_->instances[i].comp;
    st.comps[i].control = 0;
    for (size_t s = 0; s < c.efsm->states.size(); ++s)
      if (c.efsm->states[s] == c.efsm->initial) st.comps[i].control = static_cast<int>(s);
    EvalContext cx;
    cx.sig = &v_.sig;
    cx.fuel = fuel_;
    for (const auto& l : c.efsm->locals) {
      Env env;
      st.comps[i].locals.push_back(SymVal::single(eval(l.init, env, cx)));
    }
  }
  st.buffers.assign(net_->wires.size(), SymVal::single(Value::absent()));
  return st;
}

std::vector<SymSucc> SymEngine::successors(const SymState& st) const {
  const Net& net = *net_;

  // Per-instance in-port wiring (mirrors the concrete engine's tables).
  struct InWire {
    std::string port;
    int wire = -1;
  };
  std::vector<std::vector<InWire>> in_wires(net.instances.size());
  std::vector<std::map<std::string, std::vector<int>>> out_wires(net.instances.size());
  for (size_t i = 0; i < net.instances.size(); ++i)
    for (const auto& p : net.instances[i].comp->ports)
      if (p.dir == PortDir::In) in_wires[i].push_back({p.name, -1});
  for (size_t w = 0; w < net.wires.size(); ++w) {
    const Wire& wire = net.wires[w];
    if (wire.dst_inst >= 0) {
      for (auto& iw : in_wires[wire.dst_inst])
        if (iw.port == wire.dst_port) iw.wire = static_cast<int>(w);
    }
    if (wire.src_inst >= 0) out_wires[wire.src_inst][wire.src_port].push_back(static_cast<int>(w));
  }

  // Open input channels start at their full universes and narrow as readers
  // commit choices.
  std::map<std::string, SymVal> ext_in;
  for (const auto& p : net.inputs) ext_in[p.name] = SymVal{universes_.channel(p.type)};

  static const SymVal kAbsent = SymVal::single(Value::absent());

  // Committed output sets of already-processed instances, per wire.
  std::vector<SymVal> wire_out(net.wires.size());

  std::vector<SymSucc> results;
  std::vector<int> choices(net.instances.size(), -1);
  std::vector<SymState::CompSym> post(net.instances.size());

  // Reads the set an in-port wire carries right now.
  auto wire_set = [&](int w) -> const SymVal& {
    if (w < 0) return kAbsent;
    const Wire& wire = net.wires[w];
    if (wire.delayed) return st.buffers[w];
    if (wire.src_inst < 0) return ext_in.at(wire.src_port);
    return wire_out[w];
  };

  std::function<void(size_t)> rec = [&](size_t k) {
    if (k == net.topo_order.size()) {
      SymSucc succ;
      succ.choices = choices;
      succ.state.comps = post;
      succ.state.buffers.assign(net.wires.size(), kAbsent);
      for (size_t w = 0; w < net.wires.size(); ++w) {
        const Wire& wire = net.wires[w];
        if (!wire.delayed) continue;
        succ.state.buffers[w] =
            wire.src_inst < 0 ? ext_in.at(wire.src_port) : wire_out[w];
        if (succ.state.buffers[w].empty()) succ.state.buffers[w] = kAbsent;
      }
      succ.ext_inputs = ext_in;
      for (const auto& p : net.outputs) succ.ext_outputs[p.name] = kAbsent;
      for (size_t w = 0; w < net.wires.size(); ++w) {
        const Wire& wire = net.wires[w];
        if (wire.dst_inst >= 0) continue;
        const SymVal& vs = wire.delayed    ? st.buffers[w]
                           : wire.src_inst < 0 ? ext_in.at(wire.src_port)
                                               : wire_out[w];
        if (!vs.empty()) succ.ext_outputs[wire.dst_port] = vs;
      }
      results.push_back(std::move(succ));
      return;
    }

    int i = net.topo_order[k];
    const Component& comp = *net.instances[i].comp;
    const Efsm& efsm = *comp.efsm;
    const std::string& control = efsm.states[st.comps[i].control];

    // Tuple space: in-port sets then local sets.
    std::vector<const std::vector<Value>*> sets;
    for (const auto& iw : in_wires[i]) sets.push_back(&wire_set(iw.wire).vals);
    for (const auto& lv : st.comps[i].locals) sets.push_back(&lv.vals);
    if (Odometer(sets).count_capped(tuple_cap_) > tuple_cap_)
      throw MbtError("symbolic tuple budget exceeded at instance '" + net.instances[i].path +
                     "' (more than " + std::to_string(tuple_cap_) + " combinations)");

    size_t n_ports = in_wires[i].size();
    std::map<int, std::vector<Survivor>> by_choice;  // transition index / -1
    for (Odometer od(sets); !od.done; od.next()) {
      std::map<std::string, Value> inputs;
      for (size_t p = 0; p < n_ports; ++p) inputs[in_wires[i][p].port] = od.at(p);
      Env locals;
      for (size_t l = 0; l < efsm.locals.size(); ++l)
        locals.push(efsm.locals[l].name, od.at(n_ports + l));
      EvalContext cx;
      cx.sig = &v_.sig;
      cx.fuel = fuel_;
      std::vector<Enabled> en = enabled(comp, control, locals, inputs, cx);
      std::vector<Value> tuple;
      for (size_t s = 0; s < sets.size(); ++s) tuple.push_back(od.at(s));
      if (en.empty()) {
        by_choice[-1].push_back({tuple, {}});
      } else {
        for (const auto& e : en) by_choice[e.index].push_back({tuple, e.binders});
      }
    }

    // Deterministic branch order: transitions by declaration index, stutter
    // last.
    std::vector<int> order;
    for (const auto& [t, survivors] : by_choice)
      if (t >= 0) order.push_back(t);
    std::sort(order.begin(), order.end());
    if (by_choice.count(-1)) order.push_back(-1);

    for (int t : order) {
      const std::vector<Survivor>& survivors = by_choice[t];

      // Project surviving tuples back onto ports and locals.
      std::vector<SymVal> port_proj(n_ports), local_proj(efsm.locals.size());
      for (const auto& sv : survivors) {
        for (size_t p = 0; p < n_ports; ++p) port_proj[p].insert(sv.tuple[p]);
        for (size_t l = 0; l < efsm.locals.size(); ++l)
          local_proj[l].insert(sv.tuple[n_ports + l]);
      }

      SymState::CompSym next;
      std::map<std::string, SymVal> outs;

      if (t < 0) {
        next.control = st.comps[i].control;
        next.locals = local_proj;
      } else {
        const Transition& tr = efsm.transitions[t];
        next.control = 0;
        for (size_t s = 0; s < efsm.states.size(); ++s)
          if (efsm.states[s] == tr.target) next.control = static_cast<int>(s);
        next.locals.resize(efsm.locals.size());
        for (const auto& sv : survivors) {
          Env env;
          for (size_t l = 0; l < efsm.locals.size(); ++l)
            env.push(efsm.locals[l].name, sv.tuple[n_ports + l]);
          for (const auto& [bn, bv] : sv.binders) env.push(bn, bv);
          EvalContext cx;
          cx.sig = &v_.sig;
          cx.fuel = fuel_;
          for (const auto& [port, expr] : tr.outputs) outs[port].insert(eval(expr, env, cx));
          for (size_t l = 0; l < efsm.locals.size(); ++l) {
            const Value* assigned = nullptr;
            Value computed;
            for (const auto& [ln, expr] : tr.assignments)
              if (ln == efsm.locals[l].name) {
                computed = eval(expr, env, cx);
                assigned = &computed;
              }
            next.locals[l].insert(assigned ? *assigned : sv.tuple[n_ports + l]);
          }
        }
      }

      // Commit: narrow externally-fed instantaneous wires, fill out-wires.
      std::map<std::string, SymVal> saved_ext;
      std::vector<std::pair<int, SymVal>> saved_wires;
      for (size_t p = 0; p < n_ports; ++p) {
        int w = in_wires[i][p].wire;
        if (w < 0) continue;
        const Wire& wire = net.wires[w];
        if (!wire.delayed && wire.src_inst < 0) {
          auto& slot = ext_in.at(wire.src_port);
          if (!saved_ext.count(wire.src_port)) saved_ext[wire.src_port] = slot;
          slot = port_proj[p];
        }
      }
      // Silent out-ports (no output expression, or stutter) emit Absent.
      for (const auto& [port, ws] : out_wires[i]) {
        const SymVal& vs = outs.count(port) ? outs[port] : kAbsent;
        for (int w : ws) {
          saved_wires.emplace_back(w, wire_out[w]);
          wire_out[w] = vs;
        }
      }

      choices[i] = t;
      post[i] = next;
      rec(k + 1);

      for (auto& [ch, vs] : saved_ext) ext_in.at(ch) = vs;
      for (auto it = saved_wires.rbegin(); it != saved_wires.rend(); ++it)
        wire_out[it->first] = it->second;
    }
  };

  rec(0);
  return results;
}

std::vector<SymSucc> sym_step(const SymEngine& se, const SymState& st) {
  return se.successors(st);
}

}  // namespace mbt::gen

#include "mbt/engine.hpp"

#include <sstream>

namespace mbt {

const Value& valuation_get(const Valuation& v, const std::string& name) {
  static const Value kAbsent;
  auto it = v.find(name);
  return it == v.end() ? kAbsent : it->second;
}

bool operator==(const SystemState& a, const SystemState& b) {
  if (a.comps.size() != b.comps.size() || a.buffers.size() != b.buffers.size()) return false;
  for (size_t i = 0; i < a.comps.size(); ++i) {
    if (a.comps[i].control != b.comps[i].control) return false;
    if (a.comps[i].locals.size() != b.comps[i].locals.size()) return false;
    for (size_t j = 0; j < a.comps[i].locals.size(); ++j)
      if (a.comps[i].locals[j] != b.comps[i].locals[j]) return false;
  }
  for (size_t i = 0; i < a.buffers.size(); ++i)
    if (a.buffers[i] != b.buffers[i]) return false;
  return true;
}

Engine::Engine(const Model& model, const Validated& v)
    : model_(model), v_(v), net_(&v.net), order_(v.net.topo_order) {
  const Net& net = *net_;
  in_ports_.resize(net.instances.size());
  out_ports_.resize(net.instances.size());
  for (size_t i = 0; i < net.instances.size(); ++i) {
    for (const auto& p : net.instances[i].comp->ports) {
      if (p.dir == PortDir::In)
        in_ports_[i].push_back({p.name, -1});
      else
        out_ports_[i].push_back({p.name, {}});
    }
  }
  for (size_t w = 0; w < net.wires.size(); ++w) {
    const Wire& wire = net.wires[w];
    if (wire.dst_inst >= 0) {
      for (auto& ip : in_ports_[wire.dst_inst])
        if (ip.name == wire.dst_port) ip.wire = static_cast<int>(w);
    }
    if (wire.src_inst >= 0) {
      for (auto& op : out_ports_[wire.src_inst])
        if (op.name == wire.src_port) op.wires.push_back(static_cast<int>(w));
    }
  }
  ext_out_wire_.assign(net.outputs.size(), -1);
  for (size_t w = 0; w < net.wires.size(); ++w) {
    if (net.wires[w].dst_inst < 0) {
      int idx = net.find_output(net.wires[w].dst_port);
      if (idx >= 0) ext_out_wire_[idx] = static_cast<int>(w);
    }
  }
}

SystemState Engine::initial_state() const {
  SystemState st;
  st.comps.resize(net_->instances.size());
  for (size_t i = 0; i < net_->instances.size(); ++i) {
    const Efsm& efsm = *net_->instances[i].comp->efsm;
    auto& cs = st.comps[i];
    cs.control = 0;
    for (size_t s = 0; s < efsm.states.size(); ++s)
      if (efsm.states[s] == efsm.initial) cs.control = static_cast<int>(s);
    for (const auto& l : efsm.locals) {
      Env empty;
      EvalContext cx;
      cx.sig = &v_.sig;
      cs.locals.push_back(eval(l.init, empty, cx));
    }
  }
  st.buffers.assign(net_->wires.size(), Value::absent());
  return st;
}

const std::string& Engine::control_name(const SystemState& st, int inst) const {
  return net_->instances[inst].comp->efsm->states[st.comps[inst].control];
}

int Engine::control_index(int inst, const std::string& name) const {
  const auto& states = net_->instances[inst].comp->efsm->states;
  for (size_t s = 0; s < states.size(); ++s)
    if (states[s] == name) return static_cast<int>(s);
  return -1;
}

Valuation Engine::step(SystemState& st, const Valuation& inputs, const StepOptions& opt) const {
  const Net& net = *net_;
  if (opt.mode == StepMode::Explore && !opt.rng)
    throw MbtError("explore mode requires a random source");

  std::vector<Value> wire_now(net.wires.size());
  std::vector<Value> next_buffers(net.wires.size());

  // Delayed wires deliver last tick's buffer; external instantaneous wires
  // deliver this tick's input directly.
  for (size_t w = 0; w < net.wires.size(); ++w) {
    const Wire& wire = net.wires[w];
    if (wire.delayed) {
      wire_now[w] = st.buffers[w];
      if (wire.src_inst < 0) next_buffers[w] = valuation_get(inputs, wire.src_port);
    } else if (wire.src_inst < 0) {
      wire_now[w] = valuation_get(inputs, wire.src_port);
    }
  }

  EvalContext proto;
  proto.sig = &v_.sig;
  proto.fuel = opt.fuel;
  proto.max_depth = opt.max_depth;
  proto.observer = opt.observer;

  for (int i : order_) {
    const Component& comp = *net.instances[i].comp;
    const Efsm& efsm = *comp.efsm;
    auto& cs = st.comps[i];

    Valuation port_in;
    for (const auto& ip : in_ports_[i])
      port_in[ip.name] = ip.wire >= 0 ? wire_now[ip.wire] : Value::absent();

    Env env;
    for (size_t l = 0; l < efsm.locals.size(); ++l)
      env.push(efsm.locals[l].name, cs.locals[l]);

    std::vector<Enabled> fires = enabled(comp, efsm.states[cs.control], env, port_in, proto);

    Valuation port_out;  // declared out-ports missing => Absent
    if (!fires.empty()) {
      size_t pick = 0;
      if (fires.size() > 1) {
        if (opt.mode == StepMode::Strict) {
          std::ostringstream os;
          os << net.instances[i].path << " in state " << efsm.states[cs.control] << " on inputs {";
          bool first = true;
          for (const auto& [k, val] : port_in) {
            if (!val.is_absent()) {
              if (!first) os << ", ";
              os << k << "=" << val.term();
              first = false;
            }
          }
          os << "}: transitions";
          for (const auto& f : fires) os << " #" << f.index;
          throw NondeterminismError(os.str());
        }
        pick = static_cast<size_t>(opt.rng->below(fires.size()));
      }
      const Enabled& chosen = fires[pick];
      const Transition& tr = efsm.transitions[chosen.index];
      for (const auto& [name, val] : chosen.binders) env.push(name, val);

      for (const auto& [port, expr] : tr.outputs) {
        EvalContext cx = proto;
        port_out[port] = eval(expr, env, cx);
      }
      // Simultaneous assignment: all right-hand sides see the pre-state.
      std::vector<std::pair<size_t, Value>> updates;
      for (const auto& [local, expr] : tr.assignments) {
        EvalContext cx = proto;
        Value nv = eval(expr, env, cx);
        for (size_t l = 0; l < efsm.locals.size(); ++l)
          if (efsm.locals[l].name == local) updates.emplace_back(l, std::move(nv));
      }
      for (auto& [l, nv] : updates) cs.locals[l] = std::move(nv);
      cs.control = control_index(i, tr.target);
    }
    // No enabled transition: stutter (state unchanged, all outputs Absent).

    for (const auto& op : out_ports_[i]) {
      const Value& v = valuation_get(port_out, op.name);
      for (int w : op.wires) {
        if (net.wires[w].delayed)
          next_buffers[w] = v;
        else
          wire_now[w] = v;
      }
    }
  }

  Valuation out;
  for (size_t o = 0; o < net.outputs.size(); ++o) {
    int w = ext_out_wire_[o];
    out[net.outputs[o].name] = w >= 0 ? wire_now[w] : Value::absent();
  }
  st.buffers = std::move(next_buffers);
  return out;
}

Trace Engine::run(const std::vector<Valuation>& inputs, const StepOptions& opt) const {
  Trace trace;
  trace.reserve(inputs.size());
  SystemState st = initial_state();
  for (size_t tick = 0; tick < inputs.size(); ++tick) {
    // Normalize: record a value for every open in-port so printed traces are
    // total and deterministic.
    Valuation norm;
    for (const auto& p : net_->inputs) norm[p.name] = valuation_get(inputs[tick], p.name);
    try {
      Valuation out = step(st, norm, opt);
      trace.push_back({std::move(norm), st, std::move(out)});
    } catch (const MbtError& e) {
      throw MbtError("tick " + std::to_string(tick + 1) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace mbt

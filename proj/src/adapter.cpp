#include "mbt/adapter.hpp"

#include <algorithm>

#include <json.hpp>

#include "mbt/dsl.hpp"
#include "mbt/eval.hpp"

namespace mbt::sut {

namespace {
const InputRule kIdentityIn{};
const OutputRule kIdentityOut{};
}  // namespace

const InputRule* AdapterSpec::input_rule(const std::string& ch) const {
  auto it = inputs.find(ch);
  return it == inputs.end() ? nullptr : &it->second;
}

const OutputRule* AdapterSpec::output_rule(const std::string& ch) const {
  auto it = outputs.find(ch);
  return it == outputs.end() ? nullptr : &it->second;
}

std::vector<Valuation> concretize_step(const AdapterSpec& a, const Valuation& abstract_inputs) {
  std::vector<Valuation> ticks(1);
  auto put = [&ticks](size_t k, const std::string& ch, const Value& v) {
    if (ticks.size() <= k) ticks.resize(k + 1);
    if (!v.is_absent()) ticks[k][ch] = v;
  };
  for (const auto& [ch, v] : abstract_inputs) {
    if (v.is_absent()) continue;
    const InputRule* r = a.input_rule(ch);
    if (!r) r = &kIdentityIn;
    const std::string& target = r->to.empty() ? ch : r->to;
    switch (r->kind) {
      case InputRule::Kind::Identity:
        put(0, target, v);
        break;
      case InputRule::Kind::Substitute: {
        auto it = r->subst.find(v);
        if (it != r->subst.end())
          put(0, target, it->second);
        else if (r->pass_unmapped)
          put(0, target, v);
        else
          throw UncoveredValue(ch, v);
        break;
      }
      case InputRule::Kind::Expand: {
        auto it = r->expand.find(v);
        if (it != r->expand.end()) {
          for (size_t k = 0; k < it->second.size(); ++k) put(k, target, it->second[k]);
          if (ticks.size() < it->second.size()) ticks.resize(it->second.size());
        } else if (r->pass_unmapped) {
          put(0, target, v);
        } else {
          throw UncoveredValue(ch, v);
        }
        break;
      }
    }
  }
  return ticks;
}

namespace {

Value collapse(const OutputRule& r, const std::string& concrete_ch, const Value& v) {
  if (v.is_absent()) return v;
  auto it = r.classes.find(v);
  if (it != r.classes.end()) return it->second;
  if (r.pass_unmapped) return v;
  throw UncoveredValue(concrete_ch, v);
}

// A right-nested chain of one two-argument constructor reads as a list; a
// trailing zero-argument constructor is its terminator. Anything else is a
// single element, and Absent contributes nothing.
void flatten_list(const Value& v, std::vector<Value>& out) {
  if (v.is_absent()) return;
  const Value* cur = &v;
  if (cur->kind() == Value::Kind::Con && cur->con_args().size() == 2) {
    const std::string& head = cur->con_name();
    while (cur->kind() == Value::Kind::Con && cur->con_name() == head &&
           cur->con_args().size() == 2) {
      out.push_back(cur->con_args()[0]);
      cur = &cur->con_args()[1];
    }
  }
  if (cur->kind() == Value::Kind::Con && cur->con_args().empty() && cur != &v) return;
  out.push_back(*cur);
}

}  // namespace

Valuation abstract_window(const AdapterSpec& a, const std::vector<Valuation>& window,
                          const std::vector<std::string>& abstract_channels,
                          const Signature& sig, long long fuel) {
  Valuation out;
  for (const auto& ch : abstract_channels) {
    const OutputRule* r = a.output_rule(ch);
    if (!r) r = &kIdentityOut;
    const std::string& source = r->from.empty() ? ch : r->from;
    std::vector<Value> seen;
    for (const auto& tick : window) {
      Value v = collapse(*r, source, valuation_get(tick, source));
      if (!v.is_absent()) seen.push_back(std::move(v));
    }
    if (seen.empty()) continue;
    Value acc = seen[0];
    if (seen.size() > 1) {
      if (r->merge.empty()) throw MergeOverflow(ch, seen.size());
      Env env;
      for (size_t i = 1; i < seen.size(); ++i) {
        EvalContext cx;
        cx.sig = &sig;
        cx.fuel = fuel;
        auto call = make_expr(Expr::Call{r->merge, {expr_lit(acc), expr_lit(seen[i])}});
        acc = eval(call, env, cx);
      }
    }
    out[ch] = std::move(acc);
  }
  return out;
}

bool compare_values(const OutputRule& rule, const Value& expected, const Value& actual) {
  switch (rule.compare) {
    case ComparePolicy::Exact:
      return expected == actual;
    case ComparePolicy::ListAsMultiset: {
      std::vector<Value> xs, ys;
      flatten_list(expected, xs);
      flatten_list(actual, ys);
      std::sort(xs.begin(), xs.end());
      std::sort(ys.begin(), ys.end());
      return xs == ys;
    }
    case ComparePolicy::ExceptionOnly: {
      auto is_error = [&rule](const Value& v) {
        return v.kind() == Value::Kind::Con &&
               std::find(rule.error_heads.begin(), rule.error_heads.end(), v.con_name()) !=
                   rule.error_heads.end();
      };
      return is_error(expected) == is_error(actual);
    }
  }
  return false;
}

}  // namespace mbt::sut

namespace mbt::dsl {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& pointer, const std::string& why) {
  throw SchemaError(pointer, why);
}

Value term_at(const Json& j, const std::string& pointer) {
  if (!j.is_string()) bad(pointer, "expected a term string");
  try {
    return parse_term(j.get<std::string>());
  } catch (const ParseError& e) {
    bad(pointer, e.what());
  }
}

bool unmapped_passes(const Json& j, const std::string& pointer, bool dflt) {
  if (!j.contains("unmapped")) return dflt;
  const Json& u = j.at("unmapped");
  if (u.is_string() && u.get<std::string>() == "pass") return true;
  if (u.is_string() && u.get<std::string>() == "error") return false;
  bad(pointer + "/unmapped", "expected \"pass\" or \"error\"");
}

sut::InputRule parse_input_rule(const Json& j, const std::string& pointer) {
  if (!j.is_object()) bad(pointer, "expected a rule object");
  sut::InputRule r;
  if (!j.contains("rule")) bad(pointer + "/rule", "missing");
  const Json& kind = j.at("rule");
  std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "identity")
    r.kind = sut::InputRule::Kind::Identity;
  else if (k == "substitute")
    r.kind = sut::InputRule::Kind::Substitute;
  else if (k == "expand")
    r.kind = sut::InputRule::Kind::Expand;
  else
    bad(pointer + "/rule", "expected \"identity\", \"substitute\" or \"expand\"");
  if (j.contains("to")) r.to = j.at("to").get<std::string>();
  r.pass_unmapped = unmapped_passes(j, pointer, false);
  if (r.kind == sut::InputRule::Kind::Identity) return r;
  if (!j.contains("map")) bad(pointer + "/map", "missing");
  const Json& map = j.at("map");
  if (!map.is_object()) bad(pointer + "/map", "expected an object of terms");
  for (const auto& [key, val] : map.items()) {
    std::string kp = pointer + "/map/" + key;
    Value from = term_at(Json(key), kp);
    if (from.is_absent()) bad(kp, "the absent value cannot be mapped");
    if (r.kind == sut::InputRule::Kind::Substitute) {
      r.subst[from] = term_at(val, kp);
    } else {
      if (!val.is_array() || val.empty()) bad(kp, "expected a non-empty array of terms");
      std::vector<Value> seq;
      for (size_t i = 0; i < val.size(); ++i)
        seq.push_back(term_at(val[i], kp + "/" + std::to_string(i)));
      r.expand[from] = std::move(seq);
    }
  }
  return r;
}

sut::OutputRule parse_output_rule(const Json& j, const std::string& pointer) {
  if (!j.is_object()) bad(pointer, "expected a rule object");
  sut::OutputRule r;
  if (j.contains("from")) r.from = j.at("from").get<std::string>();
  r.pass_unmapped = unmapped_passes(j, pointer, true);
  if (j.contains("classes")) {
    const Json& classes = j.at("classes");
    if (!classes.is_object()) bad(pointer + "/classes", "expected an object of terms");
    for (const auto& [key, val] : classes.items()) {
      std::string kp = pointer + "/classes/" + key;
      Value from = term_at(Json(key), kp);
      if (from.is_absent()) bad(kp, "the absent value cannot be mapped");
      r.classes[from] = term_at(val, kp);
    }
  }
  if (j.contains("merge")) r.merge = j.at("merge").get<std::string>();
  if (j.contains("compare")) {
    const Json& c = j.at("compare");
    std::string s = c.is_string() ? c.get<std::string>() : "";
    if (s == "exact")
      r.compare = sut::ComparePolicy::Exact;
    else if (s == "listAsMultiset")
      r.compare = sut::ComparePolicy::ListAsMultiset;
    else if (s == "exceptionOnly")
      r.compare = sut::ComparePolicy::ExceptionOnly;
    else
      bad(pointer + "/compare", "expected \"exact\", \"listAsMultiset\" or \"exceptionOnly\"");
  }
  if (j.contains("errorHeads")) {
    const Json& heads = j.at("errorHeads");
    if (!heads.is_array()) bad(pointer + "/errorHeads", "expected an array of constructor names");
    for (size_t i = 0; i < heads.size(); ++i) {
      if (!heads[i].is_string())
        bad(pointer + "/errorHeads/" + std::to_string(i), "expected a constructor name");
      r.error_heads.push_back(heads[i].get<std::string>());
    }
  }
  return r;
}

}  // namespace

sut::AdapterSpec parse_adapter(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad("", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("", "expected an object");
  sut::AdapterSpec a;
  if (doc.contains("inputs")) {
    const Json& ins = doc.at("inputs");
    if (!ins.is_object()) bad("/inputs", "expected an object of rules");
    for (const auto& [ch, rule] : ins.items())
      a.inputs[ch] = parse_input_rule(rule, "/inputs/" + ch);
  }
  if (doc.contains("outputs")) {
    const Json& outs = doc.at("outputs");
    if (!outs.is_object()) bad("/outputs", "expected an object of rules");
    for (const auto& [ch, rule] : outs.items())
      a.outputs[ch] = parse_output_rule(rule, "/outputs/" + ch);
  }
  // Two abstract channels driving one concrete channel would collide.
  std::map<std::string, std::string> targets;
  for (const auto& [ch, rule] : a.inputs) {
    const std::string& target = rule.to.empty() ? ch : rule.to;
    auto [it, fresh] = targets.emplace(target, ch);
    if (!fresh)
      bad("/inputs/" + ch + "/to",
          "concrete channel '" + target + "' is already driven by '" + it->second + "'");
  }
  return a;
}

namespace {

Json dump_input_rule(const sut::InputRule& r) {
  Json j = Json::object();
  switch (r.kind) {
    case sut::InputRule::Kind::Identity: j["rule"] = "identity"; break;
    case sut::InputRule::Kind::Substitute: j["rule"] = "substitute"; break;
    case sut::InputRule::Kind::Expand: j["rule"] = "expand"; break;
  }
  if (!r.to.empty()) j["to"] = r.to;
  if (r.kind == sut::InputRule::Kind::Substitute) {
    Json map = Json::object();
    for (const auto& [from, to] : r.subst) map[from.term()] = to.term();
    j["map"] = std::move(map);
  } else if (r.kind == sut::InputRule::Kind::Expand) {
    Json map = Json::object();
    for (const auto& [from, seq] : r.expand) {
      Json arr = Json::array();
      for (const auto& v : seq) arr.push_back(v.term());
      map[from.term()] = std::move(arr);
    }
    j["map"] = std::move(map);
  }
  if (r.pass_unmapped) j["unmapped"] = "pass";
  return j;
}

Json dump_output_rule(const sut::OutputRule& r) {
  Json j = Json::object();
  if (!r.from.empty()) j["from"] = r.from;
  if (!r.classes.empty()) {
    Json classes = Json::object();
    for (const auto& [from, to] : r.classes) classes[from.term()] = to.term();
    j["classes"] = std::move(classes);
  }
  if (!r.pass_unmapped) j["unmapped"] = "error";
  if (!r.merge.empty()) j["merge"] = r.merge;
  switch (r.compare) {
    case sut::ComparePolicy::Exact: break;
    case sut::ComparePolicy::ListAsMultiset: j["compare"] = "listAsMultiset"; break;
    case sut::ComparePolicy::ExceptionOnly: j["compare"] = "exceptionOnly"; break;
  }
  if (!r.error_heads.empty()) {
    Json heads = Json::array();
    for (const auto& h : r.error_heads) heads.push_back(h);
    j["errorHeads"] = std::move(heads);
  }
  return j;
}

}  // namespace

std::string print_adapter(const sut::AdapterSpec& a) {
  Json doc = Json::object();
  Json ins = Json::object();
  for (const auto& [ch, rule] : a.inputs) ins[ch] = dump_input_rule(rule);
  doc["inputs"] = std::move(ins);
  Json outs = Json::object();
  for (const auto& [ch, rule] : a.outputs) outs[ch] = dump_output_rule(rule);
  doc["outputs"] = std::move(outs);
  return doc.dump(2) + "\n";
}

}  // namespace mbt::dsl

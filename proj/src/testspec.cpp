#include "mbt/testspec.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "mbt/dsl.hpp"
#include "mbt/eval.hpp"

namespace mbt::gen {

Tri tri_not(Tri t) {
  switch (t) {
    case Tri::No: return Tri::Yes;
    case Tri::Yes: return Tri::No;
    default: return Tri::Maybe;
  }
}

Tri tri_and(Tri a, Tri b) { return std::min(a, b); }
Tri tri_or(Tri a, Tri b) { return std::max(a, b); }

Constraint Constraint::occurs(EventPat e, long long mn, long long mx) {
  Constraint c;
  c.kind = Kind::Occurs;
  c.event = std::move(e);
  c.min = mn;
  c.max = mx;
  return c;
}

Constraint Constraint::not_occurs(EventPat e) {
  Constraint c;
  c.kind = Kind::NotOccurs;
  c.event = std::move(e);
  return c;
}

Constraint Constraint::precedes(EventPat first, EventPat then) {
  Constraint c;
  c.kind = Kind::Precedes;
  c.event = std::move(first);
  c.event2 = std::move(then);
  return c;
}

Constraint Constraint::within_steps(EventPat e, long long lo, long long hi) {
  Constraint c;
  c.kind = Kind::WithinSteps;
  c.event = std::move(e);
  c.min = lo;
  c.max = hi;
  return c;
}

Constraint Constraint::all(std::vector<Constraint> children) {
  Constraint c;
  c.kind = Kind::And;
  c.children = std::move(children);
  return c;
}

TestSpec trivial_spec() { return {"trivial", Constraint::all({})}; }

namespace {

void check_event(const EventPat& e, const Net& net, bool inputs_only,
                 const std::string& spec_id) {
  bool is_in = net.find_input(e.channel) >= 0;
  bool is_out = net.find_output(e.channel) >= 0;
  if (!is_in && !is_out)
    throw MbtError("spec '" + spec_id + "': channel '" + e.channel +
                   "' is not an external channel of the model");
  if (inputs_only && !is_in)
    throw MbtError("spec '" + spec_id + "': channel '" + e.channel +
                   "' is not an input channel (sanity specs constrain inputs only)");
  std::vector<std::string> binders;
  e.pattern.collect_binders(binders);
  if (!binders.empty())
    throw MbtError("spec '" + spec_id + "': event patterns must not bind variables ('" +
                   binders.front() + "')");
}

void check_node(const Constraint& c, const Net& net, bool inputs_only,
                const std::string& spec_id) {
  switch (c.kind) {
    case Constraint::Kind::Occurs:
      if (c.min < 0 || c.min > c.max)
        throw MbtError("spec '" + spec_id + "': occurs needs 0 <= min <= max");
      check_event(c.event, net, inputs_only, spec_id);
      break;
    case Constraint::Kind::NotOccurs:
      check_event(c.event, net, inputs_only, spec_id);
      break;
    case Constraint::Kind::Precedes:
      check_event(c.event, net, inputs_only, spec_id);
      check_event(c.event2, net, inputs_only, spec_id);
      break;
    case Constraint::Kind::WithinSteps:
      if (c.min < 1 || c.min > c.max)
        throw MbtError("spec '" + spec_id + "': withinSteps needs 1 <= lo <= hi");
      check_event(c.event, net, inputs_only, spec_id);
      break;
    case Constraint::Kind::And:
      for (const auto& ch : c.children) check_node(ch, net, inputs_only, spec_id);
      break;
  }
}

size_t count_leaves(const Constraint& c) {
  if (c.kind != Constraint::Kind::And) return 1;
  size_t n = 0;
  for (const auto& ch : c.children) n += count_leaves(ch);
  return n;
}

// Does `pattern` match `value` (no binders by construction)?
bool event_matches(const Pattern& p, const Value& v) {
  Env scratch;
  return mbt::match(p, v, scratch).has_value();
}

Tri match3(const EventPat& e, const SymValuation& channels) {
  static const std::vector<Value> kSilent = {Value::absent()};
  auto it = channels.find(e.channel);
  const std::vector<Value>& set = it == channels.end() ? kSilent : it->second;
  if (set.empty()) return Tri::No;
  size_t hits = 0;
  for (const Value& v : set) hits += event_matches(e.pattern, v);
  if (hits == 0) return Tri::No;
  if (hits == set.size()) return Tri::Yes;
  return Tri::Maybe;
}

}  // namespace

void check_spec(const TestSpec& spec, const Net& net, bool inputs_only) {
  check_node(spec.root, net, inputs_only, spec.id);
}

Monitor::Monitor(const TestSpec& spec, int max_len)
    : owned_(std::make_shared<TestSpec>(spec)), max_len_(max_len) {
  spec_root_ = &owned_->root;
  leaves_.resize(count_leaves(*spec_root_));
}

void Monitor::step(const SymValuation& channels) {
  ++tick_;
  size_t leaf = 0;
  step_node(*spec_root_, leaf, channels);
}

void Monitor::step_concrete(const Valuation& inputs, const Valuation& outputs) {
  SymValuation channels;
  for (const auto& [ch, v] : inputs) channels[ch] = {v};
  for (const auto& [ch, v] : outputs) channels[ch] = {v};
  step(channels);
}

void Monitor::step_node(const Constraint& c, size_t& leaf, const SymValuation& channels) {
  switch (c.kind) {
    case Constraint::Kind::Occurs:
    case Constraint::Kind::NotOccurs: {
      Tri m = match3(c.event, channels);
      LeafState& st = leaves_[leaf++];
      if (m == Tri::Yes) ++st.definite;
      if (m != Tri::No) ++st.possible;
      break;
    }
    case Constraint::Kind::Precedes: {
      LeafState& st = leaves_[leaf++];
      Tri m_then = match3(c.event2, channels);
      st.violated = tri_or(st.violated, tri_and(m_then, tri_not(st.seen_first)));
      st.seen_first = tri_or(st.seen_first, match3(c.event, channels));
      break;
    }
    case Constraint::Kind::WithinSteps: {
      LeafState& st = leaves_[leaf++];
      if (tick_ >= c.min && tick_ <= c.max)
        st.occurred = tri_or(st.occurred, match3(c.event, channels));
      break;
    }
    case Constraint::Kind::And:
      for (const auto& ch : c.children) step_node(ch, leaf, channels);
      break;
  }
}

Tri Monitor::status() const {
  size_t leaf = 0;
  return status_node(*spec_root_, leaf);
}

Tri Monitor::status_node(const Constraint& c, size_t& leaf) const {
  switch (c.kind) {
    case Constraint::Kind::Occurs:
    case Constraint::Kind::NotOccurs: {
      const LeafState& st = leaves_[leaf++];
      long long mn = c.kind == Constraint::Kind::Occurs ? c.min : 0;
      long long mx = c.kind == Constraint::Kind::Occurs ? c.max : 0;
      if (st.definite > mx || st.possible < mn) return Tri::No;
      if (st.definite >= mn && st.possible <= mx) return Tri::Yes;
      return Tri::Maybe;
    }
    case Constraint::Kind::Precedes:
      return tri_not(leaves_[leaf++].violated);
    case Constraint::Kind::WithinSteps:
      return leaves_[leaf++].occurred;
    case Constraint::Kind::And: {
      Tri out = Tri::Yes;
      for (const auto& ch : c.children) out = tri_and(out, status_node(ch, leaf));
      return out;
    }
  }
  return Tri::No;
}

bool Monitor::dead() const {
  size_t leaf = 0;
  return dead_node(*spec_root_, leaf);
}

bool Monitor::dead_node(const Constraint& c, size_t& leaf) const {
  long long remaining = max_len_ - tick_;
  switch (c.kind) {
    case Constraint::Kind::Occurs:
    case Constraint::Kind::NotOccurs: {
      const LeafState& st = leaves_[leaf++];
      long long mn = c.kind == Constraint::Kind::Occurs ? c.min : 0;
      long long mx = c.kind == Constraint::Kind::Occurs ? c.max : 0;
      return st.definite > mx || st.possible + remaining < mn;
    }
    case Constraint::Kind::Precedes:
      return leaves_[leaf++].violated == Tri::Yes;
    case Constraint::Kind::WithinSteps: {
      const LeafState& st = leaves_[leaf++];
      if (st.occurred != Tri::No) return false;
      long long first_free = std::max(c.min, static_cast<long long>(tick_) + 1);
      long long last = std::min(c.max, static_cast<long long>(max_len_));
      return first_free > last;
    }
    case Constraint::Kind::And: {
      bool any = false;
      for (const auto& ch : c.children) any = dead_node(ch, leaf) || any;
      return any;
    }
  }
  return false;
}

}  // namespace mbt::gen

namespace mbt::dsl {

namespace {

using Json = nlohmann::ordered_json;

gen::EventPat event_from_json(const Json& j, const std::string& pointer) {
  if (!j.is_object() || !j.contains("channel") || !j.contains("pattern"))
    throw SchemaError(pointer, "expected {channel, pattern}");
  gen::EventPat e;
  e.channel = j.at("channel").get<std::string>();
  try {
    e.pattern = parse_pattern(j.at("pattern").get<std::string>());
  } catch (const ParseError& err) {
    throw SchemaError(pointer + "/pattern", err.what());
  }
  return e;
}

Json event_to_json(const gen::EventPat& e) {
  Json j;
  j["channel"] = e.channel;
  j["pattern"] = print_pattern(e.pattern);
  return j;
}

const Json& field(const Json& j, const char* key, const std::string& pointer) {
  if (!j.contains(key)) throw SchemaError(pointer + "/" + key, "missing");
  return j.at(key);
}

gen::Constraint constraint_from_json(const Json& j, const std::string& pointer) {
  if (!j.is_object() || !j.contains("kind")) throw SchemaError(pointer, "expected {kind, ...}");
  std::string kind = j.at("kind").get<std::string>();
  using C = gen::Constraint;
  if (kind == "occurs")
    return C::occurs(event_from_json(field(j, "event", pointer), pointer + "/event"),
                     field(j, "min", pointer).get<long long>(),
                     field(j, "max", pointer).get<long long>());
  if (kind == "notOccurs")
    return C::not_occurs(event_from_json(field(j, "event", pointer), pointer + "/event"));
  if (kind == "precedes")
    return C::precedes(event_from_json(field(j, "first", pointer), pointer + "/first"),
                       event_from_json(field(j, "then", pointer), pointer + "/then"));
  if (kind == "withinSteps")
    return C::within_steps(event_from_json(field(j, "event", pointer), pointer + "/event"),
                           field(j, "lo", pointer).get<long long>(),
                           field(j, "hi", pointer).get<long long>());
  if (kind == "and") {
    std::vector<C> children;
    const Json& items = j.contains("items") ? j.at("items") : Json::array();
    if (!items.is_array()) throw SchemaError(pointer + "/items", "expected an array");
    for (size_t i = 0; i < items.size(); ++i)
      children.push_back(
          constraint_from_json(items[i], pointer + "/items/" + std::to_string(i)));
    return C::all(std::move(children));
  }
  throw SchemaError(pointer + "/kind", "unknown constraint kind '" + kind + "'");
}

Json constraint_to_json(const gen::Constraint& c) {
  using K = gen::Constraint::Kind;
  Json j;
  switch (c.kind) {
    case K::Occurs:
      j["kind"] = "occurs";
      j["event"] = event_to_json(c.event);
      j["min"] = c.min;
      j["max"] = c.max;
      break;
    case K::NotOccurs:
      j["kind"] = "notOccurs";
      j["event"] = event_to_json(c.event);
      break;
    case K::Precedes:
      j["kind"] = "precedes";
      j["first"] = event_to_json(c.event);
      j["then"] = event_to_json(c.event2);
      break;
    case K::WithinSteps:
      j["kind"] = "withinSteps";
      j["event"] = event_to_json(c.event);
      j["lo"] = c.min;
      j["hi"] = c.max;
      break;
    case K::And: {
      j["kind"] = "and";
      Json items = Json::array();
      for (const auto& ch : c.children) items.push_back(constraint_to_json(ch));
      j["items"] = std::move(items);
      break;
    }
  }
  return j;
}

}  // namespace

namespace {

gen::TestSpec spec_from_json(const Json& doc, const std::string& pointer) {
  if (!doc.is_object() || !doc.contains("id") || !doc.contains("constraint"))
    throw SchemaError(pointer, "expected {id, constraint}");
  gen::TestSpec s;
  s.id = doc.at("id").get<std::string>();
  s.root = constraint_from_json(doc.at("constraint"), pointer + "/constraint");
  return s;
}

Json parse_json_or_schema_error(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("not valid JSON: ") + e.what());
  }
}

}  // namespace

gen::TestSpec parse_spec(const std::string& text) {
  return spec_from_json(parse_json_or_schema_error(text), "");
}

std::vector<gen::TestSpec> parse_specs(const std::string& text) {
  Json doc = parse_json_or_schema_error(text);
  std::vector<gen::TestSpec> out;
  if (doc.is_object()) {
    out.push_back(spec_from_json(doc, ""));
    return out;
  }
  if (!doc.is_array()) throw SchemaError("", "expected a spec object or an array of them");
  std::set<std::string> ids;
  for (size_t i = 0; i < doc.size(); ++i) {
    const std::string pointer = "/" + std::to_string(i);
    out.push_back(spec_from_json(doc[i], pointer));
    if (!ids.insert(out.back().id).second)
      throw SchemaError(pointer + "/id", "duplicate spec id '" + out.back().id + "'");
  }
  return out;
}

std::string print_spec(const gen::TestSpec& s) {
  Json doc;
  doc["id"] = s.id;
  doc["constraint"] = constraint_to_json(s.root);
  return doc.dump(2) + "\n";
}

}  // namespace mbt::dsl

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>

#include "mbt/dsl.hpp"
#include "mbt/generate.hpp"
#include "mbt/validate.hpp"

using namespace mbt;
using namespace mbt::gen;

namespace {

struct Fixture {
  Model model;
  Validated v;
  explicit Fixture(const std::string& text) : model(dsl::parse_model(text)), v(validate(model)) {
    REQUIRE(v.ok());
  }
};

// Constructor-dispatched two-state switch: transitions split the input
// universe cleanly, so symbolic input sets stay exact per branch.
const char* kSwitch = R"(
type Msg = SwitchOn | SwitchOff

component Toy {
  ports {
    in cmd : Msg
    out ack : Msg
  }
  efsm {
    states Off, On
    init Off
    trans Off -> On when cmd = SwitchOn then ack = SwitchOn
    trans On -> Off when cmd = SwitchOff then ack = SwitchOff
  }
}
)";

// Unary input alphabet: every symbolic branch carries a singleton input set.
const char* kOneShot = R"(
type Unit = U

component OneShot {
  ports {
    in go : Unit
    out done : Unit
  }
  efsm {
    states A, B
    init A
    trans A -> B when go = U then done = U
    trans B -> A
  }
}
)";

// A guarded loop over an Int local; the trigger accepts any present value.
const char* kGuarded = R"(
component G {
  ports {
    in p : Bool
    out q : Int
  }
  efsm {
    states S
    init S
    local x : Int := 0
    trans S -> S when p = _ if x > 0 then q = x
  }
}
)";

// A store of items dumped page by page after a query; exercises postambles.
const char* kRegistry = R"(
type Item = IA | IB
type List = Nil | Cons(Item, List)
type Req = Add(Item) | Query
type Resp = Page(Item) | Done

fun isCons(l : List) : Bool = case l of { Nil -> false; Cons(h, t) -> true }
fun isNil(l : List) : Bool = case l of { Nil -> true; Cons(h, t) -> false }
fun head(l : List) : Item = case l of { Cons(h, t) -> h; Nil -> IA }
fun tail(l : List) : List = case l of { Cons(h, t) -> t; Nil -> Nil }

component Reg {
  ports {
    in req : Req
    out resp : Resp
  }
  efsm {
    states Idle, Dump
    init Idle
    local items : List := Nil
    local rest : List := Nil
    trans Idle -> Idle when req = Add(x) set items := Cons(x, items)
    trans Idle -> Dump when req = Query set rest := items
    trans Dump -> Dump if isCons(rest) then resp = Page(head(rest)) set rest := tail(rest)
    trans Dump -> Idle if isNil(rest) then resp = Done
  }
}
)";

SymVal ints(std::vector<long long> xs) {
  std::vector<Value> vs;
  for (long long x : xs) vs.push_back(Value::integer(x));
  return SymVal::from(vs);
}

SymState one_local_state(const SymVal& x) {
  SymState st;
  st.comps.push_back({0, {x}});
  return st;
}

EventPat ev(const std::string& ch, const std::string& pattern_text) {
  return {ch, dsl::parse_pattern(pattern_text)};
}

// Independent path counter: walks SymEngine successors directly, without the
// explorer's store, monitor, or randomization.
size_t count_paths(const SymEngine& se, const SymState& st, int depth) {
  if (depth == 0) return 0;
  size_t n = 0;
  for (const SymSucc& s : se.successors(st)) n += 1 + count_paths(se, s.state, depth - 1);
  return n;
}

int concrete_length(const TestCase& tc) { return static_cast<int>(tc.steps.size()); }

// Replays the case body against a spec with the concrete monitor.
bool body_satisfies(const TestSpec& spec, const TestCase& tc) {
  Monitor mon(spec, tc.length);
  for (int i = 0; i < tc.length; ++i) mon.step_concrete(tc.steps[i].inputs, tc.steps[i].expected);
  return mon.status() == Tri::Yes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Value universes
// ---------------------------------------------------------------------------

TEST_CASE("universe: builtins and channel sets") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});

  const auto& bools = tab.of(TypeRef::builtin_bool());
  REQUIRE(bools.size() == 2);
  CHECK(bools[0] == Value::boolean(false));
  CHECK(bools[1] == Value::boolean(true));

  // Int is clipped to the configured range, default [-3, 3].
  const auto& is = tab.of(TypeRef::builtin_int());
  REQUIRE(is.size() == 7);
  CHECK(is.front() == Value::integer(-3));
  CHECK(is.back() == Value::integer(3));

  // Channel sets put Absent in front of the value universe.
  const auto& ch = tab.channel(TypeRef::named("Msg"));
  REQUIRE(ch.size() == 3);
  CHECK(ch[0].is_absent());
  CHECK(ch[1] == Value::con("SwitchOff"));
  CHECK(ch[2] == Value::con("SwitchOn"));
}

TEST_CASE("universe: depth bound matches hand counts for recursive types") {
  Fixture f(kRegistry);
  // |Item| = 2 at every depth >= 1.
  // |List| at depth d: L(1) = 1 (Nil), L(d) = 1 + 2 * L(d-1)  -> 1, 3, 7, 15.
  for (int depth = 1; depth <= 4; ++depth) {
    UniverseConfig cfg;
    cfg.depth = depth;
    UniverseTable tab(f.v.sig, cfg);
    CHECK(tab.of(TypeRef::named("Item")).size() == 2);
    size_t expect = 0;
    for (int d = 1; d <= depth; ++d) expect = 1 + 2 * expect;
    CHECK(tab.of(TypeRef::named("List")).size() == expect);
  }

  // Every universe is sorted and duplicate-free.
  UniverseTable tab(f.v.sig, {});
  const auto& lists = tab.of(TypeRef::named("List"));
  for (size_t i = 1; i < lists.size(); ++i) CHECK(Value::compare(lists[i - 1], lists[i]) < 0);
}

TEST_CASE("universe: uninhabited type and size blowups are hard errors") {
  Model m = dsl::parse_model(R"(
type Void = Wrap(Void)

component C {
  ports { in i : Bool }
  efsm { states S; init S }
}
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  CHECK_THROWS_AS(UniverseTable(v.sig, {}), UniverseExhausted);

  Fixture reg(kRegistry);
  UniverseConfig tight;
  tight.max_size = 4;  // |List| at depth 3 is 7
  CHECK_THROWS_AS(UniverseTable(reg.v.sig, tight), MbtError);
}

// ---------------------------------------------------------------------------
// SymVal and the subsumption store
// ---------------------------------------------------------------------------

TEST_CASE("symval: construction, dedup, subset") {
  SymVal a = SymVal::from({Value::integer(2), Value::integer(1), Value::integer(2)});
  REQUIRE(a.size() == 2);
  CHECK(a.vals[0] == Value::integer(1));
  CHECK(a.contains(Value::integer(2)));
  CHECK(!a.contains(Value::integer(3)));

  SymVal b = ints({1, 2, 3});
  CHECK(a.subset_of(b));
  CHECK(!b.subset_of(a));
  CHECK(a.subset_of(a));

  a.insert(Value::integer(3));
  CHECK(a == b);
}

TEST_CASE("state store: pointwise-inclusion subsumption") {
  const int rem = 5;

  // Stored {1,2} covers a revisit carrying {1}.
  StateStore s1;
  CHECK(!s1.subsumed_or_insert(one_local_state(ints({1, 2})), rem));
  CHECK(s1.subsumed_or_insert(one_local_state(ints({1})), rem));
  CHECK(s1.size() == 1);

  // {1,3} is not contained in {1,2}: explored and inserted.
  StateStore s2;
  CHECK(!s2.subsumed_or_insert(one_local_state(ints({1, 2})), rem));
  CHECK(!s2.subsumed_or_insert(one_local_state(ints({1, 3})), rem));
  CHECK(s2.size() == 2);
  // Surviving entries keep their data across the insert's compaction pass: a
  // fresh set covered by neither stored entry must still be explored.
  CHECK(!s2.subsumed_or_insert(one_local_state(ints({7, 9})), rem));
  CHECK(s2.subsumed_or_insert(one_local_state(ints({1, 2})), rem));
  CHECK(s2.subsumed_or_insert(one_local_state(ints({1, 3})), rem));

  // A wider newcomer evicts the stored {1}.
  StateStore s3;
  CHECK(!s3.subsumed_or_insert(one_local_state(ints({1})), rem));
  CHECK(!s3.subsumed_or_insert(one_local_state(ints({1, 2})), rem));
  CHECK(s3.size() == 1);
  CHECK(s3.subsumed_or_insert(one_local_state(ints({1})), rem));

  // Different control vectors never interact.
  StateStore s4;
  SymState other = one_local_state(ints({1, 2}));
  other.comps[0].control = 1;
  CHECK(!s4.subsumed_or_insert(one_local_state(ints({1, 2})), rem));
  CHECK(!s4.subsumed_or_insert(other, rem));
  CHECK(s4.size() == 2);
}

TEST_CASE("state store: a cover with less remaining budget must not prune") {
  // Under a depth bound, reaching the same set-state with MORE budget left
  // can still discover longer suffixes; plain inclusion would lose them.
  StateStore s;
  CHECK(!s.subsumed_or_insert(one_local_state(ints({1})), 2));
  CHECK(!s.subsumed_or_insert(one_local_state(ints({1})), 5));  // more budget: explore
  CHECK(s.size() == 1);  // and the stale entry was evicted
  CHECK(s.subsumed_or_insert(one_local_state(ints({1})), 5));
  CHECK(s.subsumed_or_insert(one_local_state(ints({1})), 3));  // less budget: pruned
}

// ---------------------------------------------------------------------------
// Symbolic stepping
// ---------------------------------------------------------------------------

TEST_CASE("symbolic step: constructor dispatch splits the input universe") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  SymState init = se.initial();
  REQUIRE(init.comps.size() == 1);
  CHECK(init.comps[0].control == 0);

  std::vector<SymSucc> succ = se.successors(init);
  REQUIRE(succ.size() == 2);  // fire Off->On, stutter

  const SymSucc& fire = succ[0];
  CHECK(fire.choices == std::vector<int>{0});
  CHECK(fire.state.comps[0].control == 1);
  CHECK(fire.ext_inputs.at("cmd") == SymVal::single(Value::con("SwitchOn")));
  CHECK(fire.ext_outputs.at("ack") == SymVal::single(Value::con("SwitchOn")));

  const SymSucc& stay = succ[1];
  CHECK(stay.choices == std::vector<int>{-1});
  CHECK(stay.state.comps[0].control == 0);
  CHECK(stay.ext_inputs.at("cmd") ==
        SymVal::from({Value::absent(), Value::con("SwitchOff")}));
  CHECK(stay.ext_outputs.at("ack") == SymVal::single(Value::absent()));

  // sym_step is the same tick in free-function form.
  CHECK(sym_step(se, init).size() == 2);
}

TEST_CASE("symbolic step: guards filter local sets elementwise") {
  Fixture f(kGuarded);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  SymState st = se.initial();
  REQUIRE(st.comps[0].locals.size() == 1);
  CHECK(st.comps[0].locals[0] == ints({0}));  // initializer, evaluated
  st.comps[0].locals[0] = ints({-1, 0, 2});

  std::vector<SymSucc> succ = se.successors(st);
  REQUIRE(succ.size() == 2);

  // Firing keeps exactly the tuples that enable the transition: x must pass
  // the guard, p must be present (the wildcard never matches silence).
  const SymSucc& fire = succ[0];
  CHECK(fire.choices == std::vector<int>{0});
  CHECK(fire.state.comps[0].locals[0] == ints({2}));
  CHECK(fire.ext_inputs.at("p") ==
        SymVal::from({Value::boolean(false), Value::boolean(true)}));
  CHECK(fire.ext_outputs.at("q") == ints({2}));

  // The stutter branch keeps every tuple that enables nothing; projections
  // may overlap the firing branch (x = 2 survives via a silent p).
  const SymSucc& stay = succ[1];
  CHECK(stay.choices == std::vector<int>{-1});
  CHECK(stay.state.comps[0].locals[0] == ints({-1, 0, 2}));
  CHECK(stay.ext_inputs.at("p").contains(Value::absent()));
  CHECK(stay.ext_outputs.at("q") == SymVal::single(Value::absent()));
}

TEST_CASE("symbolic step: an empty filtered set drops the branch") {
  Fixture f(kGuarded);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  SymState st = se.initial();
  st.comps[0].locals[0] = ints({-1, 0});  // guard x > 0 can never pass

  std::vector<SymSucc> succ = se.successors(st);
  REQUIRE(succ.size() == 1);
  CHECK(succ[0].choices == std::vector<int>{-1});
}

TEST_CASE("symbolic step: delayed buffers carry sets one tick") {
  Fixture f(R"(
component Relay {
  ports { in i : Int; out o : Int }
  efsm { states S; init S; trans S -> S when i = x then o = x }
}
component Sys {
  ports { in ext : Int; out res : Int }
  sub r : Relay
  channels {
    inw : ext -> r.i delayed
    outw : r.o -> res
  }
}
root Sys
)");
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  // Tick 1: the buffer holds only silence, so the relay cannot fire; the
  // whole input channel universe flows into the buffer for the next tick.
  // Buffer slots exist per wire; only the delayed wire (declared first) is
  // ever non-silent.
  SymState init = se.initial();
  REQUIRE(init.buffers.size() == 2);
  CHECK(init.buffers[0] == SymVal::single(Value::absent()));

  std::vector<SymSucc> first = se.successors(init);
  REQUIRE(first.size() == 1);
  CHECK(first[0].choices == std::vector<int>{-1});
  CHECK(first[0].state.buffers[0].size() == 8);  // Absent + [-3, 3]
  CHECK(first[0].state.buffers[1] == SymVal::single(Value::absent()));
  CHECK(first[0].ext_inputs.at("ext").size() == 8);
  CHECK(first[0].ext_outputs.at("res") == SymVal::single(Value::absent()));

  // Tick 2: the buffered set reaches the relay; firing forwards the present
  // values to the instantaneous output wire.
  std::vector<SymSucc> second = se.successors(first[0].state);
  REQUIRE(second.size() == 2);
  CHECK(second[0].choices == std::vector<int>{0});
  CHECK(second[0].ext_outputs.at("res") ==
        ints({-3, -2, -1, 0, 1, 2, 3}));
  CHECK(second[1].choices == std::vector<int>{-1});
  CHECK(second[1].ext_outputs.at("res") == SymVal::single(Value::absent()));
}

// ---------------------------------------------------------------------------
// Monitors: independent counting oracles over enumerated traces
// ---------------------------------------------------------------------------

TEST_CASE("tri-valued algebra") {
  CHECK(tri_not(Tri::Yes) == Tri::No);
  CHECK(tri_not(Tri::No) == Tri::Yes);
  CHECK(tri_not(Tri::Maybe) == Tri::Maybe);
  CHECK(tri_and(Tri::Yes, Tri::Maybe) == Tri::Maybe);
  CHECK(tri_and(Tri::No, Tri::Maybe) == Tri::No);
  CHECK(tri_or(Tri::No, Tri::Maybe) == Tri::Maybe);
  CHECK(tri_or(Tri::Yes, Tri::Maybe) == Tri::Yes);
}

TEST_CASE("monitor: occurs verdicts equal direct counting on all length-4 traces") {
  // Alphabet per tick: silence, Hit, Miss. 81 concrete traces of length 4.
  std::vector<Value> alphabet = {Value::absent(), Value::con("Hit"), Value::con("Miss")};
  TestSpec spec12{"s", Constraint::occurs(ev("c", "Hit"), 1, 2)};
  TestSpec spec00{"s", Constraint::occurs(ev("c", "Hit"), 0, 0)};
  TestSpec spec24{"s", Constraint::occurs(ev("c", "Hit"), 2, 4)};
  TestSpec spec13{"s", Constraint::occurs(ev("c", "Hit"), 1, 3)};

  int sat12 = 0, sat13 = 0;
  for (int code = 0; code < 81; ++code) {
    int rest = code;
    std::vector<Value> trace;
    int hits = 0;
    for (int t = 0; t < 4; ++t) {
      trace.push_back(alphabet[rest % 3]);
      rest /= 3;
      if (trace.back() == Value::con("Hit")) ++hits;
    }
    auto verdict = [&](const TestSpec& s) {
      Monitor m(s, 4);
      for (const Value& v : trace) {
        Valuation tick;
        if (!v.is_absent()) tick["c"] = v;
        m.step_concrete(tick, {});
      }
      return m.status();
    };
    CHECK(verdict(spec12) == ((hits >= 1 && hits <= 2) ? Tri::Yes : Tri::No));
    CHECK(verdict(spec00) == (hits == 0 ? Tri::Yes : Tri::No));
    CHECK(verdict(spec24) == (hits >= 2 ? Tri::Yes : Tri::No));
    if (verdict(spec12) == Tri::Yes) ++sat12;
    if (verdict(spec13) == Tri::Yes) ++sat13;
  }
  // Widening the count window never shrinks the satisfied set.
  CHECK(sat12 <= sat13);
  // Non-hit positions pick one of two letters: C(4,1)*2^3 + C(4,2)*2^2 = 56,
  // plus C(4,3)*2 = 8 more traces once three hits are allowed.
  CHECK(sat12 == 56);
  CHECK(sat13 == 64);
}

TEST_CASE("monitor: precedes is strict and vacuously true without the trigger") {
  // Two channels, each silent or carrying its marker: 4^3 = 64 traces.
  for (int code = 0; code < 64; ++code) {
    int rest = code;
    std::vector<std::pair<bool, bool>> trace;  // (A on tick, B on tick)
    for (int t = 0; t < 3; ++t) {
      trace.push_back({(rest & 1) != 0, (rest & 2) != 0});
      rest >>= 2;
    }

    bool violated = false;  // direct oracle: any B without a strictly earlier A
    bool seen_a = false;
    for (const auto& [a, b] : trace) {
      if (b && !seen_a) violated = true;
      if (a) seen_a = true;  // after the check: same-tick A does not rescue B
    }

    TestSpec spec{"p", Constraint::precedes(ev("ca", "A"), ev("cb", "B"))};
    Monitor m(spec, 3);
    for (const auto& [a, b] : trace) {
      Valuation tick;
      if (a) tick["ca"] = Value::con("A");
      if (b) tick["cb"] = Value::con("B");
      m.step_concrete(tick, {});
    }
    CHECK(m.status() == (violated ? Tri::No : Tri::Yes));
  }
}

TEST_CASE("monitor: withinSteps window, horizon-aware dead()") {
  TestSpec spec{"w", Constraint::within_steps(ev("c", "Hit"), 2, 3)};

  // A hit on tick 1 is outside [2,3]; once tick 3 passes empty, no extension
  // within the horizon can help.
  Monitor m(spec, 5);
  m.step_concrete({{"c", Value::con("Hit")}}, {});
  CHECK(m.status() == Tri::No);
  CHECK(!m.dead());  // ticks 2 and 3 are still ahead
  m.step_concrete({}, {});
  m.step_concrete({}, {});
  CHECK(m.status() == Tri::No);
  CHECK(m.dead());

  // A hit inside the window settles the verdict for good.
  Monitor y(spec, 5);
  y.step_concrete({}, {});
  y.step_concrete({{"c", Value::con("Hit")}}, {});
  CHECK(y.status() == Tri::Yes);
  y.step_concrete({}, {});
  CHECK(y.status() == Tri::Yes);
  CHECK(!y.dead());
}

TEST_CASE("monitor: occurs is horizon-aware too") {
  TestSpec spec{"o", Constraint::occurs(ev("c", "Hit"), 3, 9)};
  Monitor m(spec, 4);
  m.step_concrete({}, {});
  m.step_concrete({}, {});
  // Two ticks remain; even hitting both cannot reach three occurrences.
  CHECK(m.dead());

  Monitor n(spec, 5);
  n.step_concrete({}, {});
  n.step_concrete({}, {});
  CHECK(!n.dead());
}

TEST_CASE("monitor: set-valued feeds give three-valued verdicts") {
  TestSpec spec{"s", Constraint::occurs(ev("c", "Hit"), 1, 1)};
  Monitor m(spec, 3);

  // The channel may or may not carry Hit this tick.
  m.step({{"c", {Value::con("Hit"), Value::con("Miss")}}});
  CHECK(m.status() == Tri::Maybe);

  // A definite hit follows: count is now at least 1, at most 2.
  m.step({{"c", {Value::con("Hit")}}});
  CHECK(m.status() == Tri::Maybe);  // the maybe-hit may push the count to 2

  Monitor n(spec, 3);
  n.step({{"c", {Value::con("Hit")}}});
  n.step({{"c", {Value::con("Miss"), Value::absent()}}});
  CHECK(n.status() == Tri::Yes);
}

TEST_CASE("monitor: conjunction folds three-valued children") {
  TestSpec spec{"a", Constraint::all({Constraint::occurs(ev("c", "Hit"), 1, 9),
                                      Constraint::not_occurs(ev("c", "Err"))})};
  Monitor m(spec, 3);
  m.step_concrete({{"c", Value::con("Hit")}}, {});
  CHECK(m.status() == Tri::Yes);
  m.step_concrete({{"c", Value::con("Err")}}, {});
  CHECK(m.status() == Tri::No);
  CHECK(m.dead());

  TestSpec empty{"e", Constraint::all({})};
  Monitor e(empty, 2);
  CHECK(e.status() == Tri::Yes);
}

TEST_CASE("spec checks: channels, directions, patterns, windows") {
  Fixture f(kSwitch);
  const Net& net = f.v.net;

  TestSpec ok{"ok", Constraint::occurs(ev("cmd", "SwitchOn"), 1, 2)};
  CHECK_NOTHROW(check_spec(ok, net));

  TestSpec out_ev{"o", Constraint::occurs(ev("ack", "SwitchOn"), 1, 2)};
  CHECK_NOTHROW(check_spec(out_ev, net));
  CHECK_THROWS_AS(check_spec(out_ev, net, /*inputs_only=*/true), MbtError);

  TestSpec unknown{"u", Constraint::occurs(ev("nope", "SwitchOn"), 1, 2)};
  CHECK_THROWS_AS(check_spec(unknown, net), MbtError);

  TestSpec binding{"b", Constraint::occurs({"cmd", dsl::parse_pattern("x")}, 1, 2)};
  CHECK_THROWS_AS(check_spec(binding, net), MbtError);

  TestSpec badwin{"w", Constraint::occurs(ev("cmd", "SwitchOn"), 3, 1)};
  CHECK_THROWS_AS(check_spec(badwin, net), MbtError);

  TestSpec badlo{"l", Constraint::within_steps(ev("cmd", "SwitchOn"), 0, 2)};
  CHECK_THROWS_AS(check_spec(badlo, net), MbtError);
}

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

TEST_CASE("explore: trivial spec emits exactly the bounded path count") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  GenerationConfig cfg;
  cfg.len_min = 1;
  cfg.len_max = 3;
  cfg.use_store = false;
  cfg.max_traces = 100000;
  cfg.max_nodes = 100000;

  ExploreStats stats;
  std::vector<SymTrace> traces = explore_collect(se, nullptr, cfg, 7, &stats);

  size_t brute = count_paths(se, se.initial(), 3);
  CHECK(brute == 14);  // two branches per state: 2 + 4 + 8
  CHECK(traces.size() == brute);
  CHECK(stats.emitted == brute);
  CHECK(stats.nodes == brute + 1);  // plus the root
  CHECK(stats.controls_seen.size() == 2);
  CHECK(!stats.node_budget_hit);
  CHECK(!stats.timed_out);

  // Every emitted trace length lies in the window.
  for (const SymTrace& t : traces) {
    CHECK(t.size() >= 1);
    CHECK(t.size() <= 3);
  }
}

TEST_CASE("explore: the store prunes revisits but keeps every control state") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  GenerationConfig cfg;
  cfg.len_min = 1;
  cfg.len_max = 6;
  cfg.use_store = true;
  cfg.max_traces = 100000;

  ExploreStats stats;
  std::vector<SymTrace> traces = explore_collect(se, nullptr, cfg, 7, &stats);

  CHECK(stats.pruned > 0);
  CHECK(stats.controls_seen.size() == 2);
  CHECK(traces.size() < count_paths(se, se.initial(), 6));
  CHECK(!traces.empty());
}

TEST_CASE("explore: notOccurs cuts matching branches outright") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  TestSpec spec{"quiet", Constraint::not_occurs(ev("cmd", "SwitchOn"))};
  GenerationConfig cfg;
  cfg.len_min = 1;
  cfg.len_max = 4;
  cfg.use_store = false;
  cfg.max_traces = 100000;

  ExploreStats stats;
  std::vector<SymTrace> traces = explore_collect(se, &spec, cfg, 11, &stats);

  REQUIRE(!traces.empty());
  for (const SymTrace& t : traces)
    for (const SymTraceStep& step : t)
      CHECK(!step.inputs.at("cmd").contains(Value::con("SwitchOn")));

  // The walk steps into the On branch, finds the monitor dead, and abandons
  // it without emitting; both controls count as seen.
  CHECK(stats.controls_seen.size() == 2);
}

TEST_CASE("explore: an unsatisfiable conjunction emits nothing") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  TestSpec spec{"contradiction",
                Constraint::all({Constraint::occurs(ev("cmd", "SwitchOn"), 1, 1),
                                 Constraint::not_occurs(ev("cmd", "SwitchOn"))})};
  GenerationConfig cfg;
  cfg.len_min = 1;
  cfg.len_max = 4;
  cfg.use_store = false;

  ExploreStats stats;
  std::vector<SymTrace> traces = explore_collect(se, &spec, cfg, 3, &stats);
  CHECK(traces.empty());
  CHECK(stats.emitted == 0);
}

TEST_CASE("explore: identical seeds give identical traces") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  GenerationConfig cfg;
  cfg.len_min = 2;
  cfg.len_max = 5;
  cfg.max_traces = 64;

  std::vector<SymTrace> a = explore_collect(se, nullptr, cfg, 99);
  std::vector<SymTrace> b = explore_collect(se, nullptr, cfg, 99);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    for (size_t t = 0; t < a[i].size(); ++t) {
      CHECK(a[i][t].choices == b[i][t].choices);
      CHECK(a[i][t].inputs == b[i][t].inputs);
      CHECK(a[i][t].outputs == b[i][t].outputs);
    }
  }
}

TEST_CASE("explore: node budget cuts the walk deterministically") {
  Fixture f(kSwitch);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  GenerationConfig cfg;
  cfg.len_min = 1;
  cfg.len_max = 10;
  cfg.use_store = false;
  cfg.max_nodes = 40;
  cfg.max_traces = 100000;

  ExploreStats s1, s2;
  std::vector<SymTrace> a = explore_collect(se, nullptr, cfg, 5, &s1);
  std::vector<SymTrace> b = explore_collect(se, nullptr, cfg, 5, &s2);
  CHECK(s1.node_budget_hit);
  CHECK(s1.nodes == s2.nodes);
  CHECK(a.size() == b.size());
}

// ---------------------------------------------------------------------------
// Concretization and replay
// ---------------------------------------------------------------------------

TEST_CASE("concretize: singleton sets force a unique case") {
  Fixture f(kOneShot);
  Engine eng(f.model, f.v);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  GenerationConfig cfg;
  cfg.len_min = 3;
  cfg.len_max = 3;
  cfg.use_store = false;
  std::vector<SymTrace> traces = explore_collect(se, nullptr, cfg, 1);
  REQUIRE(!traces.empty());

  for (const SymTrace& t : traces) {
    for (const SymTraceStep& step : t)
      for (const auto& [ch, set] : step.inputs) REQUIRE(set.size() == 1);
    TestCase a = concretize_trace(eng, t, 10);
    TestCase b = concretize_trace(eng, t, 20);
    Generator g;
    g.kind = "A";
    CHECK(dsl::print_suite({0, g, {a}}) == dsl::print_suite({0, g, {b}}));
    CHECK(a.length == 3);
    CHECK(concrete_length(a) == 3);
    CHECK(replays_green(eng, a));
  }
}

TEST_CASE("concretize: seeded picks are reproducible and cover the sets") {
  Fixture f(kSwitch);
  Engine eng(f.model, f.v);
  UniverseTable tab(f.v.sig, {});
  SymEngine se(f.model, f.v, tab);

  GenerationConfig cfg;
  cfg.len_min = 4;
  cfg.len_max = 4;
  cfg.use_store = false;
  std::vector<SymTrace> traces = explore_collect(se, nullptr, cfg, 2);
  REQUIRE(!traces.empty());

  // Find a trace with at least one non-singleton input set (a stutter).
  const SymTrace* wide = nullptr;
  for (const SymTrace& t : traces)
    for (const SymTraceStep& s : t)
      if (s.inputs.at("cmd").size() > 1) wide = &t;
  REQUIRE(wide != nullptr);

  TestCase a1 = concretize_trace(eng, *wide, 42);
  TestCase a2 = concretize_trace(eng, *wide, 42);
  CHECK(input_hash(a1) == input_hash(a2));
  CHECK(replays_green(eng, a1));

  std::set<uint64_t> distinct;
  for (uint64_t s = 0; s < 32; ++s) distinct.insert(input_hash(concretize_trace(eng, *wide, s)));
  CHECK(distinct.size() >= 2);
}

// ---------------------------------------------------------------------------
// Suite generators
// ---------------------------------------------------------------------------

TEST_CASE("generate B: cases satisfy their specs, replay green, dedupe") {
  Fixture f(kSwitch);
  Engine eng(f.model, f.v);

  std::vector<TestSpec> specs = {
      {"TS1", Constraint::occurs(ev("ack", "SwitchOn"), 1, 99)},
      {"TS2", Constraint::within_steps(ev("cmd", "SwitchOff"), 2, 6)},
  };

  GenerateOptions opt;
  opt.config.len_min = 3;
  opt.config.len_max = 6;
  opt.config.seed_count = 4;
  opt.config.per_seed_pick = 2;
  opt.config.max_nodes = 20000;
  opt.config.max_traces = 256;
  // The switch has no data state, so subsumption would collapse the walk to
  // its two-node spanning tree; enumerate freely instead.
  opt.config.use_store = false;

  GenerateOutcome out = generate_B(eng, specs, opt, 1234);
  REQUIRE(!out.suite.cases.empty());
  CHECK(out.suite.generator.kind == "B");
  CHECK(out.suite.model_hash == model_hash(f.model));
  CHECK(out.unsatisfied_specs.empty());

  bool saw1 = false, saw2 = false;
  std::set<uint64_t> hashes;
  for (const TestCase& tc : out.suite.cases) {
    REQUIRE(concrete_length(tc) == tc.length + tc.postamble_length);
    CHECK(tc.postamble_length == 0);
    CHECK(replays_green(eng, tc));
    CHECK(hashes.insert(input_hash(tc)).second);  // deduped
    if (tc.id.rfind("B:TS1:", 0) == 0) {
      saw1 = true;
      CHECK(body_satisfies(specs[0], tc));
    } else if (tc.id.rfind("B:TS2:", 0) == 0) {
      saw2 = true;
      CHECK(body_satisfies(specs[1], tc));
    } else {
      FAIL("unexpected case id: " << tc.id);
    }
  }
  CHECK(saw1);
  CHECK(saw2);

  // Reruns are byte-identical.
  GenerateOutcome again = generate_B(eng, specs, opt, 1234);
  CHECK(dsl::print_suite(out.suite) == dsl::print_suite(again.suite));
}

TEST_CASE("generate B: unsatisfiable specs throw, or are collected with keep_going") {
  Fixture f(kSwitch);
  Engine eng(f.model, f.v);

  std::vector<TestSpec> specs = {
      {"good", Constraint::occurs(ev("ack", "SwitchOn"), 1, 99)},
      {"impossible", Constraint::all({Constraint::occurs(ev("cmd", "SwitchOn"), 1, 1),
                                      Constraint::not_occurs(ev("cmd", "SwitchOn"))})},
  };

  GenerateOptions opt;
  opt.config.len_min = 3;
  opt.config.len_max = 5;
  opt.config.seed_count = 2;
  opt.config.max_nodes = 5000;
  opt.config.use_store = false;

  CHECK_THROWS_AS(generate_B(eng, specs, opt, 9), SpecUnsatisfiedWithinBound);

  opt.keep_going = true;
  GenerateOutcome out = generate_B(eng, specs, opt, 9);
  REQUIRE(out.unsatisfied_specs.size() == 1);
  CHECK(out.unsatisfied_specs[0] == "impossible");
  CHECK(!out.suite.cases.empty());  // the satisfiable spec still contributed
}

TEST_CASE("generate C: n structural cases under the trivial spec") {
  Fixture f(kSwitch);
  Engine eng(f.model, f.v);

  GenerateOptions opt;
  opt.config.len_min = 2;
  opt.config.len_max = 5;
  opt.config.seed_count = 4;
  opt.config.max_nodes = 20000;
  opt.config.use_store = false;

  GenerateOutcome out = generate_C(eng, 8, opt, 77);
  REQUIRE(out.suite.cases.size() == 8);
  CHECK(out.suite.generator.kind == "C");
  std::set<uint64_t> hashes;
  for (const TestCase& tc : out.suite.cases) {
    CHECK(tc.id.rfind("C:s", 0) == 0);
    CHECK(replays_green(eng, tc));
    CHECK(hashes.insert(input_hash(tc)).second);
  }

  GenerateOutcome again = generate_C(eng, 8, opt, 77);
  CHECK(dsl::print_suite(out.suite) == dsl::print_suite(again.suite));
}

TEST_CASE("generate D: uniform random inputs honor the sanity constraint") {
  Fixture f(kSwitch);
  Engine eng(f.model, f.v);

  // Sanity: the very first input must be SwitchOn.
  TestSpec sanity{"boot", Constraint::within_steps(ev("cmd", "SwitchOn"), 1, 1)};

  GenerateOptions opt;
  opt.config.len_min = 2;
  opt.config.len_max = 5;

  GenerateOutcome out = generate_D(eng, &sanity, 6, opt, 5);
  REQUIRE(out.suite.cases.size() == 6);
  CHECK(out.suite.generator.kind == "D");
  for (size_t i = 0; i < out.suite.cases.size(); ++i) {
    const TestCase& tc = out.suite.cases[i];
    CHECK(tc.id == "D:" + std::to_string(i));
    REQUIRE(!tc.steps.empty());
    CHECK(valuation_get(tc.steps[0].inputs, "cmd") == Value::con("SwitchOn"));
    CHECK(replays_green(eng, tc));
  }

  GenerateOutcome again = generate_D(eng, &sanity, 6, opt, 5);
  CHECK(dsl::print_suite(out.suite) == dsl::print_suite(again.suite));

  // An output-event sanity spec is rejected up front.
  TestSpec bad{"bad", Constraint::occurs(ev("ack", "SwitchOn"), 1, 1)};
  CHECK_THROWS_AS(generate_D(eng, &bad, 2, opt, 5), MbtError);
}

// ---------------------------------------------------------------------------
// Observation postambles
// ---------------------------------------------------------------------------

TEST_CASE("postamble: registry dump is scripted, bounded, and replay-checked") {
  Fixture f(kRegistry);
  Engine eng(f.model, f.v);

  ObservationProtocol proto;
  proto.query_channel = "req";
  proto.query = Value::con("Query");
  proto.response_channel = "resp";
  proto.end_pattern = dsl::parse_pattern("Done");

  // Body: add two items. The dump then pages them newest-first.
  TestCase body;
  body.length = 2;
  body.steps.push_back({{{"req", Value::con("Add", {Value::con("IA")})}}, {}});
  body.steps.push_back({{{"req", Value::con("Add", {Value::con("IB")})}}, {}});
  REQUIRE(replays_green(eng, body));

  TestCase full = add_postamble(eng, body, proto);
  CHECK(full.length == 2);
  CHECK(full.postamble_length == 5);  // query, page, page, done, settle
  REQUIRE(concrete_length(full) == 7);
  CHECK(valuation_get(full.steps[2].inputs, "req") == Value::con("Query"));
  CHECK(valuation_get(full.steps[3].expected, "resp") ==
        Value::con("Page", {Value::con("IB")}));
  CHECK(valuation_get(full.steps[4].expected, "resp") ==
        Value::con("Page", {Value::con("IA")}));
  CHECK(valuation_get(full.steps[5].expected, "resp") == Value::con("Done"));
  CHECK(replays_green(eng, full));

  // Empty registry: query, done, settle — the three-step floor.
  TestCase empty;
  TestCase small = add_postamble(eng, empty, proto);
  CHECK(small.postamble_length == 3);
  CHECK(small.postamble_length >= proto.min_len);
  CHECK(replays_green(eng, small));

  // A response that never comes caps the dialogue at max_len.
  ObservationProtocol never = proto;
  never.end_pattern = dsl::parse_pattern("Page(IA)");
  never.query = Value::con("Add", {Value::con("IA")});  // never triggers a dump
  TestCase capped = add_postamble(eng, empty, never);
  CHECK(capped.postamble_length == never.max_len);

  // Unknown observation channels are hard errors.
  ObservationProtocol bad = proto;
  bad.query_channel = "nope";
  CHECK_THROWS_AS(add_postamble(eng, empty, bad), ObservationChannelMissing);
  bad = proto;
  bad.response_channel = "nope";
  CHECK_THROWS_AS(add_postamble(eng, empty, bad), ObservationChannelMissing);
}

TEST_CASE("generate C: postambles are appended and counted separately") {
  Fixture f(kRegistry);
  Engine eng(f.model, f.v);

  GenerateOptions opt;
  opt.config.len_min = 2;
  opt.config.len_max = 4;
  opt.config.seed_count = 3;
  opt.config.universe.depth = 2;
  opt.postamble = ObservationProtocol{"req", Value::con("Query"), "resp",
                                      dsl::parse_pattern("Done")};

  GenerateOutcome out = generate_C(eng, 5, opt, 21);
  REQUIRE(out.suite.cases.size() == 5);
  for (const TestCase& tc : out.suite.cases) {
    CHECK(tc.postamble_length >= 3);
    CHECK(tc.postamble_length <= 12);
    CHECK(concrete_length(tc) == tc.length + tc.postamble_length);
    CHECK(replays_green(eng, tc));
  }
}

// ---------------------------------------------------------------------------
// Suite and spec JSON
// ---------------------------------------------------------------------------

TEST_CASE("suite json: print/parse round trip is the identity") {
  Fixture f(kSwitch);
  Engine eng(f.model, f.v);

  GenerateOptions opt;
  opt.config.len_min = 2;
  opt.config.len_max = 4;
  opt.config.seed_count = 2;
  GenerateOutcome out = generate_C(eng, 3, opt, 13);

  std::string text = dsl::print_suite(out.suite);
  Suite back = dsl::parse_suite(text);
  CHECK(dsl::print_suite(back) == text);
  CHECK(back.model_hash == out.suite.model_hash);
  CHECK(back.generator.kind == "C");
  CHECK(back.generator.seed == 13);
  REQUIRE(back.cases.size() == 3);
  CHECK(back.cases[0].steps.size() == out.suite.cases[0].steps.size());
}

TEST_CASE("suite json: schema violations carry JSON-pointer paths") {
  auto expect_schema_error = [](const std::string& text, const std::string& needle) {
    try {
      dsl::parse_suite(text);
      FAIL_CHECK("expected SchemaError for " << needle);
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_schema_error(R"({"generator":{"kind":"C","seed":1},"cases":[]})", "/model_hash");
  expect_schema_error(R"({"model_hash":"0","generator":{"kind":"Z","seed":1},"cases":[]})",
                      "/generator/kind");
  expect_schema_error(R"({"model_hash":"0","generator":{"kind":"C"},"cases":[]})",
                      "/generator/seed");
  expect_schema_error(
      R"({"model_hash":"0","generator":{"kind":"C","seed":1},
          "cases":[{"id":"c","length":2,"postamble_length":0,
                    "steps":[{"inputs":{},"expected":{}}]}]})",
      "/cases/0/steps");
  expect_schema_error(
      R"({"model_hash":"0","generator":{"kind":"C","seed":1},
          "cases":[{"id":"c","length":1,"postamble_length":0,
                    "steps":[{"inputs":{"c":"Cons("},"expected":{}}]}]})",
      "/cases/0/steps/0/inputs/c");
}

TEST_CASE("suite json: missing valuation keys mean silence") {
  Suite s = dsl::parse_suite(R"({
    "model_hash": "1a",
    "generator": {"kind": "A", "seed": 0},
    "cases": [{"id": "k", "length": 1, "postamble_length": 0,
               "steps": [{"inputs": {}, "expected": {"resp": "Done"}}]}]
  })");
  REQUIRE(s.cases.size() == 1);
  CHECK(s.model_hash == 0x1a);
  CHECK(s.cases[0].steps[0].inputs.empty());
  CHECK(valuation_get(s.cases[0].steps[0].inputs, "anything").is_absent());
  CHECK(valuation_get(s.cases[0].steps[0].expected, "resp") == Value::con("Done"));
}

TEST_CASE("spec json: round trip across every node kind") {
  std::string text = R"js({
    "id": "TS9",
    "constraint": {
      "kind": "and",
      "items": [
        {"kind": "occurs", "event": {"channel": "c", "pattern": "Hit"}, "min": 1, "max": 3},
        {"kind": "notOccurs", "event": {"channel": "c", "pattern": "Err"}},
        {"kind": "precedes",
         "first": {"channel": "a", "pattern": "Boot"},
         "then": {"channel": "b", "pattern": "Run(_)"}},
        {"kind": "withinSteps", "event": {"channel": "c", "pattern": "Hit"}, "lo": 2, "hi": 5}
      ]
    }
  })js";
  TestSpec s = dsl::parse_spec(text);
  CHECK(s.id == "TS9");
  REQUIRE(s.root.kind == Constraint::Kind::And);
  REQUIRE(s.root.children.size() == 4);
  CHECK(s.root.children[0].min == 1);
  CHECK(s.root.children[3].max == 5);

  std::string printed = dsl::print_spec(s);
  TestSpec back = dsl::parse_spec(printed);
  CHECK(dsl::print_spec(back) == printed);

  CHECK_THROWS_AS(dsl::parse_spec(R"({"id":"x"})"), SchemaError);
  CHECK_THROWS_AS(dsl::parse_spec(R"({"id":"x","constraint":{"kind":"sometimes"}})"),
                  SchemaError);
  CHECK_THROWS_AS(
      dsl::parse_spec(R"({"id":"x","constraint":{"kind":"occurs","min":0,"max":1}})"),
      SchemaError);
}

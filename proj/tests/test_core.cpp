#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbt/dsl.hpp"
#include "mbt/engine.hpp"
#include "mbt/validate.hpp"

using namespace mbt;

namespace {

Model parsed(const std::string& text) { return dsl::parse_model(text); }

// A tiny switch: Off -> On when the right message arrives.
const char* kToySwitch = R"(
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

const char* kListFuns = R"(
type Elem = A | B
type List = Nil | Cons(Elem, List)

fun len(l : List) : Int = case l of { Nil -> 0; Cons(h, t) -> 1 + len(t) }
fun and2(a : Bool, b : Bool) : Bool = a && b
fun loop() : Int = loop()

component Dummy {
  ports { in i : Bool }
  efsm { states S; init S }
}
)";

Value run_fun(const Model& m, const Signature& sig, const std::string& fn,
              std::vector<Value> args, long long fuel = 100000) {
  const FuncDef* f = m.find_function(fn);
  REQUIRE(f != nullptr);
  Env env;
  for (size_t i = 0; i < args.size(); ++i) env.push(f->params[i].first, args[i]);
  EvalContext cx;
  cx.sig = &sig;
  cx.fuel = fuel;
  return eval(f->body, env, cx);
}

}  // namespace

TEST_CASE("value basics") {
  Value a = Value::absent();
  CHECK(a.is_absent());
  CHECK(a.term() == "\xce\xb5");
  CHECK(Value::boolean(true).term() == "true");
  CHECK(Value::integer(-7).term() == "-7");

  Value list = Value::con("Cons", {Value::con("A"), Value::con("Nil")});
  CHECK(list.term() == "Cons(A, Nil)");
  CHECK(list.tree_depth() == 2);
  CHECK(Value::con("Nil").tree_depth() == 1);

  CHECK(Value::integer(2) == Value::integer(2));
  CHECK(Value::integer(1) < Value::integer(2));
  CHECK(list != Value::con("Nil"));
  // total order across kinds is stable
  CHECK(Value::compare(Value::absent(), Value::integer(0)) < 0);
}

TEST_CASE("absent may not sit inside a constructor") {
  CHECK_THROWS_AS(Value::con("Req", {Value::absent()}), EvalError);
}

TEST_CASE("rng determinism and range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(7);
  for (int i = 0; i < 200; ++i) CHECK(c.below(13) < 13);
  Rng d1(9), d2(9);
  Rng f1 = d1.fork(3), f2 = d2.fork(3);
  CHECK(f1.next() == f2.next());
}

TEST_CASE("eval: conjunction, recursion, fuel") {
  Model m = parsed(kListFuns);
  Validated v = validate(m);
  REQUIRE(v.ok());

  CHECK(run_fun(m, v.sig, "and2", {Value::boolean(true), Value::boolean(false)}).as_bool() ==
        false);

  Value two = Value::con("Cons", {Value::con("A"), Value::con("Cons", {Value::con("B"),
                                                                       Value::con("Nil")})});
  CHECK(run_fun(m, v.sig, "len", {two}).as_int() == 2);

  CHECK_THROWS_AS(run_fun(m, v.sig, "loop", {}, 1000), FuelExhausted);
}

TEST_CASE("eval: fuel monotonicity") {
  Model m = parsed(kListFuns);
  Validated v = validate(m);
  REQUIRE(v.ok());
  Value two = Value::con("Cons", {Value::con("A"), Value::con("Cons", {Value::con("B"),
                                                                       Value::con("Nil")})});
  // body of len(2-list): 3 case dispatches + 2 recursive calls = 5 fuel
  CHECK_THROWS_AS(run_fun(m, v.sig, "len", {two}, 4), FuelExhausted);
  for (long long f = 5; f < 30; f += 7)
    CHECK(run_fun(m, v.sig, "len", {two}, f).as_int() == 2);
}

TEST_CASE("eval: short-circuit skips the right operand") {
  // division by zero on the right is never reached when the left decides
  Model m = parsed(R"(
fun safe(x : Int) : Bool = x != 0 && 10 / x > 1
component D { ports { in i : Bool } efsm { states S; init S } }
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  CHECK(run_fun(m, v.sig, "safe", {Value::integer(0)}).as_bool() == false);
  CHECK(run_fun(m, v.sig, "safe", {Value::integer(5)}).as_bool() == true);
}

TEST_CASE("eval: arbitrary precision integers") {
  Model m = parsed(R"(
fun pow2(n : Int) : Int = if n == 0 then 1 else 2 * pow2(n - 1)
component D { ports { in i : Bool } efsm { states S; init S } }
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  Value big = run_fun(m, v.sig, "pow2", {Value::integer(100)});
  CHECK(big.as_int() == BigInt("1267650600228229401496703205376"));
}

TEST_CASE("match: constructor patterns, wildcard vs absent") {
  Env env;
  Pattern req = Pattern::con("Req", {Pattern::var("x")});
  auto hit = match(req, Value::con("Req", {Value::integer(5)}), env);
  REQUIRE(hit.has_value());
  CHECK(*hit == 1);
  CHECK(env.find("x")->as_int() == 5);
  env.pop(*hit);

  CHECK(!match(req, Value::con("Ack"), env).has_value());
  CHECK(env.size() == 0);  // partial bindings rolled back

  CHECK(!match(Pattern::wildcard(), Value::absent(), env).has_value());
  auto eps = match(Pattern::absent(), Value::absent(), env);
  REQUIRE(eps.has_value());
  CHECK(*eps == 0);
  CHECK(match(Pattern::wildcard(), Value::integer(1), env).has_value());
}

TEST_CASE("enabled: trigger, silence, guard") {
  Model m = parsed(kToySwitch);
  Validated v = validate(m);
  REQUIRE(v.ok());
  const Component& toy = m.components[0];

  EvalContext cx;
  cx.sig = &v.sig;
  Env locals;

  auto on = enabled(toy, "Off", locals, {{"cmd", Value::con("SwitchOn")}}, cx);
  REQUIRE(on.size() == 1);
  CHECK(on[0].index == 0);

  auto silent = enabled(toy, "Off", locals, {{"cmd", Value::absent()}}, cx);
  CHECK(silent.empty());

  // guard false even though the pattern matches
  Model g = parsed(R"(
component G {
  ports { in i : Int; out o : Int }
  efsm {
    states S
    init S
    trans S -> S when i = x if x > 0 then o = x
  }
}
)");
  Validated vg = validate(g);
  REQUIRE(vg.ok());
  auto none = enabled(g.components[0], "S", locals, {{"i", Value::integer(0)}}, cx);
  CHECK(none.empty());
  auto one = enabled(g.components[0], "S", locals, {{"i", Value::integer(3)}}, cx);
  REQUIRE(one.size() == 1);
  CHECK(one[0].binders.size() == 1);
  CHECK(one[0].binders[0].second.as_int() == 3);
}

TEST_CASE("enabled: omitted ports require absence") {
  Model m = parsed(R"(
component Two {
  ports { in a : Int; in b : Int; out o : Int }
  efsm {
    states S
    init S
    trans S -> S when a = x then o = x
  }
}
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  EvalContext cx;
  cx.sig = &v.sig;
  Env locals;
  // b silent: fires
  CHECK(enabled(m.components[0], "S", locals, {{"a", Value::integer(1)}}, cx).size() == 1);
  // b present: the transition does not fire
  CHECK(enabled(m.components[0], "S", locals,
                {{"a", Value::integer(1)}, {"b", Value::integer(2)}}, cx)
            .empty());
}

TEST_CASE("validate: clean model produces no diagnostics") {
  Model m = parsed(kToySwitch);
  Validated v = validate(m);
  CHECK(v.diagnostics.empty());
  CHECK(v.ok());
  REQUIRE(v.net.instances.size() == 1);
  CHECK(v.net.inputs.size() == 1);
  CHECK(v.net.outputs.size() == 1);
}

TEST_CASE("validate: channel type mismatch is reported") {
  Model m = parsed(R"(
component P { ports { out o : Int } efsm { states S; init S; trans S -> S then o = 1 } }
component Q { ports { in i : Bool } efsm { states S; init S } }
component Sys {
  ports { in start : Bool }
  sub p : P
  sub q : Q
  channels { link : p.o -> q.i }
}
root Sys
)");
  Validated v = validate(m);
  CHECK(!v.ok());
  bool found = false;
  for (const auto& d : v.diagnostics)
    if (d.message.find("connects Int to Bool") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate: zero-delay cycle yields one causality diagnostic") {
  // two components feeding each other instantaneously
  Model m = parsed(R"(
component A { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x } }
component B { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x } }
component Sys {
  ports { in ext : Int }
  sub a : A
  sub b : B
  channels {
    ab : a.o -> b.i
    ba : b.o -> a.i
  }
}
root Sys
)");
  Validated v = validate(m);
  CHECK(!v.ok());
  int cycle_diags = 0;
  for (const auto& d : v.diagnostics)
    if (d.message.find("causality cycle") != std::string::npos) ++cycle_diags;
  CHECK(cycle_diags == 1);

  // a delayed back-edge breaks the loop
  Model m2 = parsed(R"(
component A { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x } }
component B { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x } }
component Sys {
  ports { in ext : Int }
  sub a : A
  sub b : B
  channels {
    ab : a.o -> b.i
    ba : b.o -> a.i delayed
  }
}
root Sys
)");
  Validated v2 = validate(m2);
  CHECK(v2.ok());
}

TEST_CASE("validate: assorted static errors") {
  // guard not Bool
  Model m1 = parsed(R"(
component C { ports { in i : Int } efsm { states S; init S; trans S -> S when i = x if x + 1 } }
)");
  CHECK(!validate(m1).ok());
  // unknown constructor arity
  Model m2 = parsed(R"(
type T = K(Int)
component C { ports { in i : T } efsm { states S; init S; trans S -> S when i = K(a, b) } }
)");
  CHECK(!validate(m2).ok());
  // duplicate binder in one transition
  Model m3 = parsed(R"(
component C { ports { in i : Int; in j : Int } efsm { states S; init S; trans S -> S when i = x, j = x } }
)");
  CHECK(!validate(m3).ok());
  // nested absent-pattern
  Model m4 = parsed(R"(
type T = K(Int)
component C { ports { in i : T } efsm { states S; init S; trans S -> S when i = K(ε) } }
)");
  CHECK(!validate(m4).ok());
}

TEST_CASE("step: fire and stutter") {
  Model m = parsed(kToySwitch);
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);

  SystemState st = eng.initial_state();
  CHECK(eng.control_name(st, 0) == "Off");

  StepOptions opt;
  Valuation out = eng.step(st, {{"cmd", Value::con("SwitchOn")}}, opt);
  CHECK(eng.control_name(st, 0) == "On");
  CHECK(out.at("ack") == Value::con("SwitchOn"));

  // all-absent input on a state with no matching transition: stutter
  SystemState before = st;
  Valuation out2 = eng.step(st, {}, opt);
  CHECK(st == before);
  CHECK(out2.at("ack").is_absent());
}

TEST_CASE("run: empty input, stutter tick, determinism") {
  Model m = parsed(kToySwitch);
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);
  StepOptions opt;

  CHECK(eng.run({}, opt).empty());

  std::vector<Valuation> ins = {{{"cmd", Value::con("SwitchOn")}}, {}};
  Trace t = eng.run(ins, opt);
  REQUIRE(t.size() == 2);
  CHECK(t[0].outputs.at("ack") == Value::con("SwitchOn"));
  CHECK(t[1].outputs.at("ack").is_absent());
  CHECK(t[0].state == t[1].state);  // tick 2 stuttered

  Trace t2 = eng.run(ins, opt);
  REQUIRE(t2.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i].state == t2[i].state);
    CHECK(t[i].outputs == t2[i].outputs);
  }
}

TEST_CASE("step: nondeterminism strict vs explore") {
  Model m = parsed(R"(
component N {
  ports { in i : Int; out o : Int }
  efsm {
    states S, A, B
    init S
    trans S -> A when i = _ then o = 1
    trans S -> B when i = _ then o = 2
  }
}
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);

  SystemState st = eng.initial_state();
  StepOptions strict;
  CHECK_THROWS_AS(eng.step(st, {{"i", Value::integer(0)}}, strict), NondeterminismError);

  StepOptions explore;
  explore.mode = StepMode::Explore;
  Rng rng(11);
  explore.rng = &rng;
  SystemState st2 = eng.initial_state();
  Valuation out = eng.step(st2, {{"i", Value::integer(0)}}, explore);
  bool went_a = eng.control_name(st2, 0) == "A";
  CHECK(out.at("o").as_int() == (went_a ? 1 : 2));
}

TEST_CASE("delayed channels buffer one tick") {
  Model m = parsed(R"(
component Relay { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x } }
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
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);
  StepOptions opt;
  Trace t = eng.run({{{"ext", Value::integer(7)}}, {}, {}}, opt);
  REQUIRE(t.size() == 3);
  CHECK(t[0].outputs.at("res").is_absent());       // value still in the buffer
  CHECK(t[1].outputs.at("res").as_int() == 7);     // delivered one tick later
  CHECK(t[2].outputs.at("res").is_absent());
}

TEST_CASE("instantaneous propagation crosses the network inside one tick") {
  Model m = parsed(R"(
component Inc { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x + 1 } }
component Sys {
  ports { in ext : Int; out res : Int }
  sub a : Inc
  sub b : Inc
  channels {
    win : ext -> a.i
    mid : a.o -> b.i
    wout : b.o -> res
  }
}
root Sys
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);
  StepOptions opt;
  Trace t = eng.run({{{"ext", Value::integer(5)}}}, opt);
  REQUIRE(t.size() == 1);
  CHECK(t[0].outputs.at("res").as_int() == 7);
}

TEST_CASE("topological-order independence on a forest") {
  Model m = parsed(R"(
component Inc { ports { in i : Int; out o : Int } efsm { states S; init S; trans S -> S when i = x then o = x + 1 } }
component Sys {
  ports { in ext : Int; out r1 : Int; out r2 : Int }
  sub a : Inc
  sub b : Inc
  sub c : Inc
  channels {
    win : ext -> a.i
    m1 : a.o -> b.i
    m2 : a.o -> c.i
    w1 : b.o -> r1
    w2 : c.o -> r2
  }
}
root Sys
)");
  Validated v = validate(m);
  REQUIRE(v.ok());

  // every valid topological order must produce identical behavior
  std::vector<std::vector<int>> orders = {{0, 1, 2}, {0, 2, 1}};
  std::vector<Valuation> ins = {{{"ext", Value::integer(1)}}, {{"ext", Value::integer(10)}}};
  Trace base;
  for (size_t k = 0; k < orders.size(); ++k) {
    Engine eng(m, v);
    eng.set_order(orders[k]);
    StepOptions opt;
    Trace t = eng.run(ins, opt);
    if (k == 0) {
      base = t;
    } else {
      REQUIRE(t.size() == base.size());
      for (size_t i = 0; i < t.size(); ++i) {
        CHECK(t[i].state == base[i].state);
        CHECK(t[i].outputs == base[i].outputs);
      }
    }
  }
}

TEST_CASE("type preservation along a run") {
  Model m = parsed(R"(
type Msg = Put(Int) | Get
type Box = Empty | Full(Int)

component Store {
  ports { in cmd : Msg; out val : Int }
  efsm {
    states S
    init S
    local box : Box := Empty
    trans S -> S when cmd = Put(x) set box := Full(x)
    trans S -> S when cmd = Get if box != Empty then val = case box of { Full(v) -> v; Empty -> 0 }
  }
}
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);
  StepOptions opt;
  std::vector<Valuation> ins = {{{"cmd", Value::con("Put", {Value::integer(9)})}},
                                {{"cmd", Value::con("Get")}}};
  Trace t = eng.run(ins, opt);
  const Component& store = m.components[0];
  for (const auto& step : t) {
    for (size_t l = 0; l < store.efsm->locals.size(); ++l)
      CHECK(value_has_type(step.state.comps[0].locals[l], store.efsm->locals[l].type, v.sig));
    for (const auto& [port, val] : step.outputs)
      if (!val.is_absent()) CHECK(value_has_type(val, store.find_port(port)->type, v.sig));
  }
  CHECK(t[1].outputs.at("val").as_int() == 9);
}

TEST_CASE("simultaneous assignment reads the pre-state") {
  Model m = parsed(R"(
component Swap {
  ports { in go : Bool; out o : Int }
  efsm {
    states S
    init S
    local x : Int := 1
    local y : Int := 2
    trans S -> S when go = true then o = x set x := y, y := x
  }
}
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);
  StepOptions opt;
  Trace t = eng.run({{{"go", Value::boolean(true)}}, {{"go", Value::boolean(true)}}}, opt);
  // swap really swapped: x,y = 2,1 after tick 1, back to 1,2 after tick 2
  CHECK(t[0].state.comps[0].locals[0].as_int() == 2);
  CHECK(t[0].state.comps[0].locals[1].as_int() == 1);
  CHECK(t[1].state.comps[0].locals[0].as_int() == 1);
  CHECK(t[1].state.comps[0].locals[1].as_int() == 2);
}

TEST_CASE("run annotates errors with the tick index") {
  Model m = parsed(R"(
component C {
  ports { in i : Int; out o : Int }
  efsm { states S; init S; trans S -> S when i = x then o = 10 / x }
}
)");
  Validated v = validate(m);
  REQUIRE(v.ok());
  Engine eng(m, v);
  StepOptions opt;
  std::vector<Valuation> ins = {{{"i", Value::integer(5)}}, {{"i", Value::integer(0)}}};
  try {
    eng.run(ins, opt);
    FAIL("expected an error");
  } catch (const MbtError& e) {
    CHECK(std::string(e.what()).find("tick 2") != std::string::npos);
    CHECK(std::string(e.what()).find("division by zero") != std::string::npos);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mbt/dsl.hpp"
#include "mbt/validate.hpp"

using namespace mbt;

namespace {

const char* kRich = R"(
model demo

type Power = On | Off
type List = Nil | Cons(Int, List)

fun sum(l : List) : Int = case l of { Nil -> 0; Cons(h, t) -> h + sum(t) }
fun clamp(x : Int, lo : Int, hi : Int) : Int = if x < lo then lo else if x > hi then hi else x
fun odd(x : Int) : Bool = x % 2 == 1

component Ctl {
  ports {
    in pw : Power
    in level : Int
    out report : Int
  }
  efsm {
    states Idle, Busy
    init Idle
    local acc : List := Cons(1, Nil)
    trans Idle -> Busy when pw = On, level = x if x >= 0 && !(x > 100) then report = clamp(x, 0, 10) set acc := Cons(x, acc)
    trans Busy -> Idle when pw = Off, level = ε then report = sum(acc)
    trans Busy -> Busy when level = x if odd(x) || x == 0
  }
}

component Probe {
  ports { in tick : Power; out seen : Int }
  efsm {
    states S
    init S
    trans S -> S when tick = _ then seen = 1
  }
}

component Sys {
  ports {
    in pw : Power
    in level : Int
    out report : Int
    out seen : Int
  }
  sub ctl : Ctl
  sub probe : Probe
  channels {
    wp : pw -> ctl.pw
    wl : level -> ctl.level
    wr : ctl.report -> report
    wt : pw -> probe.tick
    ws : probe.seen -> seen delayed
  }
}

root Sys
)";

}  // namespace

TEST_CASE("minimal component parses") {
  Model m = dsl::parse_model("component C { ports { in i : Bool } efsm { states S; init S } }");
  REQUIRE(m.components.size() == 1);
  CHECK(m.components[0].name == "C");
  CHECK(m.root == "C");  // single component becomes the root
  CHECK(m.components[0].ports.size() == 1);
  CHECK(m.components[0].efsm->states == std::vector<std::string>{"S"});
}

TEST_CASE("unclosed brace reports position") {
  try {
    dsl::parse_model("component C { ports { in i : Bool }", "t.afm");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.location.file == "t.afm");
    CHECK(e.location.line == 1);
    CHECK(e.found == "<end of input>");
  }
}

TEST_CASE("round-trip: parse -> print -> parse is structurally equal") {
  Model m = dsl::parse_model(kRich);
  REQUIRE(validate(m).ok());
  std::string printed = dsl::print_model(m);
  Model again = dsl::parse_model(printed);
  CHECK(model_equal(m, again));
}

TEST_CASE("print is byte-idempotent") {
  Model m = dsl::parse_model(kRich);
  std::string p1 = dsl::print_model(m);
  Model m2 = dsl::parse_model(p1);
  std::string p2 = dsl::print_model(m2);
  CHECK(p1 == p2);
}

TEST_CASE("round-trip keeps operator structure") {
  const char* exprs[] = {
      "fun f(a : Bool, b : Bool, c : Bool) : Bool = a && b || c && !a",
      "fun f(a : Bool, b : Bool, c : Bool) : Bool = a && (b || c) && !a",
      "fun f(x : Int) : Int = x - 1 - 2 * (x + 3) % 4",
      "fun f(x : Int) : Int = -x + (if x > 0 then x else -(x * 2))",
      "fun f(x : Int) : Bool = (x == 4) == (x >= 2)",
      "fun f(x : Int) : Int = case x > 0 of { true -> 1; false -> -1 }",
  };
  for (const char* fn : exprs) {
    std::string text = std::string(fn) +
                       "\ncomponent D { ports { in i : Bool } efsm { states S; init S } }\n";
    CAPTURE(fn);
    Model m = dsl::parse_model(text);
    Model m2 = dsl::parse_model(dsl::print_model(m));
    CHECK(model_equal(m, m2));
    CHECK(dsl::print_model(m) == dsl::print_model(m2));
  }
}

TEST_CASE("negative literals fold and round-trip") {
  Model m = dsl::parse_model(
      "fun f(x : Int) : Int = -5 + x\n"
      "component D { ports { in i : Bool } efsm { states S; init S } }\n");
  const FuncDef* f = m.find_function("f");
  auto* bin = f->body->as<Expr::Binary>();
  REQUIRE(bin != nullptr);
  auto* lit = bin->lhs->as<Expr::Lit>();
  REQUIRE(lit != nullptr);
  CHECK(lit->value.as_int() == -5);
  CHECK(model_equal(m, dsl::parse_model(dsl::print_model(m))));
}

TEST_CASE("comments and stray semicolons are tolerated") {
  Model m = dsl::parse_model(R"(
-- leading comment
component C { -- inline
  ports { in i : Bool; } ;
  efsm { states S;; init S; } -- trailing
}
)");
  CHECK(m.components.size() == 1);
}

TEST_CASE("error locality: deleting a token points near the spot") {
  // drop the ':' of the port declaration on line 3
  try {
    dsl::parse_model("component C {\n  ports {\n    in i Bool\n  }\n  efsm { states S; init S }\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.location.line == 3);
  }
}

TEST_CASE("no partial reads: trailing garbage fails") {
  CHECK_THROWS_AS(
      dsl::parse_model("component C { ports { in i : Bool } efsm { states S; init S } } 42"),
      ParseError);
}

TEST_CASE("reserved words cannot name things") {
  CHECK_THROWS_AS(dsl::parse_model("component C { ports { in if : Bool } efsm { states S; init S } }"),
                  ParseError);
  CHECK_THROWS_AS(dsl::parse_model("fun case() : Int = 1\ncomponent C { ports { in i : Bool } efsm { states S; init S } }"),
                  ParseError);
}

TEST_CASE("case convention is enforced where it matters") {
  // lowercase constructor in a type definition
  CHECK_THROWS_AS(dsl::parse_model("type T = foo\ncomponent C { ports { in i : T } efsm { states S; init S } }"),
                  ParseError);
  // uppercase function name
  CHECK_THROWS_AS(dsl::parse_model("fun Foo() : Int = 1\ncomponent C { ports { in i : Bool } efsm { states S; init S } }"),
                  ParseError);
}

TEST_CASE("value terms parse and print") {
  CHECK(dsl::parse_term("\xce\xb5").is_absent());
  CHECK(dsl::parse_term("42").as_int() == 42);
  CHECK(dsl::parse_term("-17").as_int() == -17);
  CHECK(dsl::parse_term("true").as_bool());
  Value v = dsl::parse_term("Cons(1, Cons(2, Nil))");
  CHECK(v.con_name() == "Cons");
  CHECK(dsl::print_term(v) == "Cons(1, Cons(2, Nil))");
  CHECK(dsl::print_term(dsl::parse_term(dsl::print_term(v))) == dsl::print_term(v));
  CHECK_THROWS_AS(dsl::parse_term("Cons(1"), ParseError);
  CHECK_THROWS_AS(dsl::parse_term("1 2"), ParseError);
  // Absent inside a constructor is rejected by the value layer
  CHECK_THROWS_AS(dsl::parse_term("Cons(\xce\xb5, Nil)"), EvalError);
}

TEST_CASE("model hash is stable and content-sensitive") {
  Model a = dsl::parse_model(kRich);
  Model b = dsl::parse_model(kRich);
  CHECK(model_hash(a) == model_hash(b));
  Model c = dsl::parse_model(dsl::print_model(a));
  CHECK(model_hash(a) == model_hash(c));

  std::string tweaked(kRich);
  auto pos = tweaked.find("x > 100");
  tweaked.replace(pos, 7, "x > 101");
  Model d = dsl::parse_model(tweaked);
  CHECK(model_hash(a) != model_hash(d));
}

TEST_CASE("uids are canonical across reparse") {
  Model a = dsl::parse_model(kRich);
  validate(a);
  Model b = dsl::parse_model(dsl::print_model(a));
  validate(b);
  // the guard of the first Ctl transition carries the same uid in both
  const Component* ca = a.find_component("Ctl");
  const Component* cb = b.find_component("Ctl");
  REQUIRE(ca);
  REQUIRE(cb);
  CHECK(ca->efsm->transitions[0].guard->uid == cb->efsm->transitions[0].guard->uid);
  CHECK(ca->efsm->transitions[2].guard->uid == cb->efsm->transitions[2].guard->uid);
}

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mbt/value.hpp"

namespace mbt {

// ---------------------------------------------------------------------------
// Type references

struct TypeRef {
  enum class Kind { Int, Bool, Named };
  Kind kind = Kind::Int;
  std::string name;  // for Named

  static TypeRef builtin_int() { return {Kind::Int, {}}; }
  static TypeRef builtin_bool() { return {Kind::Bool, {}}; }
  static TypeRef named(std::string n) { return {Kind::Named, std::move(n)}; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_bool() const { return kind == Kind::Bool; }
  std::string str() const {
    switch (kind) {
      case Kind::Int: return "Int";
      case Kind::Bool: return "Bool";
      default: return name;
    }
  }
  friend bool operator==(const TypeRef& a, const TypeRef& b) {
    return a.kind == b.kind && (a.kind != Kind::Named || a.name == b.name);
  }
  friend bool operator!=(const TypeRef& a, const TypeRef& b) { return !(a == b); }
};

// ---------------------------------------------------------------------------
// Patterns

struct Pattern {
  enum class Kind { Wildcard, AbsentPat, Var, Lit, Con };
  Kind kind = Kind::Wildcard;
  std::string name;            // binder or constructor name
  Value literal;               // for Lit
  std::vector<Pattern> args;   // for Con
  SourceLocation loc;

  static Pattern wildcard() { return {Kind::Wildcard, {}, {}, {}, {}}; }
  static Pattern absent() { return {Kind::AbsentPat, {}, {}, {}, {}}; }
  static Pattern var(std::string n) { return {Kind::Var, std::move(n), {}, {}, {}}; }
  static Pattern lit(Value v) { return {Kind::Lit, {}, std::move(v), {}, {}}; }
  static Pattern con(std::string n, std::vector<Pattern> a = {}) {
    return {Kind::Con, std::move(n), {}, std::move(a), {}};
  }

  // Binders introduced by this pattern, in left-to-right order.
  void collect_binders(std::vector<std::string>& out) const;
};

// ---------------------------------------------------------------------------
// Expressions. Shared immutable nodes; `uid` is assigned once per model in a
// canonical traversal and keys coverage instrumentation.

class Expr;
using ExprPtr = std::shared_ptr<Expr>;

enum class BinOp { And, Or, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };

const char* binop_token(BinOp op);
bool binop_is_boolean(BinOp op);     // And/Or
bool binop_is_comparison(BinOp op);  // Eq..Ge

struct CaseArm {
  Pattern pattern;
  ExprPtr body;
};

class Expr {
 public:
  struct Var { std::string name; };
  struct Lit { Value value; };
  struct Con { std::string name; std::vector<ExprPtr> args; };
  struct Call { std::string name; std::vector<ExprPtr> args; };
  struct If { ExprPtr cond, then_branch, else_branch; };
  struct Case { ExprPtr scrutinee; std::vector<CaseArm> arms; };
  struct Not { ExprPtr operand; };
  struct Neg { ExprPtr operand; };
  struct Binary { BinOp op; ExprPtr lhs, rhs; };

  using Node = std::variant<Var, Lit, Con, Call, If, Case, Not, Neg, Binary>;

  Node node;
  SourceLocation loc;
  uint32_t uid = 0;

  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
  template <typename T>
  bool is() const { return std::holds_alternative<T>(node); }
};

ExprPtr make_expr(Expr::Node node, SourceLocation loc = {});
ExprPtr expr_true();
ExprPtr expr_lit(Value v);

// Visit every node of an expression tree (pre-order, deterministic).
void walk_expr(const ExprPtr& e, const std::function<void(const ExprPtr&)>& fn);

// ---------------------------------------------------------------------------
// Top-level definitions

struct TypeDef {
  struct Ctor {
    std::string name;
    std::vector<TypeRef> arg_types;
  };
  std::string name;
  std::vector<Ctor> ctors;
  SourceLocation loc;
};

struct FuncDef {
  std::string name;
  std::vector<std::pair<std::string, TypeRef>> params;
  TypeRef result_type;
  ExprPtr body;
  SourceLocation loc;
};

}  // namespace mbt

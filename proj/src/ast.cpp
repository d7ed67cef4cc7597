#include "mbt/ast.hpp"

namespace mbt {

void Pattern::collect_binders(std::vector<std::string>& out) const {
  switch (kind) {
    case Kind::Var:
      out.push_back(name);
      break;
    case Kind::Con:
      for (const auto& a : args) a.collect_binders(out);
      break;
    default:
      break;
  }
}

const char* binop_token(BinOp op) {
  switch (op) {
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
  }
  return "?";
}

bool binop_is_boolean(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

bool binop_is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
      return true;
    default:
      return false;
  }
}

ExprPtr make_expr(Expr::Node node, SourceLocation loc) {
  auto e = std::make_shared<Expr>();
  e->node = std::move(node);
  e->loc = std::move(loc);
  return e;
}

ExprPtr expr_true() { return make_expr(Expr::Lit{Value::boolean(true)}); }

ExprPtr expr_lit(Value v) { return make_expr(Expr::Lit{std::move(v)}); }

void walk_expr(const ExprPtr& e, const std::function<void(const ExprPtr&)>& fn) {
  if (!e) return;
  fn(e);
  if (auto* c = e->as<Expr::Con>()) {
    for (const auto& a : c->args) walk_expr(a, fn);
  } else if (auto* c = e->as<Expr::Call>()) {
    for (const auto& a : c->args) walk_expr(a, fn);
  } else if (auto* i = e->as<Expr::If>()) {
    walk_expr(i->cond, fn);
    walk_expr(i->then_branch, fn);
    walk_expr(i->else_branch, fn);
  } else if (auto* c = e->as<Expr::Case>()) {
    walk_expr(c->scrutinee, fn);
    for (const auto& arm : c->arms) walk_expr(arm.body, fn);
  } else if (auto* n = e->as<Expr::Not>()) {
    walk_expr(n->operand, fn);
  } else if (auto* n = e->as<Expr::Neg>()) {
    walk_expr(n->operand, fn);
  } else if (auto* b = e->as<Expr::Binary>()) {
    walk_expr(b->lhs, fn);
    walk_expr(b->rhs, fn);
  }
}

}  // namespace mbt

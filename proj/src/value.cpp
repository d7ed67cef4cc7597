#include "mbt/value.hpp"

#include <algorithm>

namespace mbt {

Value Value::boolean(bool b) {
  Value v;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Bool;
  n->b = b;
  v.node_ = std::move(n);
  return v;
}

Value Value::integer(BigInt i) {
  Value v;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Int;
  n->i = std::move(i);
  v.node_ = std::move(n);
  return v;
}

Value Value::con(std::string name, std::vector<Value> args) {
  for (const auto& a : args)
    if (a.is_absent())
      throw EvalError("Absent cannot appear inside constructor " + name);
  Value v;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Con;
  n->con = std::move(name);
  n->args = std::move(args);
  v.node_ = std::move(n);
  return v;
}

bool Value::is_con(std::string_view name) const {
  return kind() == Kind::Con && node_->con == name;
}

bool Value::as_bool() const {
  if (kind() != Kind::Bool) throw EvalError("value is not a Bool: " + term());
  return node_->b;
}

const BigInt& Value::as_int() const {
  if (kind() != Kind::Int) throw EvalError("value is not an Int: " + term());
  return node_->i;
}

const std::string& Value::con_name() const {
  if (kind() != Kind::Con) throw EvalError("value is not a constructor: " + term());
  return node_->con;
}

const std::vector<Value>& Value::con_args() const {
  if (kind() != Kind::Con) throw EvalError("value is not a constructor: " + term());
  return node_->args;
}

std::string Value::term() const {
  switch (kind()) {
    case Kind::Absent:
      return "\xce\xb5";  // ε
    case Kind::Bool:
      return node_->b ? "true" : "false";
    case Kind::Int:
      return node_->i.str();
    case Kind::Con: {
      if (node_->args.empty()) return node_->con;
      std::string out = node_->con + "(";
      for (size_t i = 0; i < node_->args.size(); ++i) {
        if (i) out += ", ";
        out += node_->args[i].term();
      }
      out += ")";
      return out;
    }
  }
  return {};
}

size_t Value::tree_depth() const {
  if (kind() != Kind::Con || node_->args.empty()) return 1;
  size_t deepest = 0;
  for (const auto& a : node_->args) deepest = std::max(deepest, a.tree_depth());
  return 1 + deepest;
}

int Value::compare(const Value& a, const Value& b) {
  auto ka = static_cast<int>(a.kind()), kb = static_cast<int>(b.kind());
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Absent:
      return 0;
    case Kind::Bool:
      return a.node_->b == b.node_->b ? 0 : (a.node_->b ? 1 : -1);
    case Kind::Int:
      return a.node_->i == b.node_->i ? 0 : (a.node_->i < b.node_->i ? -1 : 1);
    case Kind::Con: {
      if (int c = a.node_->con.compare(b.node_->con)) return c < 0 ? -1 : 1;
      size_t n = std::min(a.node_->args.size(), b.node_->args.size());
      for (size_t i = 0; i < n; ++i)
        if (int c = compare(a.node_->args[i], b.node_->args[i])) return c;
      if (a.node_->args.size() != b.node_->args.size())
        return a.node_->args.size() < b.node_->args.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

}  // namespace mbt

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mbt/basics.hpp"

namespace mbt {

// A runtime value: Int, Bool, a constructor tree, or Absent (no message on a
// channel this tick). Immutable and cheap to copy; Absent is the default.
class Value {
 public:
  enum class Kind { Absent, Bool, Int, Con };

  Value() = default;  // Absent

  static Value absent() { return Value(); }
  static Value boolean(bool b);
  static Value integer(BigInt v);
  static Value integer(long v) { return integer(BigInt(v)); }
  static Value con(std::string name, std::vector<Value> args = {});

  Kind kind() const { return node_ ? node_->kind : Kind::Absent; }
  bool is_absent() const { return !node_; }
  bool is_con(std::string_view name) const;

  bool as_bool() const;
  const BigInt& as_int() const;
  const std::string& con_name() const;
  const std::vector<Value>& con_args() const;

  // Constructor-syntax rendering; Absent prints as the epsilon sign used by
  // the suite/spec file formats.
  std::string term() const;

  size_t tree_depth() const;  // Absent/leaf = 1, Con = 1 + max over args

  friend bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Value& a, const Value& b) { return compare(a, b) != 0; }
  friend bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

  static int compare(const Value& a, const Value& b);

 private:
  struct Node {
    Kind kind;
    bool b = false;
    BigInt i;
    std::string con;
    std::vector<Value> args;
  };
  std::shared_ptr<const Node> node_;
};

}  // namespace mbt

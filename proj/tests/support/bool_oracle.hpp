#pragma once

// Independent oracle for condition/decision coverage of pure boolean
// expressions. Knows nothing about the evaluator or the coverage recorder:
// it builds its own expression trees, renders them to source text, and
// simulates short-circuit evaluation with a hand-rolled interpreter that
// marks which leaves were touched. Tests compare these marks against what
// the real pipeline records.

#include <memory>
#include <string>
#include <vector>

#include "mbt/basics.hpp"

namespace oracle {

struct BoolNode {
  enum class Kind { Leaf, Not, And, Or };
  Kind kind = Kind::Leaf;
  int var = 0;    // which input variable this leaf reads (0..3 -> a..d)
  int leaf = -1;  // pre-order leaf index, assigned by number_leaves
  std::unique_ptr<BoolNode> l, r;
};

using BoolNodePtr = std::unique_ptr<BoolNode>;

// Random tree with exactly `atoms` leaves over `vars` distinct variables.
inline BoolNodePtr gen_tree(mbt::Rng& rng, int atoms, int vars) {
  auto n = std::make_unique<BoolNode>();
  if (atoms == 1) {
    if (rng.below(4) == 0) {  // sprinkle negations over leaves
      n->kind = BoolNode::Kind::Not;
      n->l = gen_tree(rng, 1, vars);
      return n;
    }
    n->kind = BoolNode::Kind::Leaf;
    n->var = static_cast<int>(rng.below(static_cast<uint64_t>(vars)));
    return n;
  }
  switch (rng.below(5)) {
    case 0:
      n->kind = BoolNode::Kind::Not;
      n->l = gen_tree(rng, atoms, vars);
      return n;
    case 1:
    case 2:
      n->kind = BoolNode::Kind::And;
      break;
    default:
      n->kind = BoolNode::Kind::Or;
      break;
  }
  int left = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(atoms - 1)));
  n->l = gen_tree(rng, left, vars);
  n->r = gen_tree(rng, atoms - left, vars);
  return n;
}

inline void number_leaves(BoolNode& n, int& next) {
  if (n.kind == BoolNode::Kind::Leaf) {
    n.leaf = next++;
    return;
  }
  if (n.l) number_leaves(*n.l, next);
  if (n.r) number_leaves(*n.r, next);
}

inline std::string render(const BoolNode& n) {
  static const char* kNames[] = {"a", "b", "c", "d"};
  switch (n.kind) {
    case BoolNode::Kind::Leaf: return kNames[n.var];
    case BoolNode::Kind::Not: return "!(" + render(*n.l) + ")";
    case BoolNode::Kind::And: return "(" + render(*n.l) + " && " + render(*n.r) + ")";
    case BoolNode::Kind::Or: return "(" + render(*n.l) + " || " + render(*n.r) + ")";
  }
  return "?";
}

struct Flags {
  std::vector<bool> saw_true, saw_false;
  explicit Flags(size_t items) : saw_true(items, false), saw_false(items, false) {}
};

// Short-circuit evaluation; marks flags[1 + leaf] for every leaf actually
// read. Slot 0 is reserved for the whole expression as a decision.
inline bool sc_eval(const BoolNode& n, const std::vector<bool>& vals, Flags& f) {
  switch (n.kind) {
    case BoolNode::Kind::Leaf: {
      bool v = vals[static_cast<size_t>(n.var)];
      if (v)
        f.saw_true[static_cast<size_t>(1 + n.leaf)] = true;
      else
        f.saw_false[static_cast<size_t>(1 + n.leaf)] = true;
      return v;
    }
    case BoolNode::Kind::Not: return !sc_eval(*n.l, vals, f);
    case BoolNode::Kind::And: return sc_eval(*n.l, vals, f) ? sc_eval(*n.r, vals, f) : false;
    case BoolNode::Kind::Or: return sc_eval(*n.l, vals, f) ? true : sc_eval(*n.r, vals, f);
  }
  return false;
}

// Evaluates under one assignment, updating both leaf flags and the root
// decision flag (slot 0).
inline bool run_assignment(const BoolNode& root, const std::vector<bool>& vals, Flags& f) {
  bool out = sc_eval(root, vals, f);
  if (out)
    f.saw_true[0] = true;
  else
    f.saw_false[0] = true;
  return out;
}

inline int count_leaves(const BoolNode& n) {
  if (n.kind == BoolNode::Kind::Leaf) return 1;
  int c = 0;
  if (n.l) c += count_leaves(*n.l);
  if (n.r) c += count_leaves(*n.r);
  return c;
}

}  // namespace oracle

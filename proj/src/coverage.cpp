#include "mbt/coverage.hpp"

#include <json.hpp>
#include <sstream>

namespace mbt::cov {

namespace {

using Json = nlohmann::ordered_json;

// Syntactic path of a node below a root: child indices joined with dots.
struct PathWalker {
  // Collects every if-condition (a decision wherever it appears).
  static void if_conds(const ExprPtr& e, const std::string& path,
                       std::vector<std::pair<ExprPtr, std::string>>& out) {
    auto rec = [&](const ExprPtr& child, int idx) {
      if_conds(child, path + "." + std::to_string(idx), out);
    };
    if (auto* i = e->as<Expr::If>()) {
      out.emplace_back(i->cond, path + ".0");
      rec(i->cond, 0);
      rec(i->then_branch, 1);
      rec(i->else_branch, 2);
    } else if (auto* c = e->as<Expr::Con>()) {
      for (size_t k = 0; k < c->args.size(); ++k) rec(c->args[k], static_cast<int>(k));
    } else if (auto* c = e->as<Expr::Call>()) {
      for (size_t k = 0; k < c->args.size(); ++k) rec(c->args[k], static_cast<int>(k));
    } else if (auto* c = e->as<Expr::Case>()) {
      rec(c->scrutinee, 0);
      for (size_t k = 0; k < c->arms.size(); ++k)
        rec(c->arms[k].body, static_cast<int>(k) + 1);
    } else if (auto* n = e->as<Expr::Not>()) {
      rec(n->operand, 0);
    } else if (auto* n = e->as<Expr::Neg>()) {
      rec(n->operand, 0);
    } else if (auto* b = e->as<Expr::Binary>()) {
      rec(b->lhs, 0);
      rec(b->rhs, 1);
    }
  }

  // Atoms of one decision: maximal Bool subtrees reached without crossing a
  // boolean operator. Short-circuit never hides an atom from this list, only
  // from the recorded events.
  static void atoms(const ExprPtr& e, const std::string& path,
                    std::vector<std::pair<ExprPtr, std::string>>& out) {
    if (auto* b = e->as<Expr::Binary>(); b && binop_is_boolean(b->op)) {
      atoms(b->lhs, path + ".0", out);
      atoms(b->rhs, path + ".1", out);
      return;
    }
    if (auto* n = e->as<Expr::Not>()) {
      atoms(n->operand, path + ".0", out);
      return;
    }
    out.emplace_back(e, path);
  }
};

struct Builder {
  Universe u;
  std::map<uint32_t, bool> seen_decision;  // guard against double registration

  void add(Item::Kind kind, const std::string& id, uint32_t uid, bool concrete) {
    if (kind == Item::Kind::Decision) {
      if (seen_decision.count(uid)) return;
      seen_decision[uid] = true;
      ++u.decisions;
    } else {
      ++u.atoms;
    }
    size_t idx = u.items.size();
    u.items.push_back({kind, id, uid, concrete});
    u.by_uid[uid].push_back(idx);
  }

  void add_decision_tree(const ExprPtr& root, const std::string& base, bool concrete) {
    add(Item::Kind::Decision, "dec:" + base, root->uid, concrete);
    std::vector<std::pair<ExprPtr, std::string>> as;
    PathWalker::atoms(root, base, as);
    for (const auto& [node, path] : as) add(Item::Kind::Atom, "atom:" + path, node->uid, concrete);
  }

  void add_if_conds(const ExprPtr& e, const std::string& base, bool concrete) {
    std::vector<std::pair<ExprPtr, std::string>> conds;
    PathWalker::if_conds(e, base, conds);
    for (const auto& [node, path] : conds) add_decision_tree(node, path, concrete);
  }
};

bool returns_bool(const TypeRef& t) { return t.is_bool(); }

}  // namespace

int Universe::find(const std::string& id) const {
  for (size_t i = 0; i < items.size(); ++i)
    if (items[i].id == id) return static_cast<int>(i);
  return -1;
}

Universe enumerate_universe(const Model& m) {
  Builder b;
  for (const auto& c : m.components) {
    if (!c.efsm) continue;
    for (size_t t = 0; t < c.efsm->transitions.size(); ++t) {
      const Transition& tr = c.efsm->transitions[t];
      std::string base = "comp:" + c.name + ":t" + std::to_string(t);
      b.add_decision_tree(tr.guard, base + ":guard", c.concrete);
      b.add_if_conds(tr.guard, base + ":guard", c.concrete);
      for (const auto& [port, e] : tr.outputs)
        b.add_if_conds(e, base + ":out:" + port, c.concrete);
      for (const auto& [local, e] : tr.assignments)
        b.add_if_conds(e, base + ":set:" + local, c.concrete);
    }
  }
  for (const auto& f : m.functions) {
    std::string base = "fun:" + f.name + ":body";
    if (returns_bool(f.result_type)) b.add_decision_tree(f.body, base, false);
    b.add_if_conds(f.body, base, false);
  }
  std::string all;
  for (const auto& it : b.u.items) {
    all += it.id;
    all += '\n';
  }
  b.u.hash = fnv1a(all);
  return b.u;
}

size_t Map::flags_set() const {
  size_t n = 0;
  for (bool f : saw_true) n += f;
  for (bool f : saw_false) n += f;
  return n;
}

Map make_map(const Universe& u) {
  Map m;
  m.universe_hash = u.hash;
  m.saw_true.assign(u.items.size(), false);
  m.saw_false.assign(u.items.size(), false);
  return m;
}

void record(Map& m, const Universe& u, const std::string& id, bool outcome) {
  int idx = u.find(id);
  if (idx < 0) throw MbtError("unknown coverage id '" + id + "'");
  if (outcome)
    m.saw_true[idx] = true;
  else
    m.saw_false[idx] = true;
}

Recorder::Recorder(const Universe& u, Map& m) {
  if (m.universe_hash != u.hash) throw MbtError("coverage map belongs to a different universe");
  observer_ = [&u, &m](uint32_t uid, bool outcome) {
    auto it = u.by_uid.find(uid);
    if (it == u.by_uid.end()) return;  // a Bool node that is neither decision nor atom
    for (size_t idx : it->second) {
      if (outcome)
        m.saw_true[idx] = true;
      else
        m.saw_false[idx] = true;
    }
  };
}

Ratio cd_ratio(const Map& m, const Universe& u) {
  if (m.universe_hash != u.hash) throw MbtError("coverage map belongs to a different universe");
  return {m.flags_set(), u.target()};
}

Map merge(const Map& a, const Map& b) {
  if (a.universe_hash != b.universe_hash)
    throw MbtError("cannot merge coverage maps from different universes");
  Map out = a;
  for (size_t i = 0; i < out.saw_true.size(); ++i) {
    if (b.saw_true[i]) out.saw_true[i] = true;
    if (b.saw_false[i]) out.saw_false[i] = true;
  }
  return out;
}

std::string to_json(const Map& m, const Universe& u) {
  Json doc;
  doc["universe_hash"] = hex64(u.hash);
  Json items = Json::array();
  for (size_t i = 0; i < u.items.size(); ++i) {
    Json it;
    it["id"] = u.items[i].id;
    it["kind"] = u.items[i].kind == Item::Kind::Decision ? "decision" : "atom";
    it["sawTrue"] = static_cast<bool>(m.saw_true[i]);
    it["sawFalse"] = static_cast<bool>(m.saw_false[i]);
    items.push_back(std::move(it));
  }
  doc["items"] = std::move(items);
  return doc.dump(2) + "\n";
}

Map from_json(const std::string& text, const Universe& u) {
  Json doc = Json::parse(text);
  if (!doc.contains("universe_hash") || doc["universe_hash"] != hex64(u.hash))
    throw SchemaError("/universe_hash", "coverage file does not match this model");
  Map m = make_map(u);
  const Json& items = doc.at("items");
  if (items.size() != u.items.size())
    throw SchemaError("/items", "item count does not match the universe");
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].at("id") != u.items[i].id)
      throw SchemaError("/items/" + std::to_string(i) + "/id", "unexpected id");
    m.saw_true[i] = items[i].at("sawTrue").get<bool>();
    m.saw_false[i] = items[i].at("sawFalse").get<bool>();
  }
  return m;
}

std::string to_csv(const Map& m, const Universe& u) {
  std::ostringstream os;
  os << "id,kind,saw_true,saw_false\n";
  for (size_t i = 0; i < u.items.size(); ++i)
    os << u.items[i].id << ','
       << (u.items[i].kind == Item::Kind::Decision ? "decision" : "atom") << ','
       << (m.saw_true[i] ? 1 : 0) << ',' << (m.saw_false[i] ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace mbt::cov

#include "mbt/universe.hpp"

#include <algorithm>

namespace mbt::gen {

namespace {

// Values of `t` with tree depth <= depth, appended to out. Named types
// memoize per (name, depth) to keep recursive types linear in output size.
struct Enumerator {
  const Signature& sig;
  const UniverseConfig& cfg;
  std::map<std::pair<std::string, int>, std::vector<Value>> memo;

  std::vector<Value> enumerate(const TypeRef& t, int depth) {
    if (depth <= 0) return {};
    if (t.is_int()) {
      std::vector<Value> out;
      for (long long i = cfg.int_lo; i <= cfg.int_hi; ++i) out.push_back(Value::integer(i));
      return out;
    }
    if (t.is_bool()) return {Value::boolean(false), Value::boolean(true)};

    auto key = std::make_pair(t.name, depth);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;

    auto it = sig.types.find(t.name);
    if (it == sig.types.end()) throw MbtError("unknown type '" + t.name + "'");
    std::vector<Value> out;
    for (const auto& ctor : it->second->ctors) {
      std::vector<std::vector<Value>> arg_sets;
      bool possible = true;
      for (const auto& at : ctor.arg_types) {
        arg_sets.push_back(enumerate(at, depth - 1));
        if (arg_sets.back().empty()) {
          possible = false;
          break;
        }
      }
      if (!possible) continue;
      std::vector<size_t> idx(arg_sets.size(), 0);
      while (true) {
        std::vector<Value> args;
        for (size_t k = 0; k < idx.size(); ++k) args.push_back(arg_sets[k][idx[k]]);
        out.push_back(Value::con(ctor.name, std::move(args)));
        if (out.size() > cfg.max_size)
          throw MbtError("value universe of '" + t.name + "' exceeds " +
                         std::to_string(cfg.max_size) + " at depth " +
                         std::to_string(cfg.depth));
        size_t k = 0;
        for (; k < idx.size(); ++k) {
          if (++idx[k] < arg_sets[k].size()) break;
          idx[k] = 0;
        }
        if (k == idx.size()) break;
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    memo[key] = out;
    return out;
  }
};

std::string type_key(const TypeRef& t) { return t.str(); }

}  // namespace

UniverseTable::UniverseTable(const Signature& sig, const UniverseConfig& cfg) : cfg_(cfg) {
  Enumerator en{sig, cfg_, {}};
  std::vector<TypeRef> all = {TypeRef::builtin_int(), TypeRef::builtin_bool()};
  for (const auto& [name, def] : sig.types) {
    (void)def;
    all.push_back(TypeRef::named(name));
  }
  for (const auto& t : all) {
    std::vector<Value> vals = en.enumerate(t, cfg_.depth);
    if (vals.empty())
      throw UniverseExhausted("type '" + t.str() + "' has no inhabitants at depth " +
                              std::to_string(cfg_.depth));
    std::vector<Value> ch;
    ch.reserve(vals.size() + 1);
    ch.push_back(Value::absent());
    ch.insert(ch.end(), vals.begin(), vals.end());
    by_type_[type_key(t)] = std::move(vals);
    by_channel_[type_key(t)] = std::move(ch);
  }
}

const std::vector<Value>& UniverseTable::of(const TypeRef& t) const {
  auto it = by_type_.find(type_key(t));
  if (it == by_type_.end()) throw MbtError("no universe for type '" + t.str() + "'");
  return it->second;
}

const std::vector<Value>& UniverseTable::channel(const TypeRef& t) const {
  auto it = by_channel_.find(type_key(t));
  if (it == by_channel_.end()) throw MbtError("no universe for type '" + t.str() + "'");
  return it->second;
}

}  // namespace mbt::gen

#include "mbt/explore.hpp"

#include <chrono>

namespace mbt::gen {

namespace {

std::vector<int> control_key(const SymState& st) {
  std::vector<int> key;
  key.reserve(st.comps.size());
  for (const auto& c : st.comps) key.push_back(c.control);
  return key;
}

std::vector<SymVal> data_of(const SymState& st) {
  std::vector<SymVal> data;
  for (const auto& c : st.comps)
    for (const auto& l : c.locals) data.push_back(l);
  for (const auto& b : st.buffers) data.push_back(b);
  return data;
}

bool covers(const std::vector<SymVal>& big, const std::vector<SymVal>& small) {
  for (size_t i = 0; i < big.size(); ++i)
    if (!small[i].subset_of(big[i])) return false;
  return true;
}

}  // namespace

bool StateStore::subsumed_or_insert(const SymState& st, int remaining) {
  std::vector<Entry>& bucket = by_control_[control_key(st)];
  Entry fresh{data_of(st), remaining};
  for (const Entry& e : bucket)
    if (e.remaining >= remaining && covers(e.data, fresh.data)) return true;
  // Keep the bucket maximal: drop entries the new one covers.
  size_t kept = 0;
  for (size_t i = 0; i < bucket.size(); ++i) {
    bool gone = bucket[i].remaining <= remaining && covers(fresh.data, bucket[i].data);
    if (gone) continue;
    if (kept != i) bucket[kept] = std::move(bucket[i]);
    ++kept;
  }
  entries_ -= bucket.size() - kept;
  bucket.resize(kept);
  bucket.push_back(std::move(fresh));
  ++entries_;
  return false;
}

ExploreStats explore(const SymEngine& se, const TestSpec* spec, const GenerationConfig& cfg,
                     uint64_t seed, const std::function<bool(const SymTrace&)>& sink) {
  ExploreStats stats;
  StateStore store;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Monitor monitor(spec ? *spec : trivial_spec(), cfg.len_max);
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(cfg.max_wall_seconds));

  SymTrace path;
  bool stop = false;

  std::function<void(const SymState&, const Monitor&)> dfs = [&](const SymState& st,
                                                                 const Monitor& mon) {
    if (stop) return;
    if (++stats.nodes > cfg.max_nodes) {
      stats.node_budget_hit = true;
      stop = true;
      return;
    }
    if ((stats.nodes & 0x3ff) == 0 && std::chrono::steady_clock::now() > deadline) {
      stats.timed_out = true;
      stop = true;
      return;
    }
    stats.controls_seen.insert(control_key(st));

    int len = static_cast<int>(path.size());
    if (mon.dead()) return;
    if (len >= cfg.len_min && len <= cfg.len_max) {
      Tri s = mon.status();
      if (s == Tri::Yes || (s == Tri::Maybe && len == cfg.len_max)) {
        ++stats.emitted;
        if (!sink(path)) {
          stop = true;
          return;
        }
      }
    }
    if (len >= cfg.len_max) return;
    if (cfg.use_store && store.subsumed_or_insert(st, cfg.len_max - len)) {
      ++stats.pruned;
      return;
    }

    std::vector<SymSucc> succs = se.successors(st);
    std::vector<size_t> order(succs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    for (size_t idx : order) {
      if (stop) return;
      SymSucc& s = succs[idx];
      Monitor next = mon;
      std::map<std::string, std::vector<Value>> channels;
      for (const auto& [ch, vs] : s.ext_inputs) channels[ch] = vs.vals;
      for (const auto& [ch, vs] : s.ext_outputs) channels[ch] = vs.vals;
      next.step(channels);
      path.push_back({s.ext_inputs, s.ext_outputs, s.choices});
      dfs(s.state, next);
      path.pop_back();
    }
  };

  dfs(se.initial(), monitor);
  return stats;
}

std::vector<SymTrace> explore_collect(const SymEngine& se, const TestSpec* spec,
                                      const GenerationConfig& cfg, uint64_t seed,
                                      ExploreStats* stats) {
  std::vector<SymTrace> out;
  ExploreStats st = explore(se, spec, cfg, seed, [&](const SymTrace& t) {
    out.push_back(t);
    return out.size() < cfg.max_traces;
  });
  if (stats) *stats = st;
  return out;
}

}  // namespace mbt::gen

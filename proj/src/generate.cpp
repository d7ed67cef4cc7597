#include "mbt/generate.hpp"

#include "mbt/dsl.hpp"

namespace mbt::gen {

namespace {

Valuation strip_absent(const Valuation& v) {
  Valuation out;
  for (const auto& [ch, val] : v)
    if (!val.is_absent()) out[ch] = val;
  return out;
}

bool satisfies_concrete(const TestSpec& spec, const TestCase& tc, int body_len) {
  Monitor mon(spec, body_len);
  for (int i = 0; i < body_len; ++i) mon.step_concrete(tc.steps[i].inputs, tc.steps[i].expected);
  return mon.status() == Tri::Yes;
}

uint64_t derive_seed(uint64_t base, const std::string& tag, uint64_t n) {
  return fnv1a(tag + ":" + std::to_string(n), base ^ 0x51ed2701a39b24a1ULL);
}

}  // namespace

TestCase concretize_trace(const Engine& eng, const SymTrace& trace, uint64_t seed,
                          long long fuel) {
  Rng rng(seed);
  std::vector<Valuation> inputs;
  for (const auto& step : trace) {
    Valuation tick;
    for (const auto& [ch, set] : step.inputs) {
      if (set.empty()) throw MbtError("empty input set for channel '" + ch + "'");
      const Value& pick = set.vals[rng.below(set.vals.size())];
      if (!pick.is_absent()) tick[ch] = pick;
    }
    inputs.push_back(std::move(tick));
  }

  StepOptions opt;
  opt.mode = StepMode::Strict;
  opt.fuel = fuel;
  Trace run = eng.run(inputs, opt);

  TestCase tc;
  tc.length = static_cast<int>(run.size());
  for (size_t i = 0; i < run.size(); ++i)
    tc.steps.push_back({inputs[i], strip_absent(run[i].outputs)});
  return tc;
}

bool replays_green(const Engine& eng, const TestCase& tc, long long fuel) {
  StepOptions opt;
  opt.mode = StepMode::Strict;
  opt.fuel = fuel;
  SystemState st = eng.initial_state();
  for (const auto& step : tc.steps) {
    Valuation out;
    try {
      out = eng.step(st, step.inputs, opt);
    } catch (const MbtError&) {
      return false;
    }
    for (const auto& p : eng.net().outputs)
      if (!(valuation_get(out, p.name) == valuation_get(step.expected, p.name))) return false;
  }
  return true;
}

TestCase add_postamble(const Engine& eng, const TestCase& tc, const ObservationProtocol& proto,
                       long long fuel) {
  const Net& net = eng.net();
  if (net.find_input(proto.query_channel) < 0)
    throw ObservationChannelMissing("observation query channel '" + proto.query_channel +
                                    "' is not an input of the model");
  if (net.find_output(proto.response_channel) < 0)
    throw ObservationChannelMissing("observation response channel '" + proto.response_channel +
                                    "' is not an output of the model");

  StepOptions opt;
  opt.mode = StepMode::Strict;
  opt.fuel = fuel;
  SystemState st = eng.initial_state();
  for (const auto& step : tc.steps) eng.step(st, step.inputs, opt);

  TestCase out = tc;
  Env scratch;
  int added = 0;
  bool finished = false;
  while (added < proto.max_len && !finished) {
    Valuation in;
    if (added == 0) in[proto.query_channel] = proto.query;
    Valuation outputs = eng.step(st, in, opt);
    const Value& resp = valuation_get(outputs, proto.response_channel);
    if (mbt::match(proto.end_pattern, resp, scratch).has_value()) finished = true;
    out.steps.push_back({std::move(in), strip_absent(outputs)});
    ++added;
  }
  if (finished && added < proto.max_len) {  // settle tick
    Valuation outputs = eng.step(st, {}, opt);
    out.steps.push_back({{}, strip_absent(outputs)});
    ++added;
  }
  while (added < proto.min_len) {  // pad tiny dialogues up to the floor
    Valuation outputs = eng.step(st, {}, opt);
    out.steps.push_back({{}, strip_absent(outputs)});
    ++added;
  }
  out.postamble_length = tc.postamble_length + added;
  return out;
}

GenerateOutcome generate_B(const Engine& eng, const std::vector<TestSpec>& specs,
                           const GenerateOptions& opt, uint64_t master_seed) {
  GenerateOutcome out;
  out.suite.model_hash = model_hash(eng.model());
  out.suite.generator = {"B", master_seed, std::nullopt, 0, false};

  UniverseTable tab(eng.sig(), opt.config.universe);
  SymEngine se(eng.model(), eng.validated(), tab, opt.config.fuel, opt.config.tuple_cap);

  std::set<uint64_t> seen;
  for (const auto& spec : specs) {
    check_spec(spec, eng.net());
    int for_spec = 0;
    for (int s = 0; s < opt.config.seed_count; ++s) {
      uint64_t seed = derive_seed(master_seed, "B:" + spec.id, static_cast<uint64_t>(s));
      ExploreStats stats;
      std::vector<SymTrace> traces = explore_collect(se, &spec, opt.config, seed, &stats);
      out.timed_out |= stats.timed_out;

      std::vector<size_t> order(traces.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng(seed ^ 0xabcd1234ULL).shuffle(order);

      int picked = 0;
      for (size_t idx : order) {
        if (picked >= opt.config.per_seed_pick) break;
        TestCase tc =
            concretize_trace(eng, traces[idx], derive_seed(seed, "pick", idx), opt.config.fuel);
        if (!satisfies_concrete(spec, tc, tc.length)) continue;
        uint64_t ih = input_hash(tc);
        if (seen.count(ih)) {
          ++out.suite.generator.duplicates_dropped;
          continue;
        }
        if (opt.postamble) tc = add_postamble(eng, tc, *opt.postamble, opt.config.fuel);
        tc.id = "B:" + spec.id + ":s" + std::to_string(s) + ":" + std::to_string(picked);
        seen.insert(ih);
        out.suite.cases.push_back(std::move(tc));
        ++picked;
        ++for_spec;
      }
    }
    if (for_spec == 0) {
      if (!opt.keep_going) throw SpecUnsatisfiedWithinBound(spec.id);
      out.unsatisfied_specs.push_back(spec.id);
    }
  }
  out.suite.generator.timed_out = out.timed_out;
  return out;
}

GenerateOutcome generate_C(const Engine& eng, int n, const GenerateOptions& opt, uint64_t seed) {
  GenerateOutcome out;
  out.suite.model_hash = model_hash(eng.model());
  out.suite.generator = {"C", seed, std::nullopt, 0, false};

  UniverseTable tab(eng.sig(), opt.config.universe);
  SymEngine se(eng.model(), eng.validated(), tab, opt.config.fuel, opt.config.tuple_cap);

  std::set<uint64_t> seen;
  int max_rounds = opt.config.seed_count * 4;
  for (int s = 0; s < max_rounds && static_cast<int>(out.suite.cases.size()) < n; ++s) {
    uint64_t round_seed = derive_seed(seed, "C", static_cast<uint64_t>(s));
    ExploreStats stats;
    std::vector<SymTrace> traces = explore_collect(se, nullptr, opt.config, round_seed, &stats);
    out.timed_out |= stats.timed_out;

    std::vector<size_t> order(traces.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(round_seed ^ 0xabcd1234ULL).shuffle(order);

    int per_round = std::max(1, (n + opt.config.seed_count - 1) / opt.config.seed_count);
    int picked = 0;
    for (size_t idx : order) {
      if (picked >= per_round || static_cast<int>(out.suite.cases.size()) >= n) break;
      TestCase tc = concretize_trace(eng, traces[idx], derive_seed(round_seed, "pick", idx),
                                     opt.config.fuel);
      uint64_t ih = input_hash(tc);
      if (seen.count(ih)) {
        ++out.suite.generator.duplicates_dropped;
        continue;
      }
      if (opt.postamble) tc = add_postamble(eng, tc, *opt.postamble, opt.config.fuel);
      tc.id = "C:s" + std::to_string(s) + ":" + std::to_string(picked);
      seen.insert(ih);
      out.suite.cases.push_back(std::move(tc));
      ++picked;
    }
  }
  if (static_cast<int>(out.suite.cases.size()) < n)
    throw MbtError("suite C: generated " + std::to_string(out.suite.cases.size()) + " of " +
                   std::to_string(n) + " requested cases within the exploration budget");
  out.suite.generator.timed_out = out.timed_out;
  return out;
}

GenerateOutcome generate_D(const Engine& eng, const TestSpec* sanity, int n,
                           const GenerateOptions& opt, uint64_t seed) {
  GenerateOutcome out;
  out.suite.model_hash = model_hash(eng.model());
  out.suite.generator = {"D", seed, std::nullopt, 0, false};
  if (sanity) check_spec(*sanity, eng.net(), /*inputs_only=*/true);

  UniverseTable tab(eng.sig(), opt.config.universe);
  const Net& net = eng.net();

  std::set<uint64_t> seen;
  for (int k = 0; static_cast<int>(out.suite.cases.size()) < n; ++k) {
    if (k > 20 * n + 200)
      throw MbtError("suite D: sanity constraints rejected too many candidates");
    Rng rng = Rng(derive_seed(seed, "D", static_cast<uint64_t>(k)));
    int len = opt.config.len_min +
              static_cast<int>(rng.below(
                  static_cast<uint64_t>(opt.config.len_max - opt.config.len_min + 1)));

    std::vector<Valuation> inputs;
    for (int t = 0; t < len; ++t) {
      Valuation tick;
      for (const auto& p : net.inputs) {
        const std::vector<Value>& set = tab.channel(p.type);
        const Value& pick = set[rng.below(set.size())];
        if (!pick.is_absent()) tick[p.name] = pick;
      }
      inputs.push_back(std::move(tick));
    }

    if (sanity) {
      Monitor mon(*sanity, len);
      for (const auto& tick : inputs) mon.step_concrete(tick, {});
      if (mon.status() != Tri::Yes) continue;
    }

    StepOptions ropt;
    ropt.mode = StepMode::Strict;
    ropt.fuel = opt.config.fuel;
    Trace run = eng.run(inputs, ropt);

    TestCase tc;
    tc.length = len;
    for (int t = 0; t < len; ++t) tc.steps.push_back({inputs[t], strip_absent(run[t].outputs)});
    uint64_t ih = input_hash(tc);
    if (seen.count(ih)) {
      ++out.suite.generator.duplicates_dropped;
      continue;
    }
    if (opt.postamble) tc = add_postamble(eng, tc, *opt.postamble, opt.config.fuel);
    tc.id = "D:" + std::to_string(out.suite.cases.size());
    seen.insert(ih);
    out.suite.cases.push_back(std::move(tc));
  }
  return out;
}

}  // namespace mbt::gen

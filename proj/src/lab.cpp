#include "mbt/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "mbt/dsl.hpp"
#include "mbt/harness.hpp"
#include "mbt/mutate.hpp"
#include "mbt/validate.hpp"

namespace mbt::lab {

namespace {

uint64_t derive(uint64_t base, const std::string& tag, uint64_t n) {
  return fnv1a(tag + ":" + std::to_string(n), base ^ 0x6c61625f73656564ULL);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MbtError("cannot read '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// A report row under construction: the resolved case list plus accumulating
// coverage maps (model universe and SUT universe).
struct Row {
  SuiteReport rep;
  gen::Suite suite;
  cov::Map model_map;
  cov::Map sut_map;
};

// A seeded fault, reconstructed from its manifest record and wrapped in a
// runnable simulation. Heap-pinned: engines keep references into the model.
struct MutCtx {
  sut::MutantRecord rec;
  sut::Mutant mut;
  Validated v;
  std::unique_ptr<sut::ModelSut> sim;
};

sut::Verdict run_mutant_case(sut::Sut& s, const sut::AdapterSpec& adapter, const Engine& eng,
                             const gen::TestCase& tc, long long fuel) {
  sut::Verdict v;
  v.case_id = tc.id;
  try {
    return sut::run_test(s, adapter, eng, tc, fuel).verdict;
  } catch (const sut::UncoveredValue& e) {
    // A fault can push the SUT outside the value range the abstraction maps;
    // that is a detected failure of the mutant, not an adapter bug, so it
    // becomes a verdict instead of ending the whole experiment.
    v.pass = false;
    v.mismatch = sut::Mismatch{0, e.channel, Value::absent(), Value::con("Uncovered")};
  } catch (const MbtError&) {
    // Anything else the bridge could not digest (a merge function choking on
    // mutant output, say) still counts as an observed failure.
    v.pass = false;
    v.mismatch = sut::Mismatch{0, "exception", Value::absent(), Value::con("HarnessError")};
  }
  return v;
}

gen::Suite union_suite(const std::vector<const Row*>& members, uint64_t hash,
                       const std::string& kind) {
  gen::Suite u;
  u.model_hash = hash;
  u.generator.kind = kind;
  std::set<uint64_t> seen;
  for (const Row* r : members)
    for (const auto& tc : r->suite.cases)
      if (seen.insert(gen::input_hash(tc)).second) u.cases.push_back(tc);
  return u;
}

}  // namespace

std::string suite_kind_name(SuiteKind k) {
  switch (k) {
    case SuiteKind::A: return "A";
    case SuiteKind::B: return "B";
    case SuiteKind::C: return "C";
    case SuiteKind::D: return "D";
    case SuiteKind::E: return "E";
    case SuiteKind::F: return "F";
    case SuiteKind::G: return "G";
  }
  return "?";
}

SuiteKind suite_kind_parse(const std::string& s) {
  if (s == "A") return SuiteKind::A;
  if (s == "B") return SuiteKind::B;
  if (s == "C") return SuiteKind::C;
  if (s == "D") return SuiteKind::D;
  if (s == "E") return SuiteKind::E;
  if (s == "F") return SuiteKind::F;
  if (s == "G") return SuiteKind::G;
  throw MbtError("unknown suite kind '" + s + "'");
}

ExperimentReport run_lab(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.master_seed = cfg.master_seed;

  Model model = dsl::parse_model(read_file(cfg.model_path), cfg.model_path);
  Validated mv = validate_or_throw(model);
  Engine eng(model, mv);
  rep.model_hash = model_hash(model);
  cov::Universe model_u = cov::enumerate_universe(model);

  Model sut_model = dsl::parse_model(read_file(cfg.sut_path), cfg.sut_path);
  Validated sv = validate_or_throw(sut_model);
  rep.sut_hash = model_hash(sut_model);
  cov::Universe sut_u = cov::enumerate_universe(sut_model);
  sut::ModelSut baseline(sut_model, sv, cfg.fuel);

  sut::AdapterSpec adapter = dsl::parse_adapter(read_file(cfg.adapter_path));

  // --- seeded faults -------------------------------------------------------
  std::vector<std::unique_ptr<MutCtx>> mutants;
  if (!cfg.mutants_path.empty()) {
    auto [base_hash, records] = dsl::parse_mutants(read_file(cfg.mutants_path));
    if (base_hash != rep.sut_hash)
      throw MbtError("mutant manifest was made for a different SUT model");
    for (const auto& r : records) {
      auto ctx = std::make_unique<MutCtx>();
      ctx->rec = r;
      try {
        ctx->mut = sut::mutate(sut_model, sut::mut_op_parse(r.op), r.seed);
      } catch (const MbtError& e) {
        rep.phase_errors.push_back("mutant " + r.id + ": " + e.what());
        continue;
      }
      if (!r.location.empty() && ctx->mut.location != r.location) {
        rep.phase_errors.push_back("mutant " + r.id + ": manifest location '" + r.location +
                                   "' but op/seed now edits '" + ctx->mut.location + "'");
        continue;
      }
      ctx->v = validate_or_throw(ctx->mut.model);
      ctx->sim = std::make_unique<sut::ModelSut>(ctx->mut.model, ctx->v, cfg.fuel);
      mutants.push_back(std::move(ctx));
    }
  }
  rep.mutant_count = mutants.size();

  // --- resolve the configured suites ---------------------------------------
  std::vector<std::unique_ptr<Row>> rows;
  for (const auto& sc : cfg.suites) {
    auto row = std::make_unique<Row>();
    row->rep.name = sc.name;
    row->rep.kind = suite_kind_name(sc.kind);
    row->suite.model_hash = rep.model_hash;
    row->suite.generator.kind = row->rep.kind;
    try {
      gen::GenerateOptions opt;
      opt.config = cfg.generation;
      opt.postamble = cfg.postamble;
      const uint64_t seed = derive(cfg.master_seed, "suite:" + sc.name, sc.seed);
      switch (sc.kind) {
        case SuiteKind::A:
        case SuiteKind::E:
        case SuiteKind::F:
        case SuiteKind::G: {
          row->suite = dsl::parse_suite(read_file(sc.path));
          if (row->suite.model_hash != rep.model_hash)
            throw MbtError("suite file '" + sc.path + "' was recorded for a different model");
          break;
        }
        case SuiteKind::B: {
          std::vector<gen::TestSpec> specs;
          std::set<std::string> ids;
          for (const auto& f : sc.spec_files)
            for (auto& s : dsl::parse_specs(read_file(f))) {
              if (!ids.insert(s.id).second)
                throw MbtError("duplicate spec id '" + s.id + "' across spec files");
              gen::check_spec(s, mv.net);
              specs.push_back(std::move(s));
            }
          opt.keep_going = true;
          gen::GenerateOutcome out = gen::generate_B(eng, specs, opt, seed);
          for (const auto& id : out.unsatisfied_specs)
            rep.phase_errors.push_back("generate " + sc.name + ": spec '" + id +
                                       "' yielded no case within the bound");
          row->suite = std::move(out.suite);
          break;
        }
        case SuiteKind::C: {
          row->suite = gen::generate_C(eng, sc.size, opt, seed).suite;
          break;
        }
        case SuiteKind::D: {
          std::optional<gen::TestSpec> sanity;
          if (!sc.sanity_spec.empty()) {
            sanity = dsl::parse_spec(read_file(sc.sanity_spec));
            gen::check_spec(*sanity, mv.net, /*inputs_only=*/true);
          }
          row->suite = gen::generate_D(eng, sanity ? &*sanity : nullptr, sc.size, opt, seed).suite;
          break;
        }
      }
      if (sc.size > 0 && row->suite.cases.size() > static_cast<size_t>(sc.size)) {
        // Random pick from the pool, as the source methodology selects a few
        // tests out of each generated suite.
        Rng pick(derive(cfg.master_seed, "cap:" + sc.name, sc.seed));
        pick.shuffle(row->suite.cases);
        row->suite.cases.resize(static_cast<size_t>(sc.size));
        std::sort(row->suite.cases.begin(), row->suite.cases.end(),
                  [](const gen::TestCase& a, const gen::TestCase& b) { return a.id < b.id; });
      }
    } catch (const MbtError& e) {
      rep.phase_errors.push_back("resolve " + sc.name + ": " + e.what());
      row->suite.cases.clear();
    }
    row->rep.size = row->suite.cases.size();
    rows.push_back(std::move(row));
  }

  // --- coverage: model by replay, SUT through the adapter ------------------
  for (auto& row : rows) {
    row->model_map = suite_coverage(eng, model_u, row->suite, cfg.fuel);
    row->rep.model_cov = cov::cd_ratio(row->model_map, model_u).value();
    row->sut_map = cov::make_map(sut_u);
    for (const auto& tc : row->suite.cases) {
      try {
        sut::RunResult rr = sut::run_test(baseline, adapter, eng, tc, cfg.fuel);
        row->sut_map = cov::merge(row->sut_map, rr.sut_coverage);
        if (!rr.verdict.pass)
          rep.phase_errors.push_back("baseline " + row->rep.name + ": case '" + tc.id +
                                     "' fails against the unmutated SUT");
      } catch (const MbtError& e) {
        rep.phase_errors.push_back("baseline " + row->rep.name + ": case '" + tc.id +
                                   "': " + e.what());
      }
    }
    row->rep.sut_cov = cov::cd_ratio(row->sut_map, sut_u).value();
  }

  // --- the suite x mutant matrix -------------------------------------------
  for (const auto& m : mutants) {
    for (auto& row : rows) {
      std::vector<sut::Verdict> verdicts;
      verdicts.reserve(row->suite.cases.size());
      bool any_fail = false;
      for (const auto& tc : row->suite.cases) {
        verdicts.push_back(run_mutant_case(*m->sim, adapter, eng, tc, cfg.fuel));
        any_fail = any_fail || !verdicts.back().pass;
      }
      if (!any_fail) continue;
      row->rep.killed.insert(m->rec.id);
      for (const auto& [key, members] : sut::classify(eng, row->suite, verdicts, cfg.fuel))
        row->rep.classes.insert(key);
    }
  }

  // --- cumulated rows: kind stars over B/C/D, then configured unions -------
  std::vector<std::unique_ptr<Row>> cumulated;
  auto aggregate = [&](const std::string& name, const std::string& kind,
                       const std::vector<const Row*>& members) {
    auto star = std::make_unique<Row>();
    star->rep.name = name;
    star->rep.kind = kind;
    star->rep.cumulated = true;
    star->suite = union_suite(members, rep.model_hash, name);
    star->rep.size = star->suite.cases.size();
    star->model_map = cov::make_map(model_u);
    star->sut_map = cov::make_map(sut_u);
    for (const Row* r : members) {
      star->rep.members.push_back(r->rep.name);
      star->rep.classes.insert(r->rep.classes.begin(), r->rep.classes.end());
      star->rep.killed.insert(r->rep.killed.begin(), r->rep.killed.end());
      star->model_map = cov::merge(star->model_map, r->model_map);
      star->sut_map = cov::merge(star->sut_map, r->sut_map);
    }
    star->rep.model_cov = cov::cd_ratio(star->model_map, model_u).value();
    star->rep.sut_cov = cov::cd_ratio(star->sut_map, sut_u).value();
    cumulated.push_back(std::move(star));
  };
  for (SuiteKind k : {SuiteKind::B, SuiteKind::C, SuiteKind::D}) {
    const std::string kind = suite_kind_name(k);
    std::vector<const Row*> members;
    for (const auto& row : rows)
      if (row->rep.kind == kind) members.push_back(row.get());
    if (!members.empty()) aggregate(kind + "*", kind, members);
  }
  for (const auto& uc : cfg.unions) {
    std::vector<const Row*> members;
    for (const auto& want : uc.of) {
      const Row* found = nullptr;
      for (const auto& row : rows)
        if (row->rep.name == want) found = row.get();
      for (const auto& row : cumulated)
        if (row->rep.name == want) found = row.get();
      if (!found) throw MbtError("union '" + uc.name + "' references unknown suite '" + want + "'");
      members.push_back(found);
    }
    aggregate(uc.name, "union", members);
  }
  for (auto& row : cumulated) rows.push_back(std::move(row));

  // --- subsampled coverage curves ------------------------------------------
  std::vector<size_t> ns = cfg.coverage_ns;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (const auto& row : rows) {
    for (size_t n : ns) {
      if (n == 0 || n > row->suite.cases.size()) continue;
      MeanCi ci = subsample_coverage(eng, model_u, row->suite, n, cfg.resample_count,
                                     derive(cfg.master_seed, "cov:" + row->rep.name, n),
                                     cfg.ci_level, cfg.fuel);
      rep.coverage_vs_n.push_back({row->rep.name, n, ci.mean, ci.half_width});
    }
  }

  // --- difference sets and correlations ------------------------------------
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = i + 1; j < rows.size(); ++j) {
      const auto& cx = rows[i]->rep.classes;
      const auto& cy = rows[j]->rep.classes;
      DiffCell cell;
      cell.x = rows[i]->rep.name;
      cell.y = rows[j]->rep.name;
      for (const auto& c : cx) cell.x_not_y += cy.count(c) ? 0 : 1;
      for (const auto& c : cy) cell.y_not_x += cx.count(c) ? 0 : 1;
      rep.diff.push_back(cell);
    }
  }

  std::vector<double> model_covs, sut_covs, errors;
  for (const auto& row : rows) {
    if (row->rep.cumulated) continue;
    model_covs.push_back(row->rep.model_cov);
    sut_covs.push_back(row->rep.sut_cov);
    errors.push_back(static_cast<double>(row->rep.classes.size()));
  }
  auto correlate = [&](const char* what, const std::vector<double>& xs,
                       const std::vector<double>& ys) -> std::optional<Correlation> {
    try {
      return pearson(xs, ys);
    } catch (const MbtError& e) {
      rep.phase_errors.push_back(std::string("stats ") + what + ": " + e.what());
      return std::nullopt;
    }
  };
  rep.model_cov_vs_errors = correlate("modelCovVsErrors", model_covs, errors);
  rep.sut_cov_vs_errors = correlate("sutCovVsErrors", sut_covs, errors);
  rep.model_cov_vs_sut_cov = correlate("modelCovVsSutCov", model_covs, sut_covs);

  for (const auto& row : rows) rep.suites.push_back(row->rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

using Json = nlohmann::ordered_json;

Json correlation_json(const std::optional<Correlation>& c) {
  if (!c) return nullptr;
  Json j;
  j["r"] = c->r;
  // JSON has no infinity; the t statistic is infinite exactly at |r| == 1.
  if (std::isfinite(c->t))
    j["t"] = c->t;
  else
    j["t"] = c->t > 0 ? "inf" : "-inf";
  j["p"] = c->p;
  j["n"] = c->n;
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw MbtError("cannot write '" + p.string() + "'");
  out << content;
}

}  // namespace

void emit_report(const ExperimentReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);

  Json doc;
  doc["modelHash"] = hex64(rep.model_hash);
  doc["sutHash"] = hex64(rep.sut_hash);
  doc["masterSeed"] = rep.master_seed;
  doc["mutants"] = rep.mutant_count;
  doc["suites"] = Json::array();
  for (const auto& s : rep.suites) {
    Json j;
    j["name"] = s.name;
    j["kind"] = s.kind;
    j["cumulated"] = s.cumulated;
    j["size"] = s.size;
    j["errors"] = s.classes.size();
    j["killed"] = s.killed.size();
    j["kills"] = s.killed;
    j["classes"] = s.classes;
    j["modelCov"] = s.model_cov;
    j["sutCov"] = s.sut_cov;
    if (!s.members.empty()) j["members"] = s.members;
    doc["suites"].push_back(std::move(j));
  }
  doc["diff"] = Json::array();
  for (const auto& d : rep.diff) {
    Json j;
    j["x"] = d.x;
    j["y"] = d.y;
    j["xNotY"] = d.x_not_y;
    j["yNotX"] = d.y_not_x;
    doc["diff"].push_back(std::move(j));
  }
  doc["coverageVsN"] = Json::array();
  for (const auto& c : rep.coverage_vs_n) {
    Json j;
    j["suite"] = c.suite;
    j["n"] = c.n;
    j["mean"] = c.mean;
    j["halfWidth"] = c.half_width;
    doc["coverageVsN"].push_back(std::move(j));
  }
  doc["correlations"]["modelCovVsErrors"] = correlation_json(rep.model_cov_vs_errors);
  doc["correlations"]["sutCovVsErrors"] = correlation_json(rep.sut_cov_vs_errors);
  doc["correlations"]["modelCovVsSutCov"] = correlation_json(rep.model_cov_vs_sut_cov);
  doc["phaseErrors"] = rep.phase_errors;
  write_file(base / "report.json", doc.dump(2) + "\n");

  std::string csv = "suite,size,errors,modelCov,sutCov\n";
  for (const auto& s : rep.suites)
    csv += s.name + "," + std::to_string(s.size) + "," + std::to_string(s.classes.size()) + "," +
           fmt6(s.model_cov) + "," + fmt6(s.sut_cov) + "\n";
  write_file(base / "suites.csv", csv);

  csv = "suite,n,mean,halfWidth\n";
  for (const auto& c : rep.coverage_vs_n)
    csv += c.suite + "," + std::to_string(c.n) + "," + fmt6(c.mean) + "," + fmt6(c.half_width) +
           "\n";
  write_file(base / "coverage_vs_n.csv", csv);

  csv = "x,y,xNotY,yNotX\n";
  for (const auto& d : rep.diff)
    csv += d.x + "," + d.y + "," + std::to_string(d.x_not_y) + "," + std::to_string(d.y_not_x) +
           "\n";
  write_file(base / "diff_matrix.csv", csv);

  // Plot-ready: one gnuplot index per suite for the coverage curves; one
  // labelled row per suite for the error bars.
  std::string dat;
  std::string last;
  for (const auto& c : rep.coverage_vs_n) {
    if (c.suite != last) {
      if (!last.empty()) dat += "\n\n";
      dat += "# suite: " + c.suite + "\n# n mean halfWidth\n";
      last = c.suite;
    }
    dat += std::to_string(c.n) + " " + fmt6(c.mean) + " " + fmt6(c.half_width) + "\n";
  }
  write_file(base / "coverage_vs_n.dat", dat);

  dat = "# suite errors killed size\n";
  for (const auto& s : rep.suites)
    dat += s.name + " " + std::to_string(s.classes.size()) + " " + std::to_string(s.killed.size()) +
           " " + std::to_string(s.size) + "\n";
  write_file(base / "errors.dat", dat);
}

std::string summarize_report(const std::string& report_json) {
  Json doc;
  try {
    doc = Json::parse(report_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw MbtError(std::string("report.json is not valid JSON: ") + e.what());
  }
  std::ostringstream out;
  char line[256];
  out << "model " << doc.value("modelHash", std::string("?")) << "  sut "
      << doc.value("sutHash", std::string("?")) << "  seed " << doc.value("masterSeed", 0ULL)
      << "  mutants " << doc.value("mutants", 0ULL) << "\n\n";
  std::snprintf(line, sizeof(line), "%-8s %-6s %6s %7s %7s %9s %9s\n", "suite", "kind", "size",
                "errors", "killed", "modelCov", "sutCov");
  out << line;
  for (const auto& s : doc.value("suites", Json::array())) {
    std::snprintf(line, sizeof(line), "%-8s %-6s %6llu %7llu %7llu %9.4f %9.4f\n",
                  s.value("name", std::string("?")).c_str(),
                  s.value("kind", std::string("?")).c_str(),
                  static_cast<unsigned long long>(s.value("size", 0ULL)),
                  static_cast<unsigned long long>(s.value("errors", 0ULL)),
                  static_cast<unsigned long long>(s.value("killed", 0ULL)),
                  s.value("modelCov", 0.0), s.value("sutCov", 0.0));
    out << line;
  }
  out << "\ncorrelations\n";
  const Json corr = doc.value("correlations", Json::object());
  for (const auto& key : {"modelCovVsErrors", "sutCovVsErrors", "modelCovVsSutCov"}) {
    if (!corr.contains(key) || corr.at(key).is_null()) {
      out << "  " << key << ": (not available)\n";
      continue;
    }
    const Json& c = corr.at(key);
    std::string tstr = "?";
    if (c.contains("t") && c.at("t").is_number()) {
      std::snprintf(line, sizeof(line), "%.4f", c.at("t").get<double>());
      tstr = line;
    } else if (c.contains("t") && c.at("t").is_string()) {
      tstr = c.at("t").get<std::string>();
    }
    std::snprintf(line, sizeof(line), "  %s: r=%.4f t=%s p=%.6g n=%llu\n", key,
                  c.value("r", 0.0), tstr.c_str(), c.value("p", 1.0),
                  static_cast<unsigned long long>(c.value("n", 0ULL)));
    out << line;
  }
  const auto errs = doc.value("phaseErrors", Json::array());
  out << "\nphase errors: " << errs.size() << "\n";
  for (const auto& e : errs) out << "  - " << e.get<std::string>() << "\n";
  return out.str();
}

}  // namespace mbt::lab

// ---------------------------------------------------------------------------
// Config JSON

namespace mbt::dsl {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& pointer, const std::string& what) {
  throw SchemaError(pointer, what);
}

std::string path_field(const Json& j, const std::string& pointer, const std::string& key,
                       const std::filesystem::path& base, bool required) {
  if (!j.contains(key)) {
    if (required) bad(pointer + "/" + key, "missing");
    return "";
  }
  if (!j.at(key).is_string()) bad(pointer + "/" + key, "expected a path string");
  std::filesystem::path p = j.at(key).get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal().string();
}

void generation_block(const Json& g, const std::string& pointer, gen::GenerationConfig& gc) {
  if (!g.is_object()) bad(pointer, "expected an object");
  gc.len_min = g.value("lenMin", gc.len_min);
  gc.len_max = g.value("lenMax", gc.len_max);
  gc.seed_count = g.value("seedCount", gc.seed_count);
  gc.per_seed_pick = g.value("perSeedPick", gc.per_seed_pick);
  gc.fuel = g.value("fuel", gc.fuel);
  gc.tuple_cap = g.value("tupleCap", gc.tuple_cap);
  gc.max_nodes = g.value("maxNodes", gc.max_nodes);
  gc.max_traces = g.value("maxTraces", gc.max_traces);
  gc.max_wall_seconds = g.value("maxWallSeconds", gc.max_wall_seconds);
  gc.use_store = g.value("useStore", gc.use_store);
  if (g.contains("universe")) {
    const Json& u = g.at("universe");
    if (!u.is_object()) bad(pointer + "/universe", "expected an object");
    gc.universe.depth = u.value("depth", gc.universe.depth);
    gc.universe.int_lo = u.value("intLo", gc.universe.int_lo);
    gc.universe.int_hi = u.value("intHi", gc.universe.int_hi);
    gc.universe.max_size = u.value("maxSize", gc.universe.max_size);
  }
  if (gc.len_min < 1 || gc.len_max < gc.len_min) bad(pointer, "needs 1 <= lenMin <= lenMax");
}

gen::ObservationProtocol postamble_block(const Json& p, const std::string& pointer) {
  if (!p.is_object()) bad(pointer, "expected an object");
  gen::ObservationProtocol proto;
  for (const char* key : {"queryChannel", "query", "responseChannel", "endPattern"})
    if (!p.contains(key)) bad(pointer + "/" + key, "missing");
  proto.query_channel = p.at("queryChannel").get<std::string>();
  try {
    proto.query = parse_term(p.at("query").get<std::string>());
  } catch (const MbtError& e) {
    bad(pointer + "/query", e.what());
  }
  proto.response_channel = p.at("responseChannel").get<std::string>();
  try {
    proto.end_pattern = parse_pattern(p.at("endPattern").get<std::string>());
  } catch (const MbtError& e) {
    bad(pointer + "/endPattern", e.what());
  }
  proto.min_len = p.value("minLen", proto.min_len);
  proto.max_len = p.value("maxLen", proto.max_len);
  return proto;
}

}  // namespace

GenSettings parse_gen_settings(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("", "expected a settings object");
  GenSettings out;
  if (doc.contains("generation")) generation_block(doc.at("generation"), "/generation", out.config);
  if (doc.contains("postamble")) out.postamble = postamble_block(doc.at("postamble"), "/postamble");
  return out;
}

lab::ExperimentConfig parse_experiment_config(const std::string& text,
                                              const std::string& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("", "expected a config object");
  const std::filesystem::path base(base_dir);

  lab::ExperimentConfig cfg;
  cfg.model_path = path_field(doc, "", "model", base, true);
  cfg.sut_path = path_field(doc, "", "sut", base, true);
  cfg.adapter_path = path_field(doc, "", "adapter", base, true);
  cfg.mutants_path = path_field(doc, "", "mutants", base, false);
  cfg.out_dir = path_field(doc, "", "out", base, true);
  cfg.master_seed = doc.value("masterSeed", 0ULL);
  cfg.resample_count = doc.value("resampleCount", 25);
  cfg.ci_level = doc.value("ciLevel", 0.98);
  cfg.fuel = doc.value("fuel", 100000LL);
  if (cfg.resample_count < 2) bad("/resampleCount", "needs at least 2 repetitions");
  if (!(cfg.ci_level > 0.0) || !(cfg.ci_level < 1.0)) bad("/ciLevel", "must lie in (0, 1)");

  cfg.coverage_ns = {10, 25, 50};
  if (doc.contains("coverageNs")) {
    if (!doc.at("coverageNs").is_array()) bad("/coverageNs", "expected an array of sizes");
    cfg.coverage_ns.clear();
    for (size_t i = 0; i < doc.at("coverageNs").size(); ++i) {
      const Json& n = doc.at("coverageNs")[i];
      if (!n.is_number_unsigned() || n.get<uint64_t>() == 0)
        bad("/coverageNs/" + std::to_string(i), "expected a positive size");
      cfg.coverage_ns.push_back(n.get<size_t>());
    }
  }

  if (doc.contains("generation"))
    generation_block(doc.at("generation"), "/generation", cfg.generation);
  if (doc.contains("postamble"))
    cfg.postamble = postamble_block(doc.at("postamble"), "/postamble");

  if (!doc.contains("suites") || !doc.at("suites").is_array() || doc.at("suites").empty())
    bad("/suites", "expected a non-empty array");
  std::set<std::string> names;
  for (size_t i = 0; i < doc.at("suites").size(); ++i) {
    const std::string pointer = "/suites/" + std::to_string(i);
    const Json& s = doc.at("suites")[i];
    if (!s.is_object() || !s.contains("kind")) bad(pointer, "expected {kind, ...}");
    lab::SuiteConfig sc;
    try {
      sc.kind = lab::suite_kind_parse(s.at("kind").get<std::string>());
    } catch (const MbtError& e) {
      bad(pointer + "/kind", e.what());
    }
    sc.name = s.value("name", lab::suite_kind_name(sc.kind));
    if (sc.name.empty() || sc.name.back() == '*')
      bad(pointer + "/name", "row names must be non-empty and must not end in '*'");
    if (!names.insert(sc.name).second) bad(pointer + "/name", "duplicate row name");
    sc.size = s.value("size", 0);
    sc.seed = s.value("seed", 0ULL);
    switch (sc.kind) {
      case lab::SuiteKind::A:
      case lab::SuiteKind::E:
      case lab::SuiteKind::F:
      case lab::SuiteKind::G:
        sc.path = path_field(s, pointer, "path", base, true);
        break;
      case lab::SuiteKind::B: {
        if (!s.contains("specs") || !s.at("specs").is_array() || s.at("specs").empty())
          bad(pointer + "/specs", "kind B needs a non-empty spec file array");
        for (size_t k = 0; k < s.at("specs").size(); ++k) {
          if (!s.at("specs")[k].is_string())
            bad(pointer + "/specs/" + std::to_string(k), "expected a path string");
          std::filesystem::path p = s.at("specs")[k].get<std::string>();
          if (p.is_relative() && !base.empty()) p = base / p;
          sc.spec_files.push_back(p.lexically_normal().string());
        }
        if (s.contains("size") && sc.size < 1) bad(pointer + "/size", "must be >= 1");
        break;
      }
      case lab::SuiteKind::C:
      case lab::SuiteKind::D:
        if (sc.size < 1) bad(pointer + "/size", "generated kinds need size >= 1");
        if (sc.kind == lab::SuiteKind::D)
          sc.sanity_spec = path_field(s, pointer, "sanity", base, false);
        break;
    }
    cfg.suites.push_back(std::move(sc));
  }

  if (doc.contains("unions")) {
    if (!doc.at("unions").is_array()) bad("/unions", "expected an array");
    for (size_t i = 0; i < doc.at("unions").size(); ++i) {
      const std::string pointer = "/unions/" + std::to_string(i);
      const Json& u = doc.at("unions")[i];
      if (!u.is_object() || !u.contains("name") || !u.contains("of"))
        bad(pointer, "expected {name, of}");
      lab::UnionConfig uc;
      uc.name = u.at("name").get<std::string>();
      if (uc.name.empty() || !names.insert(uc.name).second)
        bad(pointer + "/name", "empty or duplicate row name");
      if (!u.at("of").is_array() || u.at("of").size() < 2)
        bad(pointer + "/of", "expected at least two member names");
      for (const auto& m : u.at("of")) uc.of.push_back(m.get<std::string>());
      cfg.unions.push_back(std::move(uc));
    }
  }

  return cfg;
}

}  // namespace mbt::dsl

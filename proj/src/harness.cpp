#include "mbt/harness.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <csignal>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "mbt/dsl.hpp"

namespace mbt::sut {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// ModelSut

ModelSut::ModelSut(const Model& m, const Validated& v, long long fuel)
    : eng_(m, v),
      universe_(cov::enumerate_universe(m)),
      map_(cov::make_map(universe_)),
      recorder_(universe_, map_),
      st_(eng_.initial_state()),
      fuel_(fuel) {}

void ModelSut::reset() {
  st_ = eng_.initial_state();
  map_ = cov::make_map(universe_);
}

Valuation ModelSut::tick(const Valuation& inputs) {
  StepOptions opt;
  opt.fuel = fuel_;
  opt.observer = &recorder_.observer();
  try {
    return eng_.step(st_, inputs, opt);
  } catch (const MbtError& e) {
    throw SutError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Tick protocol

namespace {

Json dump_present(const Valuation& v) {
  Json out = Json::object();
  for (const auto& [ch, val] : v)
    if (!val.is_absent()) out[ch] = val.term();
  return out;
}

Valuation valuation_from_json(const Json& j) {
  if (!j.is_object()) throw SutError("tick protocol: expected an object of channel terms");
  Valuation out;
  for (const auto& [ch, term] : j.items()) {
    if (!term.is_string()) throw SutError("tick protocol: channel '" + ch + "' is not a term");
    out[ch] = dsl::parse_term(term.get<std::string>());
  }
  return out;
}

}  // namespace

void serve_sut(const Engine& eng, std::istream& in, std::ostream& out, long long fuel) {
  SystemState st = eng.initial_state();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json res = Json::object();
    try {
      Json req = Json::parse(line);
      if (!req.is_object() || !req.contains("inputs"))
        throw MbtError("tick protocol: expected {\"inputs\": {...}}");
      Valuation inputs = valuation_from_json(req.at("inputs"));
      StepOptions opt;
      opt.fuel = fuel;
      res["outputs"] = dump_present(eng.step(st, inputs, opt));
    } catch (const std::exception& e) {
      out << Json{{"error", e.what()}}.dump() << "\n" << std::flush;
      return;
    }
    out << res.dump() << "\n" << std::flush;
  }
}

// ---------------------------------------------------------------------------
// ExecSut

ExecSut::ExecSut(std::vector<std::string> argv) : argv_(std::move(argv)) {
  if (argv_.empty()) throw SutError("ExecSut needs a command line");
}

ExecSut::~ExecSut() { stop(); }

void ExecSut::reset() {
  stop();
  spawn();
}

void ExecSut::spawn() {
  // A dying child must not kill the harness on write.
  std::signal(SIGPIPE, SIG_IGN);
  int to_pipe[2], from_pipe[2];
  if (pipe(to_pipe) != 0) throw SutError("pipe failed");
  if (pipe(from_pipe) != 0) {
    close(to_pipe[0]);
    close(to_pipe[1]);
    throw SutError("pipe failed");
  }
  pid_ = fork();
  if (pid_ < 0) throw SutError("fork failed");
  if (pid_ == 0) {
    dup2(to_pipe[0], 0);
    dup2(from_pipe[1], 1);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    std::vector<char*> argv;
    argv.reserve(argv_.size() + 1);
    for (const auto& s : argv_) argv.push_back(const_cast<char*>(s.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  to_child_ = fdopen(to_pipe[1], "w");
  from_child_ = fdopen(from_pipe[0], "r");
  if (!to_child_ || !from_child_) {
    stop();
    throw SutError("fdopen failed");
  }
}

void ExecSut::stop() {
  if (to_child_) {
    fclose(to_child_);  // EOF tells a well-behaved SUT to exit
    to_child_ = nullptr;
  }
  if (from_child_) {
    fclose(from_child_);
    from_child_ = nullptr;
  }
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

Valuation ExecSut::tick(const Valuation& inputs) {
  if (!to_child_) throw SutError("SUT process not running (reset first)");
  Json req = Json::object();
  req["inputs"] = dump_present(inputs);
  std::string line = req.dump();
  line.push_back('\n');
  if (std::fputs(line.c_str(), to_child_) == EOF || std::fflush(to_child_) != 0)
    throw SutError("write to SUT failed");
  std::string resp;
  for (int c; (c = std::fgetc(from_child_)) != EOF && c != '\n';) resp.push_back(char(c));
  if (resp.empty()) throw SutError("SUT closed its output");
  Json res;
  try {
    res = Json::parse(resp);
  } catch (const nlohmann::json::parse_error& e) {
    throw SutError(std::string("SUT wrote malformed JSON: ") + e.what());
  }
  if (res.contains("error")) throw SutError("SUT error: " + res.at("error").get<std::string>());
  if (!res.is_object() || !res.contains("outputs"))
    throw SutError("tick protocol: expected {\"outputs\": {...}}");
  try {
    return valuation_from_json(res.at("outputs"));
  } catch (const MbtError& e) {
    throw SutError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Test execution

RunResult run_test(Sut& s, const AdapterSpec& adapter, const Engine& abstract_engine,
                   const gen::TestCase& tc, long long fuel) {
  RunResult r;
  r.verdict.case_id = tc.id;
  s.reset();
  std::vector<std::string> out_channels;
  for (const auto& p : abstract_engine.net().outputs) out_channels.push_back(p.name);
  static const OutputRule kExact{};
  for (size_t i = 0; i < tc.steps.size() && r.verdict.pass; ++i) {
    Valuation abstracted;
    try {
      std::vector<Valuation> window;
      for (const auto& t : concretize_step(adapter, tc.steps[i].inputs))
        window.push_back(s.tick(t));
      abstracted =
          abstract_window(adapter, window, out_channels, abstract_engine.sig(), fuel);
    } catch (const SutError&) {
      r.verdict.pass = false;
      r.verdict.mismatch =
          Mismatch{int(i), "exception", Value::absent(), Value::con("SutError")};
      break;
    } catch (const MergeOverflow& e) {
      r.verdict.pass = false;
      r.verdict.mismatch = Mismatch{int(i), e.channel,
                                    valuation_get(tc.steps[i].expected, e.channel),
                                    Value::con("MergeOverflow")};
      break;
    }
    for (const auto& ch : out_channels) {
      const OutputRule* rule = adapter.output_rule(ch);
      if (!rule) rule = &kExact;
      const Value& expected = valuation_get(tc.steps[i].expected, ch);
      const Value& actual = valuation_get(abstracted, ch);
      if (!compare_values(*rule, expected, actual)) {
        r.verdict.pass = false;
        r.verdict.mismatch = Mismatch{int(i), ch, expected, actual};
        break;
      }
    }
  }
  r.sut_coverage = s.coverage();
  return r;
}

// ---------------------------------------------------------------------------
// Failure classification

namespace {

std::string head_of(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Absent: return v.term();  // the epsilon sign
    case Value::Kind::Con: return v.con_name();
    default: return v.term();
  }
}

}  // namespace

std::string FailureSignature::key() const {
  return channel + "|" + expected_head + "|" + actual_head + "@" + phase;
}

FailureSignature failure_signature(const Engine& abstract_engine, const gen::TestCase& tc,
                                   const Mismatch& mm, long long fuel) {
  FailureSignature sig;
  sig.channel = mm.channel;
  sig.expected_head = head_of(mm.expected);
  sig.actual_head = head_of(mm.actual);
  SystemState st = abstract_engine.initial_state();
  StepOptions opt;
  opt.fuel = fuel;
  try {
    for (int i = 0; i < mm.step && i < int(tc.steps.size()); ++i)
      abstract_engine.step(st, tc.steps[i].inputs, opt);
    const Net& net = abstract_engine.net();
    for (size_t k = 0; k < net.instances.size(); ++k) {
      if (k) sig.phase += ",";
      sig.phase += net.instances[k].path + "=" + abstract_engine.control_name(st, int(k));
    }
  } catch (const MbtError&) {
    sig.phase = "?";  // replay failed; group such cases together
  }
  return sig;
}

std::map<std::string, std::vector<std::string>> classify(const Engine& abstract_engine,
                                                         const gen::Suite& suite,
                                                         const std::vector<Verdict>& verdicts,
                                                         long long fuel) {
  std::map<std::string, const gen::TestCase*> by_id;
  for (const auto& tc : suite.cases) by_id[tc.id] = &tc;
  std::map<std::string, std::vector<std::string>> classes;
  for (const auto& v : verdicts) {
    if (v.pass || !v.mismatch) continue;
    auto it = by_id.find(v.case_id);
    if (it == by_id.end()) throw MbtError("classify: verdict for unknown case " + v.case_id);
    classes[failure_signature(abstract_engine, *it->second, *v.mismatch, fuel).key()]
        .push_back(v.case_id);
  }
  for (auto& [key, ids] : classes) std::sort(ids.begin(), ids.end());
  return classes;
}

}  // namespace mbt::sut

namespace mbt::dsl {

namespace {
using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& pointer, const std::string& why) {
  throw SchemaError(pointer, why);
}

const Json& need(const Json& j, const char* key, const std::string& pointer) {
  if (!j.is_object() || !j.contains(key)) bad(pointer + "/" + key, "missing");
  return j.at(key);
}
}  // namespace

std::string print_verdicts(const std::vector<sut::Verdict>& vs) {
  Json cases = Json::array();
  for (const auto& v : vs) {
    Json c = Json::object();
    c["case_id"] = v.case_id;
    c["pass"] = v.pass;
    if (!v.pass && v.mismatch) {
      Json m = Json::object();
      m["step"] = v.mismatch->step;
      m["channel"] = v.mismatch->channel;
      m["expected"] = v.mismatch->expected.term();
      m["actual"] = v.mismatch->actual.term();
      c["mismatch"] = std::move(m);
    }
    cases.push_back(std::move(c));
  }
  Json doc = Json::object();
  doc["cases"] = std::move(cases);
  return doc.dump(2) + "\n";
}

std::vector<sut::Verdict> parse_verdicts(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad("", std::string("not valid JSON: ") + e.what());
  }
  const Json& cases = need(doc, "cases", "");
  if (!cases.is_array()) bad("/cases", "expected an array");
  std::vector<sut::Verdict> out;
  for (size_t i = 0; i < cases.size(); ++i) {
    std::string cp = "/cases/" + std::to_string(i);
    const Json& c = cases[i];
    sut::Verdict v;
    v.case_id = need(c, "case_id", cp).get<std::string>();
    const Json& pass = need(c, "pass", cp);
    if (!pass.is_boolean()) bad(cp + "/pass", "expected a boolean");
    v.pass = pass.get<bool>();
    if (!v.pass) {
      const Json& m = need(c, "mismatch", cp);
      sut::Mismatch mm;
      mm.step = need(m, "step", cp + "/mismatch").get<int>();
      mm.channel = need(m, "channel", cp + "/mismatch").get<std::string>();
      try {
        mm.expected = parse_term(need(m, "expected", cp + "/mismatch").get<std::string>());
        mm.actual = parse_term(need(m, "actual", cp + "/mismatch").get<std::string>());
      } catch (const ParseError& e) {
        bad(cp + "/mismatch", e.what());
      }
      v.mismatch = std::move(mm);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mbt::dsl

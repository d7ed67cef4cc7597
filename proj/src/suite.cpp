#include "mbt/suite.hpp"

#include <json.hpp>

#include "mbt/dsl.hpp"

namespace mbt::gen {

uint64_t input_hash(const TestCase& tc) {
  uint64_t h = fnv1a("inputs");
  for (const auto& step : tc.steps) {
    h = fnv1a("|", h);
    for (const auto& [ch, v] : step.inputs) {
      if (v.is_absent()) continue;  // Absent and missing keys hash alike
      h = fnv1a(ch, h);
      h = fnv1a("=", h);
      h = fnv1a(v.term(), h);
      h = fnv1a(";", h);
    }
  }
  return h;
}

}  // namespace mbt::gen

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

Valuation parse_valuation(const Json& j, const std::string& pointer) {
  if (!j.is_object()) bad(pointer, "expected an object of channel terms");
  Valuation out;
  for (const auto& [ch, term] : j.items()) {
    if (!term.is_string()) bad(pointer + "/" + ch, "expected a term string");
    try {
      out[ch] = parse_term(term.get<std::string>());
    } catch (const ParseError& e) {
      bad(pointer + "/" + ch, e.what());
    }
  }
  return out;
}

Json dump_valuation(const Valuation& v) {
  Json out = Json::object();
  for (const auto& [ch, val] : v) out[ch] = val.term();
  return out;
}

}  // namespace

gen::Suite parse_suite(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad("", std::string("not valid JSON: ") + e.what());
  }
  gen::Suite s;

  const Json& mh = need(doc, "model_hash", "");
  if (!mh.is_string()) bad("/model_hash", "expected a hex string");
  try {
    s.model_hash = std::stoull(mh.get<std::string>(), nullptr, 16);
  } catch (const std::exception&) {
    bad("/model_hash", "expected a hex string");
  }

  const Json& g = need(doc, "generator", "");
  const Json& kind = need(g, "kind", "/generator");
  if (!kind.is_string() || kind.get<std::string>().size() != 1 ||
      kind.get<std::string>()[0] < 'A' || kind.get<std::string>()[0] > 'G')
    bad("/generator/kind", "expected one of \"A\"..\"G\"");
  s.generator.kind = kind.get<std::string>();
  const Json& seed = need(g, "seed", "/generator");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    bad("/generator/seed", "expected an integer");
  s.generator.seed = seed.get<uint64_t>();
  if (g.contains("spec_id")) s.generator.spec_id = g.at("spec_id").get<std::string>();
  if (g.contains("duplicates_dropped"))
    s.generator.duplicates_dropped = g.at("duplicates_dropped").get<uint64_t>();
  if (g.contains("timed_out")) s.generator.timed_out = g.at("timed_out").get<bool>();

  const Json& cases = need(doc, "cases", "");
  if (!cases.is_array()) bad("/cases", "expected an array");
  for (size_t i = 0; i < cases.size(); ++i) {
    std::string cp = "/cases/" + std::to_string(i);
    const Json& c = cases[i];
    gen::TestCase tc;
    tc.id = need(c, "id", cp).get<std::string>();
    tc.length = need(c, "length", cp).get<int>();
    tc.postamble_length = need(c, "postamble_length", cp).get<int>();
    if (tc.length < 0 || tc.postamble_length < 0) bad(cp + "/length", "negative length");
    const Json& steps = need(c, "steps", cp);
    if (!steps.is_array()) bad(cp + "/steps", "expected an array");
    if (static_cast<int>(steps.size()) != tc.length + tc.postamble_length)
      bad(cp + "/steps", "step count " + std::to_string(steps.size()) +
                             " does not equal length + postamble_length = " +
                             std::to_string(tc.length + tc.postamble_length));
    for (size_t k = 0; k < steps.size(); ++k) {
      std::string sp = cp + "/steps/" + std::to_string(k);
      gen::Step step;
      step.inputs = parse_valuation(need(steps[k], "inputs", sp), sp + "/inputs");
      step.expected = parse_valuation(need(steps[k], "expected", sp), sp + "/expected");
      tc.steps.push_back(std::move(step));
    }
    s.cases.push_back(std::move(tc));
  }
  return s;
}

std::string print_suite(const gen::Suite& s) {
  Json doc;
  doc["model_hash"] = hex64(s.model_hash);
  Json g;
  g["kind"] = s.generator.kind;
  g["seed"] = s.generator.seed;
  if (s.generator.spec_id) g["spec_id"] = *s.generator.spec_id;
  if (s.generator.duplicates_dropped) g["duplicates_dropped"] = s.generator.duplicates_dropped;
  if (s.generator.timed_out) g["timed_out"] = true;
  doc["generator"] = std::move(g);
  Json cases = Json::array();
  for (const auto& tc : s.cases) {
    Json c;
    c["id"] = tc.id;
    c["length"] = tc.length;
    c["postamble_length"] = tc.postamble_length;
    Json steps = Json::array();
    for (const auto& step : tc.steps) {
      Json st;
      st["inputs"] = dump_valuation(step.inputs);
      st["expected"] = dump_valuation(step.expected);
      steps.push_back(std::move(st));
    }
    c["steps"] = std::move(steps);
    cases.push_back(std::move(c));
  }
  doc["cases"] = std::move(cases);
  return doc.dump(2) + "\n";
}

}  // namespace mbt::dsl

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mbt/generate.hpp"
#include "mbt/stats.hpp"

namespace mbt::lab {

// The suite taxonomy: manual/automatic x model/no-model x with/without
// functional test case specifications. A/E/F/G are loaded from files, B/C/D
// are generated.
enum class SuiteKind { A, B, C, D, E, F, G };

std::string suite_kind_name(SuiteKind k);
SuiteKind suite_kind_parse(const std::string& s);  // throws MbtError on unknown names

struct SuiteConfig {
  SuiteKind kind = SuiteKind::C;
  std::string name;                     // unique row label, defaults to the kind letter
  std::string path;                     // A/E/F/G: suite file
  std::vector<std::string> spec_files;  // B: functional spec families (JSON, possibly arrays)
  std::string sanity_spec;              // D: optional input-only sanity spec file
  int size = 0;                         // C/D: case count; B: optional pool cap (0 = none)
  uint64_t seed = 0;                    // generated kinds: per-suite salt on the master seed
};

// A pseudo-suite unioned from named rows (the hand-crafted A with F, say).
struct UnionConfig {
  std::string name;
  std::vector<std::string> of;
};

struct ExperimentConfig {
  std::string model_path;    // abstract model (oracle + generation)
  std::string sut_path;      // concrete implementation model (fault-seeding target)
  std::string adapter_path;  // concretization/abstraction bridge
  std::string mutants_path;  // mutant manifest; empty = no seeded faults
  std::string out_dir;
  uint64_t master_seed = 0;
  int resample_count = 25;
  double ci_level = 0.98;
  std::vector<size_t> coverage_ns;  // subsample sizes for the coverage-vs-n table
  gen::GenerationConfig generation;
  std::optional<gen::ObservationProtocol> postamble;
  std::vector<SuiteConfig> suites;
  std::vector<UnionConfig> unions;
  long long fuel = 100000;
};

// One report row. Cumulated rows (kind stars such as "B*", and configured
// unions) aggregate their members: sizes add (after input dedupe), class and
// kill sets union, coverage maps OR together.
struct SuiteReport {
  std::string name;
  std::string kind;  // "A".."G", or "union"
  bool cumulated = false;
  size_t size = 0;
  std::set<std::string> classes;  // distinct failure classes across all mutants
  std::set<std::string> killed;   // mutant ids with at least one failing case
  double model_cov = 0.0;
  double sut_cov = 0.0;
  std::vector<std::string> members;  // cumulated rows: constituent row names
};

struct DiffCell {
  std::string x, y;
  size_t x_not_y = 0;  // |classes(x) \ classes(y)|
  size_t y_not_x = 0;
};

struct CoveragePoint {
  std::string suite;
  size_t n = 0;
  double mean = 0.0;
  double half_width = 0.0;
};

struct ExperimentReport {
  uint64_t model_hash = 0;
  uint64_t sut_hash = 0;
  uint64_t master_seed = 0;
  size_t mutant_count = 0;
  std::vector<SuiteReport> suites;  // config order, then kind stars, then unions
  std::vector<DiffCell> diff;       // unordered pairs in row order
  std::vector<CoveragePoint> coverage_vs_n;
  std::optional<Correlation> model_cov_vs_errors;
  std::optional<Correlation> sut_cov_vs_errors;
  std::optional<Correlation> model_cov_vs_sut_cov;
  std::vector<std::string> phase_errors;  // "<phase>: <what>" for survivable failures
};

// Runs the whole experiment: generates B/C/D, loads A/E/F/G, measures model
// coverage by replay and SUT coverage through the adapter against the
// unmutated SUT, runs every suite against every mutant, and aggregates
// classes, kills, difference sets, subsampled coverage curves, and
// correlations. Survivable phase failures (a spec yielding nothing, a stale
// suite file, degenerate correlation input) are recorded in phase_errors and
// the affected figure is left empty; config/model/adapter problems throw.
ExperimentReport run_lab(const ExperimentConfig& cfg);

// Writes report.json, suites.csv, coverage_vs_n.csv, diff_matrix.csv and
// plot-ready .dat files under dir (created if missing). Byte-deterministic
// given an identical report.
void emit_report(const ExperimentReport& rep, const std::string& dir);

// One-screen text rendering of an emitted report.json (the `report` verb).
std::string summarize_report(const std::string& report_json);

}  // namespace mbt::lab

namespace mbt::dsl {

// Config files are JSON; relative paths are resolved against base_dir.
// Throws SchemaError with a JSON-pointer path on malformed documents.
lab::ExperimentConfig parse_experiment_config(const std::string& text,
                                              const std::string& base_dir);

// The {generation, postamble} blocks of a config as a standalone document,
// e.g. the gen tool's --gen-config file. Both blocks are optional.
struct GenSettings {
  gen::GenerationConfig config;
  std::optional<gen::ObservationProtocol> postamble;
};
GenSettings parse_gen_settings(const std::string& text);

}  // namespace mbt::dsl

#pragma once
// Experiment harness: named verification suites over the simulation library,
// a flat key=value configuration, deterministic replica fan-out, and artifact
// emission (per-replica CSV rows plus one aggregated JSON report).
//
// Determinism contract: every random quantity inside a suite is keyed by
// (config seed, replica index), never by scheduling, so reruns and different
// parallelism degrees produce byte-identical artifacts.

#include <sh/stats.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sh::harness {

// Run configuration.  `parameters` carries suite-specific knobs as text
// (parsed on access); unknown keys are ignored by suites that do not read
// them, so one config file can drive several suites.
struct ExperimentConfig {
  std::string suite;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int parallelism = 1;

  // Typed parameter access with defaults; throws std::invalid_argument on
  // unparseable text.
  double real(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::int64_t replicas(std::int64_t fallback) const;
};

// Applies one key=value setting.  The keys `suite`, `seed`, `out` /
// `output_dir` and `parallelism` map onto the typed fields; everything else
// lands in `parameters`.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// Parses a flat key=value file: one setting per line, '#' starts a comment,
// blank lines ignored.  Throws std::runtime_error when the file is missing
// and std::invalid_argument on a malformed line.
ExperimentConfig load_config(const std::string& path);

// Result of one suite run, before anything touches the filesystem.
struct SuiteOutcome {
  std::vector<stats::TestReport> reports;
  std::string replica_header;             // header of replicas.csv
  std::vector<std::string> replica_rows;  // one formatted row per replica
  // Extra named artifacts (file name -> full content), e.g. plot data.
  std::vector<std::pair<std::string, std::string>> artifacts;
  bool gating = true;  // non-gating suites never fail the run
};

// Registered suite names, in registration order.
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

// Runs one registered suite.  Throws std::invalid_argument for an unknown
// suite name and std::runtime_error on data errors.
SuiteOutcome run_suite(const ExperimentConfig& config);

// Serializes an outcome into the byte-exact artifact set that
// run_experiment would write (used by the determinism suite).
std::string serialize_outcome(const SuiteOutcome& outcome);

// Writes `reports` as a single JSON array to `path` (schema: suite,
// statistic, expected, dispersion, score, pass, replicas, seed) and returns
// a human-readable summary table ending in a "<passed>/<total> pass" line.
std::string emit_report(const std::vector<stats::TestReport>& reports, const std::string& path);

// Full pipeline: run the configured suite, write replicas.csv, report.json
// and any extra artifacts under config.output_dir, print the summary.
// Returns 0 when every report passes (or the suite is non-gating), 1 on a
// gating failure or data error, 2 for an unknown suite.
int run_experiment(const ExperimentConfig& config);

}  // namespace sh::harness

#pragma once

// Experiment harness: configuration, dispatch and export of reports and data.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace kpzlab::cli {

/// Resolved configuration. Keys of the JSON form mirror the flags, with '_'
/// in place of '-'. Output directory and thread count are not part of the
/// experiment identity and are left out of the hash.
struct ExperimentConfig {
  std::string command;
  std::uint64_t seed = 1;
  int n = 0;
  int size = 0;
  int k = 0;
  int replicas = 0;
  std::vector<int> sizes;
  int scales = 0;
  std::vector<double> gaps;
  std::int64_t count = 0;
  std::int64_t dual_count = 0;
  int rw_steps = 0;
  int rw_scales = 0;
  int rw_replicas = 0;
  int grid = 0;
  int spacing = 0;
  int sources = 0;
  std::vector<int> heights;
  int tri_sources = 0;
  int tri_spacing = 0;
  int tri_height = 0;
  int tri_k_factor = 0;
  int tri_replicas = 0;
  std::vector<double> m_values;
  std::vector<double> interval_i;
  std::vector<double> interval_j;

  std::string out = "out";
  int threads = 0;
};

const std::vector<std::string>& commands();

/// Defaults of every field for one subcommand; throws a configuration error
/// for an unknown command.
ExperimentConfig defaults(const std::string& command);

/// Overlays the keys of a JSON object. `source` names the origin in
/// diagnostics; `text`, when given, is searched for the offending line.
void apply(ExperimentConfig& config, const nlohmann::json& object, const std::string& source,
           const std::string& text = {});

/// Checks ranges and cross-field constraints.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);  // without out and threads
std::string config_hash(const ExperimentConfig& config);

struct Assertion {
  std::string name;
  std::string relation;  // within, below, at_least, at_most, equal
  double expected = 0;
  double observed = 0;
  double tolerance = 0;
  bool passed = false;
};

Assertion within(std::string name, double expected, double observed, double tolerance);
Assertion below(std::string name, double bound, double observed);
Assertion at_least(std::string name, double bound, double observed);
Assertion at_most(std::string name, double bound, double observed);
Assertion equal(std::string name, double expected, double observed);

struct Outcome {
  nlohmann::ordered_json report;
  std::vector<Assertion> assertions;
  int status = 0;  // 0 all passed, 1 assertion failed, 3 insufficient certification
};

/// Runs the experiment and writes report.json, config.lock.json, the CSV
/// files and a timestamp sidecar under config.out.
Outcome run(const ExperimentConfig& config);

/// Parses argv into a resolved configuration (subcommand defaults, then the
/// --config file, then flags). Throws CLI11 exceptions for help/usage and
/// kpzlab::Error for invalid values.
ExperimentConfig parse_command_line(int argc, const char* const* argv);

/// Full command-line entry point; returns the process exit status.
int main(int argc, const char* const* argv);

}  // namespace kpzlab::cli

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwem/baseline.hpp"
#include "mwem/data_io.hpp"
#include "mwem/mwem.hpp"
#include "mwem/synthetic.hpp"

namespace mwem {

struct WorkloadSpec {
  enum class Type { random_range, parity, cuboids, file };
  Type type = Type::random_range;
  std::size_t count = 100;     // random_range
  int max_order = 3;           // parity / cuboids
  bool include_empty = false;  // cuboids: also emit the total-count cuboid
  std::string path;            // file
};

struct SyntheticSpec {
  enum class Kind { none, independent, chain };
  Kind kind = Kind::none;
  std::size_t rows = 1000;
  std::size_t attributes = 8;
  double p = 0.1;          // independent
  double flip_prob = 0.1;  // chain
};

struct ExperimentConfig {
  enum class Mode { explicit_mode, factored };
  enum class Algorithm { mwem, baseline };

  std::string input;  // CSV path; empty when synthetic data is configured
  SyntheticSpec synthetic;
  SchemaSpec schema;              // empty columns = infer from the file
  std::string binarize = "none";  // none | bitwise-log | one-hot
  Mode mode = Mode::explicit_mode;
  Algorithm algorithm = Algorithm::mwem;
  WorkloadSpec workload;
  MwemConfig mwem;
  double delta = 0.0;  // reporting only: recharacterized epsilon'
  bool baseline_include_total = false;
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string export_mode = "none";  // none | weighted | sampled

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig from_json_file(const std::string& path);
  nlohmann::json to_json() const;
  void validate() const;
};

struct ExperimentSummary {
  // One metric->value map per repetition, in repetition order.
  std::vector<std::map<std::string, double>> per_repetition;
  // metric -> (mean, population std) across repetitions.
  std::map<std::string, std::pair<double, double>> aggregates;
  std::string report_csv;
  std::string trace_json;
};

// Runs the configured algorithm `repetitions` times (repetition r is seeded
// with base seed + r; repetitions run in parallel), writes report.csv,
// trace.json and any synthetic exports under out_dir, and returns the
// summary. Every output embeds the config and seed.
ExperimentSummary run_experiment(const ExperimentConfig& config);

// Grid sweep over epsilon and iteration counts; writes one aggregate row per
// (epsilon, T, metric) to <out_dir>/sweep.csv.
void run_sweep(const ExperimentConfig& base, const std::vector<double>& epsilons,
               const std::vector<int>& iteration_counts);

}  // namespace mwem

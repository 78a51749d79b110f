// Command-line front end: run single experiments, sweep parameter grids,
// convert synthetic exports, and benchmark the factored engine's scaling.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mwem/data_io.hpp"
#include "mwem/experiment.hpp"
#include "mwem/factored.hpp"
#include "mwem/metrics.hpp"
#include "mwem/sensitive.hpp"
#include "mwem/synthetic.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudgetOrResource = 3;

struct CommonFlags {
  std::string config_path;
  std::string input;
  std::string schema;
  std::string mode;
  std::string workload;
  std::string binarize;
  std::string algorithm;
  std::string output_mode;
  std::string export_mode;
  std::string out_dir;
  double epsilon = -1.0;
  double delta = -1.0;
  int iterations = -1;
  int replay_passes = -1;
  std::int64_t seed = -1;
  int reps = -1;
  bool diagnostics = false;
  std::string synthetic;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Experiment config JSON file");
  cmd->add_option("--input", flags.input, "Input CSV (header row, integer-coded values)");
  cmd->add_option("--schema", flags.schema,
                  "Inline schema 'name:card,...' (use 'auto' to infer cardinalities)");
  cmd->add_option("--mode", flags.mode, "Engine: explicit | factored");
  cmd->add_option("--workload", flags.workload,
                  "Workload spec: random-range:COUNT | parity:ORDER | cuboids:ORDER | FILE.json");
  cmd->add_option("--binarize", flags.binarize, "none | bitwise-log | one-hot");
  cmd->add_option("--algorithm", flags.algorithm, "mwem | baseline");
  cmd->add_option("--epsilon", flags.epsilon, "Privacy budget");
  cmd->add_option("--delta", flags.delta, "Report the recharacterized (epsilon', delta) guarantee");
  cmd->add_option("--T,--iterations", flags.iterations, "Iteration count");
  cmd->add_option("--replay-passes", flags.replay_passes, "History replay sweeps per round");
  cmd->add_option("--output-mode", flags.output_mode, "last | average");
  cmd->add_option("--seed", flags.seed, "Base seed; repetition r uses seed + r");
  cmd->add_option("--reps", flags.reps, "Independent repetitions");
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--export", flags.export_mode, "Synthetic data export: none | weighted | sampled");
  cmd->add_flag("--diagnostics", flags.diagnostics,
                "Record true scores and potentials (marks the run non-private)");
  cmd->add_option("--synthetic", flags.synthetic,
                  "Synthetic input 'independent:ROWS:ATTRS:P' or 'chain:ROWS:ATTRS:FLIP'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, sep)) out.push_back(piece);
  return out;
}

void apply_workload_flag(mwem::ExperimentConfig& cfg, const std::string& spec) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts.front();
  if (kind == "random-range") {
    cfg.workload.type = mwem::WorkloadSpec::Type::random_range;
    if (parts.size() > 1) cfg.workload.count = std::stoul(parts[1]);
  } else if (kind == "parity") {
    cfg.workload.type = mwem::WorkloadSpec::Type::parity;
    if (parts.size() > 1) cfg.workload.max_order = std::stoi(parts[1]);
  } else if (kind == "cuboids") {
    cfg.workload.type = mwem::WorkloadSpec::Type::cuboids;
    if (parts.size() > 1) cfg.workload.max_order = std::stoi(parts[1]);
  } else {
    cfg.workload.type = mwem::WorkloadSpec::Type::file;
    cfg.workload.path = spec;
  }
}

void apply_synthetic_flag(mwem::ExperimentConfig& cfg, const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() < 3) {
    throw mwem::ConfigError("synthetic spec needs kind:rows:attributes[:param]");
  }
  if (parts[0] == "independent") {
    cfg.synthetic.kind = mwem::SyntheticSpec::Kind::independent;
    if (parts.size() > 3) cfg.synthetic.p = std::stod(parts[3]);
  } else if (parts[0] == "chain") {
    cfg.synthetic.kind = mwem::SyntheticSpec::Kind::chain;
    if (parts.size() > 3) cfg.synthetic.flip_prob = std::stod(parts[3]);
  } else {
    throw mwem::ConfigError("unknown synthetic kind '" + parts[0] + "'");
  }
  cfg.synthetic.rows = std::stoul(parts[1]);
  cfg.synthetic.attributes = std::stoul(parts[2]);
}

mwem::ExperimentConfig build_config(const CommonFlags& flags) {
  mwem::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = mwem::ExperimentConfig::from_json_file(flags.config_path);
  }
  if (!flags.input.empty()) cfg.input = flags.input;
  if (!flags.schema.empty()) cfg.schema = mwem::SchemaSpec::parse(flags.schema);
  if (!flags.mode.empty()) {
    if (flags.mode == "explicit") {
      cfg.mode = mwem::ExperimentConfig::Mode::explicit_mode;
    } else if (flags.mode == "factored") {
      cfg.mode = mwem::ExperimentConfig::Mode::factored;
    } else {
      throw mwem::ConfigError("unknown mode '" + flags.mode + "'");
    }
  }
  if (!flags.algorithm.empty()) {
    if (flags.algorithm == "mwem") {
      cfg.algorithm = mwem::ExperimentConfig::Algorithm::mwem;
    } else if (flags.algorithm == "baseline") {
      cfg.algorithm = mwem::ExperimentConfig::Algorithm::baseline;
    } else {
      throw mwem::ConfigError("unknown algorithm '" + flags.algorithm + "'");
    }
  }
  if (!flags.workload.empty()) apply_workload_flag(cfg, flags.workload);
  if (!flags.synthetic.empty()) apply_synthetic_flag(cfg, flags.synthetic);
  if (!flags.binarize.empty()) cfg.binarize = flags.binarize;
  if (flags.epsilon > 0) cfg.mwem.epsilon = flags.epsilon;
  if (flags.delta >= 0) cfg.delta = flags.delta;
  if (flags.iterations > 0) cfg.mwem.iterations = flags.iterations;
  if (flags.replay_passes >= 0) cfg.mwem.replay_passes = flags.replay_passes;
  if (!flags.output_mode.empty()) {
    if (flags.output_mode == "last") {
      cfg.mwem.output_mode = mwem::OutputMode::last;
    } else if (flags.output_mode == "average") {
      cfg.mwem.output_mode = mwem::OutputMode::average;
    } else {
      throw mwem::ConfigError("unknown output mode '" + flags.output_mode + "'");
    }
  }
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.reps > 0) cfg.repetitions = flags.reps;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.export_mode.empty()) cfg.export_mode = flags.export_mode;
  if (flags.diagnostics) cfg.mwem.diagnostics = true;
  cfg.validate();
  return cfg;
}

int cmd_run(const CommonFlags& flags) {
  const mwem::ExperimentConfig cfg = build_config(flags);
  const mwem::ExperimentSummary summary = mwem::run_experiment(cfg);
  std::cout << "wrote " << summary.report_csv << " and " << summary.trace_json << '\n';
  for (const auto& [metric, ms] : summary.aggregates) {
    std::cout << "  " << metric << ": mean=" << ms.first << " std=" << ms.second << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& flags, const std::string& epsilon_list,
              const std::string& t_list) {
  const mwem::ExperimentConfig cfg = build_config(flags);
  std::vector<double> epsilons;
  for (const std::string& e : split(epsilon_list, ',')) {
    if (!e.empty()) epsilons.push_back(std::stod(e));
  }
  std::vector<int> iteration_counts;
  for (const std::string& t : split(t_list, ',')) {
    if (!t.empty()) iteration_counts.push_back(std::stoi(t));
  }
  mwem::run_sweep(cfg, epsilons, iteration_counts);
  std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / "sweep.csv").string() << '\n';
  return kExitOk;
}

// Converts a weighted-domain export into sampled records (or re-emits it
// normalized); the schema names the attribute columns.
int cmd_export(const std::string& weighted_path, const std::string& schema_text,
               const std::string& format, const std::string& out_path, std::int64_t seed) {
  const mwem::SchemaSpec spec = mwem::SchemaSpec::parse(schema_text);
  std::vector<mwem::Attribute> attrs;
  for (const mwem::ColumnSpec& col : spec.columns) {
    if (col.infer || col.cardinality < 2) {
      throw mwem::ConfigError("export needs explicit cardinalities in the schema");
    }
    attrs.push_back({col.name, col.cardinality});
  }
  const mwem::UniversePtr universe =
      mwem::Universe::create(mwem::AttributeSchema(std::move(attrs)));
  const mwem::Histogram hist = mwem::read_weighted_csv(weighted_path, universe);
  mwem::RngStream rng(seed >= 0 ? static_cast<std::uint64_t>(seed) : 1);
  const mwem::ExportFormat fmt =
      format == "weighted" ? mwem::ExportFormat::weighted : mwem::ExportFormat::sampled;
  mwem::export_synthetic(hist, out_path, fmt, rng);
  std::cout << "wrote " << out_path << '\n';
  return kExitOk;
}

// Scaling harness: factored runs over synthetic binary data across attribute
// counts, reporting time inside the update logic, time answering queries
// against the records, and the peak weight-table footprint.
int cmd_bench(const std::string& attrs_list, std::size_t records, double p, int iterations,
              int queries_per_attribute, int replay_passes, double epsilon, std::int64_t seed,
              const std::string& out_path, bool curve) {
  std::ofstream out(out_path);
  if (!out) throw mwem::ConfigError("cannot open output file '" + out_path + "'");
  out.precision(17);
  out << "# bench records=" << records << " p=" << p << " epsilon=" << epsilon
      << " seed=" << seed << " replay_passes=" << replay_passes << '\n';
  if (curve) {
    out << "attributes,iteration,elapsed_ms,max_error\n";
  } else {
    out << "attributes,records,iterations,workload_size,mwem_logic_ms,source_eval_ms,total_ms,"
           "peak_table_entries\n";
  }
  for (const std::string& a : split(attrs_list, ',')) {
    if (a.empty()) continue;
    const std::size_t attrs = std::stoul(a);
    mwem::RngStream data_rng(static_cast<std::uint64_t>(seed));
    const mwem::RecordTable table =
        mwem::synthetic_binary_independent(records, attrs, p, data_rng);
    const mwem::UniversePtr universe = mwem::Universe::create(table.schema());

    std::vector<mwem::LinearQuery> queries;
    mwem::RngStream workload_rng(static_cast<std::uint64_t>(seed) + 1);
    for (std::size_t attr = 0; attr < attrs; ++attr) {
      queries.push_back(mwem::LinearQuery::cell(universe, {{attr, 1}}));
      for (int q = 1; q < queries_per_attribute; ++q) {
        queries.push_back(q % 2 ? mwem::LinearQuery::parity(universe, {attr})
                                : mwem::LinearQuery::cell(universe, {{attr, 0}}));
      }
    }
    const mwem::Workload workload(std::move(queries), "bench single-attribute");

    mwem::MwemConfig cfg;
    cfg.iterations = iterations > 0 ? iterations : static_cast<int>(attrs);
    cfg.epsilon = epsilon;
    cfg.replay_passes = replay_passes;
    cfg.diagnostics = curve;
    mwem::RngStream rng(static_cast<std::uint64_t>(seed) + 2);
    const mwem::FactoredRunResult result =
        mwem::run_mwem_factored(table, workload, cfg, rng);
    if (curve) {
      for (std::size_t i = 0; i < result.trace.rounds.size(); ++i) {
        out << attrs << ',' << i + 1 << ',' << result.trace.rounds[i].elapsed_ms << ','
            << result.trace.rounds[i].max_error << '\n';
      }
    } else {
      out << attrs << ',' << records << ',' << cfg.iterations << ',' << workload.size() << ','
          << result.stats.mwem_logic_ms << ',' << result.stats.source_eval_ms << ','
          << result.stats.total_ms << ',' << result.stats.peak_table_entries << '\n';
    }
    std::cout << "attrs=" << attrs << " mwem_logic_ms=" << result.stats.mwem_logic_ms
              << " total_ms=" << result.stats.total_ms
              << " peak_entries=" << result.stats.peak_table_entries << '\n';
  }
  std::cout << "wrote " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic data via multiplicative weights"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and write report/trace files");
  add_common_flags(run, run_flags);

  CommonFlags sweep_flags;
  std::string epsilon_list, t_list;
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep epsilon/iteration grids");
  add_common_flags(sweep, sweep_flags);
  sweep->add_option("--epsilon-list", epsilon_list, "Comma-separated epsilons");
  sweep->add_option("--T-list", t_list, "Comma-separated iteration counts");

  std::string export_weighted, export_schema, export_format = "sampled",
              export_out = "synthetic.csv";
  std::int64_t export_seed = 1;
  CLI::App* exp = app.add_subcommand("export", "Convert a weighted-domain CSV");
  exp->add_option("--weighted", export_weighted, "Weighted-domain CSV (from a run)")->required();
  exp->add_option("--schema", export_schema, "Schema 'name:card,...'")->required();
  exp->add_option("--format", export_format, "weighted | sampled");
  exp->add_option("--out", export_out, "Output path");
  exp->add_option("--seed", export_seed, "Sampling seed");

  std::string bench_attrs = "100,200,400,800,1000", bench_out = "bench.csv";
  std::size_t bench_records = 100000;
  double bench_p = 0.1, bench_epsilon = 1.0;
  int bench_T = -1, bench_qpa = 1, bench_replay = 100;
  std::int64_t bench_seed = 1;
  bool bench_curve = false;
  CLI::App* bench = app.add_subcommand("bench", "Factored-engine scaling harness");
  bench->add_option("--attrs", bench_attrs, "Comma-separated attribute counts");
  bench->add_option("--records", bench_records, "Synthetic record count");
  bench->add_option("--p", bench_p, "Attribute set probability");
  bench->add_option("--T", bench_T, "Iterations (default: attribute count)");
  bench->add_option("--queries-per-attr", bench_qpa, "Single-attribute queries per attribute");
  bench->add_option("--replay-passes", bench_replay, "History replay sweeps per round");
  bench->add_option("--epsilon", bench_epsilon, "Privacy budget");
  bench->add_option("--seed", bench_seed, "Seed");
  bench->add_option("--out", bench_out, "Output CSV");
  bench->add_flag("--curve", bench_curve,
                  "Emit per-iteration elapsed/max-error series (non-private diagnostics)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, epsilon_list, t_list);
    if (exp->parsed()) {
      return cmd_export(export_weighted, export_schema, export_format, export_out, export_seed);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_attrs, bench_records, bench_p, bench_T, bench_qpa, bench_replay,
                       bench_epsilon, bench_seed, bench_out, bench_curve);
    }
  } catch (const mwem::BudgetExhaustedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudgetOrResource;
  } catch (const mwem::ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudgetOrResource;
  } catch (const mwem::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mwem::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

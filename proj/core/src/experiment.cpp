#include "mwem/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "mwem/metrics.hpp"
#include "mwem/sensitive.hpp"
#include "mwem/workload_io.hpp"

namespace mwem {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid config JSON: " + std::string(e.what()));
  }
  return from_json(doc);
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig cfg;
  try {
    cfg.input = doc.value("input", cfg.input);
    if (doc.contains("synthetic")) {
      const json& syn = doc.at("synthetic");
      const std::string kind = to_lower(syn.value("kind", std::string("independent")));
      if (kind == "independent") {
        cfg.synthetic.kind = SyntheticSpec::Kind::independent;
      } else if (kind == "chain") {
        cfg.synthetic.kind = SyntheticSpec::Kind::chain;
      } else {
        throw ConfigError("unknown synthetic kind '" + kind + "'");
      }
      cfg.synthetic.rows = syn.value("rows", cfg.synthetic.rows);
      cfg.synthetic.attributes = syn.value("attributes", cfg.synthetic.attributes);
      cfg.synthetic.p = syn.value("p", cfg.synthetic.p);
      cfg.synthetic.flip_prob = syn.value("flip_prob", cfg.synthetic.flip_prob);
    }
    if (doc.contains("schema")) {
      const json& schema = doc.at("schema");
      if (schema.is_string()) {
        cfg.schema = SchemaSpec::parse(schema.get<std::string>());
      } else {
        for (const json& col : schema) {
          ColumnSpec spec;
          spec.name = col.at("name").get<std::string>();
          if (col.contains("categories")) {
            spec.categories = col.at("categories").get<std::vector<std::string>>();
          } else if (col.contains("cardinality")) {
            spec.cardinality = col.at("cardinality").get<std::uint32_t>();
          } else {
            spec.infer = true;
          }
          cfg.schema.columns.push_back(std::move(spec));
        }
      }
    }
    cfg.binarize = to_lower(doc.value("binarize", cfg.binarize));
    const std::string mode = to_lower(doc.value("mode", std::string("explicit")));
    if (mode == "explicit") {
      cfg.mode = Mode::explicit_mode;
    } else if (mode == "factored") {
      cfg.mode = Mode::factored;
    } else {
      throw ConfigError("unknown mode '" + mode + "'");
    }
    const std::string algorithm = to_lower(doc.value("algorithm", std::string("mwem")));
    if (algorithm == "mwem") {
      cfg.algorithm = Algorithm::mwem;
    } else if (algorithm == "baseline") {
      cfg.algorithm = Algorithm::baseline;
    } else {
      throw ConfigError("unknown algorithm '" + algorithm + "'");
    }
    if (doc.contains("workload")) {
      const json& w = doc.at("workload");
      const std::string type = to_lower(w.value("type", std::string("random-range")));
      if (type == "random-range") {
        cfg.workload.type = WorkloadSpec::Type::random_range;
      } else if (type == "parity") {
        cfg.workload.type = WorkloadSpec::Type::parity;
      } else if (type == "cuboids") {
        cfg.workload.type = WorkloadSpec::Type::cuboids;
      } else if (type == "file") {
        cfg.workload.type = WorkloadSpec::Type::file;
      } else {
        throw ConfigError("unknown workload type '" + type + "'");
      }
      cfg.workload.count = w.value("count", cfg.workload.count);
      cfg.workload.max_order = w.value("max_order", cfg.workload.max_order);
      cfg.workload.include_empty = w.value("include_empty", cfg.workload.include_empty);
      cfg.workload.path = w.value("path", cfg.workload.path);
    }
    cfg.mwem.epsilon = doc.value("epsilon", cfg.mwem.epsilon);
    cfg.mwem.iterations = doc.value("iterations", cfg.mwem.iterations);
    cfg.delta = doc.value("delta", cfg.delta);
    const std::string output = to_lower(doc.value("output_mode", std::string("last")));
    if (output == "last") {
      cfg.mwem.output_mode = OutputMode::last;
    } else if (output == "average") {
      cfg.mwem.output_mode = OutputMode::average;
    } else {
      throw ConfigError("unknown output mode '" + output + "'");
    }
    cfg.mwem.replay_passes = doc.value("replay_passes", cfg.mwem.replay_passes);
    cfg.mwem.clamp_measurements = doc.value("clamp_measurements", cfg.mwem.clamp_measurements);
    cfg.mwem.histogram_init_fraction =
        doc.value("histogram_init_fraction", cfg.mwem.histogram_init_fraction);
    cfg.mwem.noisy_mass_fraction = doc.value("noisy_mass_fraction", cfg.mwem.noisy_mass_fraction);
    cfg.mwem.adaptive_iterations = doc.value("adaptive_iterations", cfg.mwem.adaptive_iterations);
    cfg.mwem.diagnostics = doc.value("diagnostics", cfg.mwem.diagnostics);
    cfg.baseline_include_total = doc.value("baseline_include_total", cfg.baseline_include_total);
    cfg.repetitions = doc.value("repetitions", cfg.repetitions);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out_dir = doc.value("out", cfg.out_dir);
    cfg.export_mode = to_lower(doc.value("export", cfg.export_mode));
  } catch (const json::exception& e) {
    throw ConfigError("malformed experiment config: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json doc;
  if (!input.empty()) doc["input"] = input;
  if (synthetic.kind != SyntheticSpec::Kind::none) {
    json syn;
    syn["kind"] = synthetic.kind == SyntheticSpec::Kind::independent ? "independent" : "chain";
    syn["rows"] = synthetic.rows;
    syn["attributes"] = synthetic.attributes;
    syn["p"] = synthetic.p;
    syn["flip_prob"] = synthetic.flip_prob;
    doc["synthetic"] = std::move(syn);
  }
  if (!schema.columns.empty()) {
    json cols = json::array();
    for (const ColumnSpec& col : schema.columns) {
      json entry;
      entry["name"] = col.name;
      if (!col.categories.empty()) {
        entry["categories"] = col.categories;
      } else if (!col.infer) {
        entry["cardinality"] = col.cardinality;
      }
      cols.push_back(std::move(entry));
    }
    doc["schema"] = std::move(cols);
  }
  doc["binarize"] = binarize;
  doc["mode"] = mode == Mode::explicit_mode ? "explicit" : "factored";
  doc["algorithm"] = algorithm == Algorithm::mwem ? "mwem" : "baseline";
  json w;
  switch (workload.type) {
    case WorkloadSpec::Type::random_range:
      w["type"] = "random-range";
      w["count"] = workload.count;
      break;
    case WorkloadSpec::Type::parity:
      w["type"] = "parity";
      w["max_order"] = workload.max_order;
      break;
    case WorkloadSpec::Type::cuboids:
      w["type"] = "cuboids";
      w["max_order"] = workload.max_order;
      w["include_empty"] = workload.include_empty;
      break;
    case WorkloadSpec::Type::file:
      w["type"] = "file";
      w["path"] = workload.path;
      break;
  }
  doc["workload"] = std::move(w);
  doc["epsilon"] = mwem.epsilon;
  doc["delta"] = delta;
  doc["iterations"] = mwem.iterations;
  doc["output_mode"] = mwem.output_mode == OutputMode::last ? "last" : "average";
  doc["replay_passes"] = mwem.replay_passes;
  doc["clamp_measurements"] = mwem.clamp_measurements;
  doc["histogram_init_fraction"] = mwem.histogram_init_fraction;
  doc["noisy_mass_fraction"] = mwem.noisy_mass_fraction;
  doc["adaptive_iterations"] = mwem.adaptive_iterations;
  doc["diagnostics"] = mwem.diagnostics;
  doc["baseline_include_total"] = baseline_include_total;
  doc["repetitions"] = repetitions;
  doc["seed"] = seed;
  doc["out"] = out_dir;
  doc["export"] = export_mode;
  return doc;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (input.empty() && synthetic.kind == SyntheticSpec::Kind::none) {
    throw ConfigError("configure an input file or a synthetic dataset");
  }
  if (!input.empty() && synthetic.kind != SyntheticSpec::Kind::none) {
    throw ConfigError("configure either an input file or a synthetic dataset, not both");
  }
  if (binarize != "none" && binarize != "bitwise-log" && binarize != "one-hot") {
    throw ConfigError("unknown binarize strategy '" + binarize + "'");
  }
  if (export_mode != "none" && export_mode != "weighted" && export_mode != "sampled") {
    throw ConfigError("unknown export mode '" + export_mode + "'");
  }
  if (mode == Mode::factored && workload.type == WorkloadSpec::Type::cuboids) {
    throw ConfigError("cuboid workloads run on the explicit engine");
  }
  if (algorithm == Algorithm::baseline && mode == Mode::factored) {
    throw ConfigError("the baseline runs on the explicit engine");
  }
  mwem.validate();
}

namespace {

struct PreparedData {
  RecordTable table;
  UniversePtr universe;
  std::optional<Histogram> hist;  // explicit modes only
  std::optional<Workload> workload;
  std::vector<CuboidGroup> cuboids;
  std::vector<double> true_answers;  // flat workloads
};

RecordTable build_table(const ExperimentConfig& cfg) {
  RecordTable table = [&] {
    if (!cfg.input.empty()) return ingest_csv(cfg.input, cfg.schema);
    RngStream rng(splitmix64(cfg.seed ^ 0x64617461ULL));  // data stream
    switch (cfg.synthetic.kind) {
      case SyntheticSpec::Kind::independent:
        return synthetic_binary_independent(cfg.synthetic.rows, cfg.synthetic.attributes,
                                            cfg.synthetic.p, rng);
      case SyntheticSpec::Kind::chain:
        return synthetic_binary_chain(cfg.synthetic.rows, cfg.synthetic.attributes,
                                      cfg.synthetic.flip_prob, rng);
      case SyntheticSpec::Kind::none:
        break;
    }
    throw ConfigError("no data source configured");
  }();
  if (cfg.binarize == "bitwise-log") {
    return binarize(table, BinarizeStrategy::bitwise_log).table;
  }
  if (cfg.binarize == "one-hot") {
    return binarize(table, BinarizeStrategy::one_hot).table;
  }
  return table;
}

PreparedData prepare(const ExperimentConfig& cfg) {
  PreparedData data{build_table(cfg), nullptr, std::nullopt, std::nullopt, {}, {}};
  data.universe = Universe::create(data.table.schema());

  const bool explicit_mode = cfg.mode == ExperimentConfig::Mode::explicit_mode;
  if (explicit_mode) {
    data.hist = histogram_from_records(data.table);
  }

  if (cfg.algorithm == ExperimentConfig::Algorithm::baseline) {
    return data;  // the baseline builds its own parity workload
  }
  switch (cfg.workload.type) {
    case WorkloadSpec::Type::random_range: {
      RngStream rng(splitmix64(cfg.seed ^ 0x776f726bULL));  // workload stream
      data.workload = random_range_workload(data.universe, cfg.workload.count, rng);
      break;
    }
    case WorkloadSpec::Type::parity:
      data.workload = parity_workload(data.universe, cfg.workload.max_order);
      break;
    case WorkloadSpec::Type::cuboids:
      data.cuboids =
          cuboid_workload(data.universe, cfg.workload.max_order, cfg.workload.include_empty);
      break;
    case WorkloadSpec::Type::file:
      data.workload = load_workload(cfg.workload.path, data.universe);
      break;
  }
  if (data.workload) {
    data.true_answers.resize(data.workload->size());
    if (data.hist) {
      for (std::size_t q = 0; q < data.workload->size(); ++q) {
        data.true_answers[q] = evaluate((*data.workload)[q], *data.hist);
      }
    } else {
      const SensitiveSource source(&data.table);
      for (std::size_t q = 0; q < data.workload->size(); ++q) {
        data.true_answers[q] = source.exact_answer((*data.workload)[q]);
      }
    }
  }
  return data;
}

json ledger_to_json(const BudgetLedger& ledger) {
  json entries = json::array();
  for (const LedgerEntry& e : ledger.entries()) {
    entries.push_back({{"label", e.label}, {"epsilon", e.epsilon_spent}});
  }
  return {{"cap", ledger.cap()}, {"total", ledger.total()}, {"entries", std::move(entries)}};
}

json trace_to_json(const IterationTrace& trace, bool diagnostics) {
  json rounds = json::array();
  for (const TraceEntry& e : trace.rounds) {
    json entry;
    entry["selected"] = e.selected;
    entry["measurement"] = e.measurement;
    entry["elapsed_ms"] = e.elapsed_ms;
    if (diagnostics) {
      entry["true_score"] = e.true_score;
      entry["exact_answer"] = e.exact_answer;
      entry["potential"] = e.potential;
      entry["max_error"] = e.max_error;
    }
    rounds.push_back(std::move(entry));
  }
  json out;
  if (diagnostics) out["psi_initial"] = trace.psi_initial;
  out["rounds"] = std::move(rounds);
  return out;
}

json stats_to_json(const RunStats& stats) {
  return {{"total_ms", stats.total_ms},
          {"mwem_logic_ms", stats.mwem_logic_ms},
          {"source_eval_ms", stats.source_eval_ms},
          {"peak_table_entries", stats.peak_table_entries}};
}

struct RepetitionOutcome {
  std::map<std::string, double> metrics;
  json artifact;
};

double relative_entropy_or_inf(const Histogram& truth, const Histogram& approx) {
  try {
    return relative_entropy(truth, approx);
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::string export_path(const ExperimentConfig& cfg, int rep) {
  const std::string name =
      (cfg.repetitions == 1) ? "synthetic.csv" : "synthetic_rep" + std::to_string(rep) + ".csv";
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void maybe_export(const ExperimentConfig& cfg, int rep, const Histogram& hist, RngStream& rng) {
  if (cfg.export_mode == "none") return;
  const ExportFormat format =
      cfg.export_mode == "weighted" ? ExportFormat::weighted : ExportFormat::sampled;
  export_synthetic(hist, export_path(cfg, rep), format, rng);
}

void maybe_export(const ExperimentConfig& cfg, int rep, const FactoredDistribution& dist,
                  RngStream& rng) {
  if (cfg.export_mode == "none") return;
  const ExportFormat format =
      cfg.export_mode == "weighted" ? ExportFormat::weighted : ExportFormat::sampled;
  export_synthetic(dist, export_path(cfg, rep), format, rng);
}

RepetitionOutcome run_one(const ExperimentConfig& cfg, const PreparedData& data, int rep) {
  RngStream rng(cfg.seed + static_cast<std::uint64_t>(rep));
  RepetitionOutcome out;
  out.artifact["seed"] = cfg.seed + static_cast<std::uint64_t>(rep);

  auto flat_metrics = [&](std::span<const double> approx_answers) {
    const ErrorReport report = error_report(approx_answers, data.true_answers);
    out.metrics["max_error"] = report.max_error;
    out.metrics["mean_abs_error"] = report.mean_error;
    out.metrics["avg_squared_error"] = report.mean_squared_error;
  };

  if (cfg.algorithm == ExperimentConfig::Algorithm::baseline) {
    BaselineConfig bl;
    bl.max_order = cfg.workload.max_order;
    bl.epsilon = cfg.mwem.epsilon;
    bl.replay_passes = cfg.mwem.replay_passes;
    bl.include_total = cfg.baseline_include_total;
    BaselineResult result = run_baseline(*data.hist, bl, rng);
    std::vector<double> approx_answers(result.workload.size()), truth(result.workload.size());
    for (std::size_t q = 0; q < result.workload.size(); ++q) {
      approx_answers[q] = evaluate(result.workload[q], result.synthetic);
      truth[q] = evaluate(result.workload[q], *data.hist);
    }
    const ErrorReport report = error_report(approx_answers, truth);
    out.metrics["max_error"] = report.max_error;
    out.metrics["mean_abs_error"] = report.mean_error;
    out.metrics["avg_squared_error"] = report.mean_squared_error;
    out.metrics["relative_entropy"] = relative_entropy_or_inf(*data.hist, result.synthetic);
    out.metrics["epsilon_spent"] = result.ledger.total();
    json history = json::array();
    for (const HistoryEntry& e : result.history) {
      history.push_back(
          {{"query", e.query_index}, {"measurement", e.measurement}, {"scale", e.scale_factor}});
    }
    out.artifact["history"] = std::move(history);
    out.artifact["ledger"] = ledger_to_json(result.ledger);
    maybe_export(cfg, rep, result.synthetic, rng);
  } else if (!data.cuboids.empty()) {
    CuboidRunResult result = run_mwem_cuboids(*data.hist, data.cuboids, cfg.mwem, rng);
    const ErrorReport report = cuboid_errors(data.cuboids, result.synthetic, *data.hist);
    out.metrics["max_cell_error"] = report.max_error;
    out.metrics["max_cuboid_error"] = report.max_cuboid_error;
    out.metrics["avg_cuboid_error"] = report.mean_cuboid_error;
    out.metrics["relative_entropy"] = relative_entropy_or_inf(*data.hist, result.synthetic);
    out.metrics["epsilon_spent"] = result.ledger.total();
    json history = json::array();
    for (const CuboidHistoryEntry& e : result.history) {
      history.push_back({{"cuboid", e.cuboid_index},
                         {"measurements", e.cell_measurements},
                         {"scales", e.scale_factors}});
    }
    out.artifact["history"] = std::move(history);
    out.artifact["ledger"] = ledger_to_json(result.ledger);
    out.artifact["trace"] = trace_to_json(result.trace, result.non_private_diagnostics);
    out.artifact["stats"] = stats_to_json(result.stats);
    out.artifact["non_private_diagnostics"] = result.non_private_diagnostics;
    maybe_export(cfg, rep, result.synthetic, rng);
  } else if (cfg.mode == ExperimentConfig::Mode::factored) {
    FactoredRunResult result = run_mwem_factored(data.table, *data.workload, cfg.mwem, rng);
    std::vector<double> approx_answers(data.workload->size());
    for (std::size_t q = 0; q < data.workload->size(); ++q) {
      approx_answers[q] = result.averaged
                              ? evaluate((*data.workload)[q], *result.averaged)
                              : factored_evaluate((*data.workload)[q], result.synthetic);
    }
    flat_metrics(approx_answers);
    if (data.universe->has_explicit_size() && data.universe->size() <= (1u << 20)) {
      const Histogram truth = histogram_from_records(data.table);
      const Histogram approx =
          result.averaged ? *result.averaged : export_histogram(result.synthetic);
      out.metrics["relative_entropy"] = relative_entropy_or_inf(truth, approx);
    }
    out.metrics["epsilon_spent"] = result.ledger.total();
    out.metrics["peak_table_entries"] = static_cast<double>(result.stats.peak_table_entries);
    json history = json::array();
    for (const HistoryEntry& e : result.history) {
      history.push_back(
          {{"query", e.query_index}, {"measurement", e.measurement}, {"scale", e.scale_factor}});
    }
    out.artifact["history"] = std::move(history);
    out.artifact["ledger"] = ledger_to_json(result.ledger);
    out.artifact["trace"] = trace_to_json(result.trace, result.non_private_diagnostics);
    out.artifact["stats"] = stats_to_json(result.stats);
    out.artifact["non_private_diagnostics"] = result.non_private_diagnostics;
    maybe_export(cfg, rep, result.synthetic, rng);
  } else {
    MwemResult result = run_mwem(*data.hist, *data.workload, cfg.mwem, rng);
    std::vector<double> approx_answers(data.workload->size());
    for (std::size_t q = 0; q < data.workload->size(); ++q) {
      approx_answers[q] = evaluate((*data.workload)[q], result.synthetic);
    }
    flat_metrics(approx_answers);
    out.metrics["relative_entropy"] = relative_entropy_or_inf(*data.hist, result.synthetic);
    out.metrics["epsilon_spent"] = result.ledger.total();
    json history = json::array();
    for (const HistoryEntry& e : result.history) {
      history.push_back(
          {{"query", e.query_index}, {"measurement", e.measurement}, {"scale", e.scale_factor}});
    }
    out.artifact["history"] = std::move(history);
    out.artifact["ledger"] = ledger_to_json(result.ledger);
    out.artifact["trace"] = trace_to_json(result.trace, result.non_private_diagnostics);
    out.artifact["stats"] = stats_to_json(result.stats);
    out.artifact["non_private_diagnostics"] = result.non_private_diagnostics;
    maybe_export(cfg, rep, result.synthetic, rng);
  }
  if (cfg.delta > 0.0) {
    out.metrics["epsilon_prime"] =
        eps_delta_recharacterize(cfg.mwem.epsilon, cfg.mwem.iterations, cfg.delta);
  }
  return out;
}

std::vector<RepetitionOutcome> run_repetitions(const ExperimentConfig& cfg,
                                               const PreparedData& data) {
  std::vector<RepetitionOutcome> outcomes(cfg.repetitions);
  std::vector<std::future<RepetitionOutcome>> futures;
  futures.reserve(cfg.repetitions);
  for (int r = 0; r < cfg.repetitions; ++r) {
    futures.push_back(
        std::async(std::launch::async, [&cfg, &data, r] { return run_one(cfg, data, r); }));
  }
  for (int r = 0; r < cfg.repetitions; ++r) outcomes[r] = futures[r].get();
  return outcomes;
}

std::map<std::string, std::pair<double, double>> aggregate(
    const std::vector<RepetitionOutcome>& outcomes) {
  std::map<std::string, std::pair<double, double>> agg;
  for (const auto& [metric, value] : outcomes.front().metrics) {
    double sum = 0.0;
    for (const RepetitionOutcome& o : outcomes) sum += o.metrics.at(metric);
    const double mean = sum / static_cast<double>(outcomes.size());
    double var = 0.0;
    for (const RepetitionOutcome& o : outcomes) {
      const double d = o.metrics.at(metric) - mean;
      var += d * d;
    }
    var /= static_cast<double>(outcomes.size());
    agg[metric] = {mean, std::sqrt(var)};
  }
  return agg;
}

void write_report_csv(const std::string& path, const ExperimentConfig& cfg,
                      const std::vector<RepetitionOutcome>& outcomes,
                      const std::map<std::string, std::pair<double, double>>& agg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out.precision(17);
  out << "# config: " << cfg.to_json().dump() << '\n';
  out << "# seed: " << cfg.seed << '\n';
  out << "repetition,metric,value\n";
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    for (const auto& [metric, value] : outcomes[r].metrics) {
      out << r << ',' << metric << ',' << value << '\n';
    }
  }
  for (const auto& [metric, ms] : agg) {
    out << "mean," << metric << ',' << ms.first << '\n';
  }
  for (const auto& [metric, ms] : agg) {
    out << "std," << metric << ',' << ms.second << '\n';
  }
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const PreparedData data = prepare(cfg);
  const std::vector<RepetitionOutcome> outcomes = run_repetitions(cfg, data);

  ExperimentSummary summary;
  summary.aggregates = aggregate(outcomes);
  for (const RepetitionOutcome& o : outcomes) summary.per_repetition.push_back(o.metrics);

  summary.report_csv = (std::filesystem::path(cfg.out_dir) / "report.csv").string();
  write_report_csv(summary.report_csv, cfg, outcomes, summary.aggregates);

  json trace_doc;
  trace_doc["config"] = cfg.to_json();
  json reps = json::array();
  for (const RepetitionOutcome& o : outcomes) reps.push_back(o.artifact);
  trace_doc["repetitions"] = std::move(reps);
  summary.trace_json = (std::filesystem::path(cfg.out_dir) / "trace.json").string();
  std::ofstream trace_out(summary.trace_json);
  if (!trace_out) throw ConfigError("cannot open output file '" + summary.trace_json + "'");
  trace_out << trace_doc.dump(2) << '\n';
  return summary;
}

void run_sweep(const ExperimentConfig& base, const std::vector<double>& epsilons,
               const std::vector<int>& iteration_counts) {
  base.validate();
  if (epsilons.empty() && iteration_counts.empty()) {
    throw ConfigError("sweep needs at least one epsilon or iteration list");
  }
  std::filesystem::create_directories(base.out_dir);
  const PreparedData data = prepare(base);

  const std::vector<double> eps_grid = epsilons.empty() ? std::vector<double>{base.mwem.epsilon}
                                                        : epsilons;
  const std::vector<int> t_grid =
      iteration_counts.empty() ? std::vector<int>{base.mwem.iterations} : iteration_counts;

  const std::string path = (std::filesystem::path(base.out_dir) / "sweep.csv").string();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out.precision(17);
  out << "# config: " << base.to_json().dump() << '\n';
  out << "# seed: " << base.seed << '\n';
  out << "epsilon,iterations,metric,mean,std\n";
  for (double eps : eps_grid) {
    for (int t : t_grid) {
      ExperimentConfig cfg = base;
      cfg.mwem.epsilon = eps;
      cfg.mwem.iterations = t;
      const auto agg = aggregate(run_repetitions(cfg, data));
      for (const auto& [metric, ms] : agg) {
        out << eps << ',' << t << ',' << metric << ',' << ms.first << ',' << ms.second << '\n';
      }
    }
  }
}

}  // namespace mwem

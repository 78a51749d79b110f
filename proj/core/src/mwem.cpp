#include "mwem/mwem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mwem/metrics.hpp"

namespace mwem {

void MwemConfig::validate() const {
  if (iterations < 1) throw ConfigError("iteration count must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (replay_passes < 0) throw ConfigError("replay pass count must be >= 0");
  if (histogram_init_fraction < 0.0 || histogram_init_fraction >= 1.0) {
    throw ConfigError("histogram init fraction must lie in [0, 1)");
  }
  if (noisy_mass_fraction < 0.0 || noisy_mass_fraction >= 1.0) {
    throw ConfigError("noisy mass fraction must lie in [0, 1)");
  }
  if (histogram_init_fraction + noisy_mass_fraction >= 1.0) {
    throw ConfigError("initialization fractions leave no budget for measurements");
  }
  if (!(adaptive_signal_factor > 0.0)) {
    throw ConfigError("adaptive signal factor must be positive");
  }
  if (!(adaptive_start_fraction > 0.0) || adaptive_start_fraction > 1.0) {
    throw ConfigError("adaptive start fraction must lie in (0, 1]");
  }
}

std::size_t select_query(std::span<const double> scores, std::span<const std::uint8_t> measured,
                         double eps_round, RngStream& rng) {
  if (scores.size() != measured.size()) {
    throw DomainError("score and measured-flag lists must have equal length");
  }
  if (std::find(measured.begin(), measured.end(), std::uint8_t(0)) == measured.end()) {
    throw ConfigError("every query is already measured; nothing to select");
  }
  constexpr int kMaxRejections = 1000;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const std::size_t idx = exponential_mechanism(scores, eps_round, rng);
    if (!measured[idx]) return idx;
  }
  // Rejection conditioned on the unmeasured set equals the mechanism
  // restricted to it; sample that directly once rejection stalls.
  std::vector<std::size_t> open;
  std::vector<double> open_scores;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!measured[i]) {
      open.push_back(i);
      open_scores.push_back(scores[i]);
    }
  }
  return open[exponential_mechanism(open_scores, eps_round, rng)];
}

void mw_update(Histogram& approx, const LinearQuery& query, double target) {
  if (!query.universe()->same_as(*approx.universe())) {
    throw DomainError("query and histogram universes differ");
  }
  const double n = approx.mass();
  if (!(n > 0.0)) {
    throw DomainError("multiplicative weights requires positive mass");
  }
  const double current = evaluate(query, approx);
  const double eta = (target - current) / (2.0 * n);
  if (eta == 0.0) return;
  std::vector<double>& w = approx.mutable_weights();
  switch (query.kind()) {
    case LinearQuery::Kind::range:
    case LinearQuery::Kind::cell: {
      const double factor = std::exp(eta);
      for_each_box_run(*approx.universe(), query.box(),
                       [&](std::uint64_t offset, std::uint64_t len) {
                         for (std::uint64_t i = 0; i < len; ++i) w[offset + i] *= factor;
                       });
      break;
    }
    case LinearQuery::Kind::parity: {
      const double up = std::exp(eta);
      const double down = std::exp(-eta);
      std::vector<std::uint8_t> mask(approx.universe()->attribute_count(), 0);
      for (std::size_t a : query.footprint()) mask[a] = 1;
      for_each_parity_sign(*approx.universe(), mask, [&](std::uint64_t i, int sign) {
        w[i] *= (sign > 0) ? up : down;
      });
      break;
    }
    case LinearQuery::Kind::custom: {
      std::span<const double> t = query.table();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::exp(t[i] * eta);
      break;
    }
  }
  approx.renormalize_to(n);
}

void mw_replay(Histogram& approx, const Workload& workload, const History& history, int passes) {
  if (passes < 0) throw DomainError("replay pass count must be >= 0");
  for (int pass = 0; pass < passes; ++pass) {
    for (const HistoryEntry& entry : history) {
      mw_update(approx, workload[entry.query_index], entry.measurement);
    }
  }
}

Histogram histogram_init_from_counts(const UniversePtr& universe, std::span<const double> counts,
                                     double mass, double init_epsilon, RngStream& rng) {
  if (!(init_epsilon > 0.0)) throw DomainError("init epsilon must be positive");
  Histogram hist(universe);
  if (counts.size() != hist.size()) {
    throw DomainError("count vector length does not match universe size");
  }
  std::vector<double>& w = hist.mutable_weights();
  const double scale = 1.0 / init_epsilon;
  for (std::size_t x = 0; x < w.size(); ++x) {
    w[x] = std::max(counts[x] + laplace_sample(scale, rng), kInitWeightFloor);
  }
  hist.renormalize_to(mass);
  return hist;
}

Histogram histogram_init(const Histogram& dataset, double init_epsilon, RngStream& rng,
                         BudgetLedger& ledger) {
  ledger.charge("init", init_epsilon);
  return histogram_init_from_counts(dataset.universe(), dataset.weights(), dataset.mass(),
                                    init_epsilon, rng);
}

double utility_bound(double n, double domain_size, double workload_size, int iterations,
                     double epsilon) {
  if (!(n > 0.0) || !(domain_size > 0.0) || !(workload_size > 0.0) || iterations < 1 ||
      !(epsilon > 0.0)) {
    throw DomainError("utility bound arguments must be positive");
  }
  const double t = static_cast<double>(iterations);
  return 2.0 * n * std::sqrt(std::log(domain_size) / t) +
         10.0 * t * std::log(workload_size) / epsilon;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double clamp_measurement(const LinearQuery& query, double m, double n) {
  return std::clamp(m, n * query.min_value(), n * query.max_value());
}

// Potential: relative entropy between the truth and the approximation. NaN
// when the source is record-backed or the masses differ (noisy-mass mode).
double psi_or_nan(SensitiveGate& gate, const Histogram& approx) {
  const Histogram* truth = gate.diagnostic_source().histogram();
  if (truth == nullptr) return std::numeric_limits<double>::quiet_NaN();
  if (std::abs(truth->mass() - approx.mass()) >
      1e-9 * std::max(1.0, std::abs(truth->mass()))) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return relative_entropy(*truth, approx);
}

double diag_max_error(SensitiveGate& gate, const Workload& workload, const Histogram& approx) {
  double worst = 0.0;
  for (std::size_t q = 0; q < workload.size(); ++q) {
    worst = std::max(worst, std::abs(evaluate(workload[q], approx) - gate.diagnostic_answer(q)));
  }
  return worst;
}

struct StageSpec {
  int rounds = 0;
  double eps_round = 0.0;
  double noise_scale = 0.0;
  double signal_threshold = 0.0;  // <= 0: run all rounds
  std::string label_prefix;
};

struct StageOutcome {
  Histogram output;
  History history;
  IterationTrace trace;
  bool signal_drop = false;
};

StageOutcome run_explicit_stage(SensitiveGate& gate, const Workload& workload,
                                const MwemConfig& cfg, Histogram approx, double n,
                                const StageSpec& spec, RngStream& rng,
                                Clock::time_point run_start) {
  const std::size_t count = workload.size();
  std::vector<std::uint8_t> measured(count, 0);
  std::vector<double> scores(count), approx_answers(count);
  std::vector<double> average_acc;
  if (cfg.output_mode == OutputMode::average) {
    average_acc.assign(approx.size(), 0.0);
  }

  StageOutcome out{Histogram(approx.universe()), {}, {}, false};
  if (cfg.diagnostics) out.trace.psi_initial = psi_or_nan(gate, approx);

  int rounds_run = 0;
  int below_signal = 0;
  for (int i = 0; i < spec.rounds; ++i) {
    // The average output covers the pre-update iterates A_0 .. A_{T-1}.
    if (cfg.output_mode == OutputMode::average) {
      std::span<const double> w = approx.weights();
      for (std::size_t x = 0; x < w.size(); ++x) average_acc[x] += w[x];
    }

    std::span<const double> exact =
        gate.charged_workload_answers(spec.label_prefix + "select", spec.eps_round);
    for (std::size_t q = 0; q < count; ++q) {
      approx_answers[q] = evaluate(workload[q], approx);
      scores[q] = std::abs(approx_answers[q] - exact[q]);
    }
    const std::size_t qi = select_query(scores, measured, spec.eps_round, rng);
    measured[qi] = 1;

    const double exact_qi =
        gate.charged_answer(qi, spec.label_prefix + "measure", spec.eps_round);
    double m = exact_qi + laplace_sample(spec.noise_scale, rng);
    if (cfg.clamp_measurements) m = clamp_measurement(workload[qi], m, n);
    const double l = m - approx_answers[qi];
    out.history.push_back({qi, m, l});

    if (cfg.replay_passes > 0) {
      mw_replay(approx, workload, out.history, cfg.replay_passes);
    } else {
      mw_update(approx, workload[qi], m);
    }
    ++rounds_run;

    TraceEntry entry;
    entry.selected = qi;
    entry.measurement = m;
    if (cfg.diagnostics) {
      entry.true_score = scores[qi];
      entry.exact_answer = gate.diagnostic_answer(qi);
      entry.potential = psi_or_nan(gate, approx);
      entry.max_error = diag_max_error(gate, workload, approx);
    }
    entry.elapsed_ms = ms_since(run_start);
    out.trace.rounds.push_back(entry);

    if (spec.signal_threshold > 0.0) {
      below_signal = (std::abs(l) < spec.signal_threshold) ? below_signal + 1 : 0;
      if (below_signal >= 2) {
        out.signal_drop = true;
        break;
      }
    }
  }

  if (cfg.output_mode == OutputMode::average) {
    const double inv = 1.0 / static_cast<double>(rounds_run);
    for (double& x : average_acc) x *= inv;
    out.output = Histogram(approx.universe(), std::move(average_acc));
  } else {
    out.output = std::move(approx);
  }
  return out;
}

}  // namespace

MwemResult run_mwem(const Histogram& dataset, const Workload& workload, const MwemConfig& config,
                    RngStream& rng) {
  config.validate();
  if (config.adaptive_iterations) {
    return adaptive_run(dataset, workload, config, rng);
  }
  if (!workload.universe()->same_as(*dataset.universe())) {
    throw DomainError("workload and dataset universes differ");
  }
  if (static_cast<std::size_t>(config.iterations) > workload.size()) {
    throw ConfigError("iteration count exceeds workload size; distinct selection is impossible");
  }
  if (!(dataset.mass() > 0.0)) {
    throw DomainError("dataset mass must be positive");
  }

  const auto run_start = Clock::now();
  BudgetLedger ledger(config.epsilon);
  SensitiveGate gate(SensitiveSource(&dataset), &workload, &ledger, config.diagnostics);

  double n = gate.mass();
  double eps_rounds = config.epsilon;
  if (config.noisy_mass_fraction > 0.0) {
    const double eps_mass = config.noisy_mass_fraction * config.epsilon;
    n = std::max(1.0, gate.charged_mass("mass", eps_mass) +
                          laplace_sample(1.0 / eps_mass, rng));
    eps_rounds -= eps_mass;
  }

  Histogram approx = uniform_histogram(dataset.universe(), n);
  if (config.histogram_init_fraction > 0.0) {
    const double eps_init = config.histogram_init_fraction * config.epsilon;
    const std::vector<double> counts = gate.charged_count_snapshot("init", eps_init);
    approx = histogram_init_from_counts(dataset.universe(), counts, n, eps_init, rng);
    eps_rounds -= eps_init;
  }

  StageSpec spec;
  spec.rounds = config.iterations;
  spec.eps_round = eps_rounds / (2.0 * config.iterations);
  spec.noise_scale = 2.0 * config.iterations / eps_rounds;
  StageOutcome stage =
      run_explicit_stage(gate, workload, config, std::move(approx), n, spec, rng, run_start);

  MwemResult result{std::move(stage.output), std::move(stage.history), std::move(stage.trace),
                    std::move(ledger),       gate.charged_touches(),   gate.diagnostics_used(),
                    {}};
  result.stats.total_ms = ms_since(run_start);
  result.stats.source_eval_ms = gate.source_eval_seconds() * 1000.0;
  result.stats.mwem_logic_ms = result.stats.total_ms - result.stats.source_eval_ms;
  result.stats.peak_table_entries = dataset.size();
  return result;
}

MwemResult adaptive_run(const Histogram& dataset, const Workload& workload,
                        const MwemConfig& config, RngStream& rng) {
  config.validate();
  if (!config.adaptive_iterations) {
    throw ConfigError("adaptive_run requires the adaptive_iterations flag");
  }
  if (config.histogram_init_fraction > 0.0 || config.noisy_mass_fraction > 0.0) {
    throw ConfigError("adaptive mode does not combine with initialization fractions");
  }
  if (!workload.universe()->same_as(*dataset.universe())) {
    throw DomainError("workload and dataset universes differ");
  }
  if (static_cast<std::size_t>(config.iterations) > workload.size()) {
    throw ConfigError("iteration count exceeds workload size; distinct selection is impossible");
  }
  if (!(dataset.mass() > 0.0)) {
    throw DomainError("dataset mass must be positive");
  }

  const auto run_start = Clock::now();
  BudgetLedger ledger(config.epsilon);
  SensitiveGate gate(SensitiveSource(&dataset), &workload, &ledger, config.diagnostics);
  const double n = gate.mass();

  double stage_eps = config.adaptive_start_fraction * config.epsilon;
  StageOutcome last{Histogram(dataset.universe()), {}, {}, false};
  int stage_index = 0;
  while (true) {
    StageSpec spec;
    spec.rounds = config.iterations;
    spec.eps_round = stage_eps / (2.0 * config.iterations);
    spec.noise_scale = 2.0 * config.iterations / stage_eps;
    spec.signal_threshold = config.adaptive_signal_factor * spec.noise_scale;
    spec.label_prefix = "s" + std::to_string(stage_index) + ".";
    last = run_explicit_stage(gate, workload, config,
                              uniform_histogram(dataset.universe(), n), n, spec, rng, run_start);
    if (last.signal_drop) break;
    // Doubling keeps the cumulated cost within a factor of two of the final
    // stage; stop when the budget cannot fund the next stage.
    if (ledger.remaining() < 2.0 * stage_eps - kLedgerSlack) break;
    stage_eps *= 2.0;
    ++stage_index;
  }

  MwemResult result{std::move(last.output), std::move(last.history), std::move(last.trace),
                    std::move(ledger),      gate.charged_touches(),  gate.diagnostics_used(),
                    {}};
  result.stats.total_ms = ms_since(run_start);
  result.stats.source_eval_ms = gate.source_eval_seconds() * 1000.0;
  result.stats.mwem_logic_ms = result.stats.total_ms - result.stats.source_eval_ms;
  result.stats.peak_table_entries = dataset.size();
  return result;
}

std::vector<double> cuboid_scores(std::span<const CuboidGroup> cuboids,
                                  std::span<const double> approx_cells,
                                  std::span<const double> exact_cells) {
  if (approx_cells.size() != exact_cells.size()) {
    throw DomainError("cell answer lists must have equal length");
  }
  std::vector<double> scores;
  scores.reserve(cuboids.size());
  std::size_t offset = 0;
  for (const CuboidGroup& group : cuboids) {
    double sum = 0.0;
    for (std::size_t c = 0; c < group.cell_count(); ++c) {
      sum += std::abs(approx_cells[offset + c] - exact_cells[offset + c]);
    }
    scores.push_back(sum - static_cast<double>(group.cell_count()));
    offset += group.cell_count();
  }
  if (offset != approx_cells.size()) {
    throw DomainError("cell answer lists do not match the cuboid layout");
  }
  return scores;
}

CuboidRunResult run_mwem_cuboids(const Histogram& dataset, std::span<const CuboidGroup> cuboids,
                                 const MwemConfig& config, RngStream& rng) {
  config.validate();
  if (config.adaptive_iterations) {
    throw ConfigError("adaptive mode is not available for cuboid workloads");
  }
  if (cuboids.empty()) {
    throw DomainError("cuboid run requires at least one cuboid");
  }
  if (static_cast<std::size_t>(config.iterations) > cuboids.size()) {
    throw ConfigError("iteration count exceeds cuboid count; distinct selection is impossible");
  }
  if (!(dataset.mass() > 0.0)) {
    throw DomainError("dataset mass must be positive");
  }

  // Flatten cells into one workload; cuboid c owns [begin[c], begin[c+1]).
  std::vector<LinearQuery> cells;
  std::vector<std::size_t> begin{0};
  for (const CuboidGroup& group : cuboids) {
    cells.insert(cells.end(), group.cells.begin(), group.cells.end());
    begin.push_back(cells.size());
  }
  Workload cell_workload(std::move(cells), "cuboid-cells");
  if (!cell_workload.universe()->same_as(*dataset.universe())) {
    throw DomainError("cuboid and dataset universes differ");
  }

  const auto run_start = Clock::now();
  BudgetLedger ledger(config.epsilon);
  SensitiveGate gate(SensitiveSource(&dataset), &cell_workload, &ledger, config.diagnostics);

  double n = gate.mass();
  double eps_rounds = config.epsilon;
  if (config.noisy_mass_fraction > 0.0) {
    const double eps_mass = config.noisy_mass_fraction * config.epsilon;
    n = std::max(1.0, gate.charged_mass("mass", eps_mass) +
                          laplace_sample(1.0 / eps_mass, rng));
    eps_rounds -= eps_mass;
  }
  Histogram approx = uniform_histogram(dataset.universe(), n);
  if (config.histogram_init_fraction > 0.0) {
    const double eps_init = config.histogram_init_fraction * config.epsilon;
    const std::vector<double> counts = gate.charged_count_snapshot("init", eps_init);
    approx = histogram_init_from_counts(dataset.universe(), counts, n, eps_init, rng);
    eps_rounds -= eps_init;
  }

  const int rounds = config.iterations;
  const double eps_round = eps_rounds / (2.0 * rounds);
  const double noise_scale = 2.0 * rounds / eps_rounds;

  std::vector<CuboidHistoryEntry> history;
  IterationTrace trace;
  std::vector<std::uint8_t> measured(cuboids.size(), 0);
  std::vector<double> approx_cells(cell_workload.size());
  std::vector<double> average_acc;
  if (config.output_mode == OutputMode::average) average_acc.assign(approx.size(), 0.0);

  auto cuboid_max_avg_error = [&](const Histogram& a) {
    double worst = 0.0;
    for (std::size_t c = 0; c < cuboids.size(); ++c) {
      double sum = 0.0;
      for (std::size_t k = begin[c]; k < begin[c + 1]; ++k) {
        sum += std::abs(evaluate(cell_workload[k], a) - gate.diagnostic_answer(k));
      }
      worst = std::max(worst, sum / static_cast<double>(begin[c + 1] - begin[c]));
    }
    return worst;
  };

  if (config.diagnostics) trace.psi_initial = psi_or_nan(gate, approx);

  for (int i = 0; i < rounds; ++i) {
    if (config.output_mode == OutputMode::average) {
      std::span<const double> w = approx.weights();
      for (std::size_t x = 0; x < w.size(); ++x) average_acc[x] += w[x];
    }

    std::span<const double> exact = gate.charged_workload_answers("select", eps_round);
    for (std::size_t q = 0; q < cell_workload.size(); ++q) {
      approx_cells[q] = evaluate(cell_workload[q], approx);
    }
    const std::vector<double> scores = cuboid_scores(cuboids, approx_cells, exact);
    const std::size_t ci = select_query(scores, measured, eps_round, rng);
    measured[ci] = 1;

    std::vector<std::size_t> indices;
    for (std::size_t k = begin[ci]; k < begin[ci + 1]; ++k) indices.push_back(k);
    const std::vector<double> exact_cells = gate.charged_answers(indices, "measure", eps_round);

    CuboidHistoryEntry entry;
    entry.cuboid_index = ci;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      double m = exact_cells[k] + laplace_sample(noise_scale, rng);
      if (config.clamp_measurements) m = clamp_measurement(cell_workload[indices[k]], m, n);
      entry.cell_measurements.push_back(m);
      entry.scale_factors.push_back(m - approx_cells[indices[k]]);
    }
    history.push_back(std::move(entry));

    const int passes = std::max(1, config.replay_passes);
    const std::size_t replay_from = config.replay_passes > 0 ? 0 : history.size() - 1;
    for (int pass = 0; pass < passes; ++pass) {
      for (std::size_t h = replay_from; h < history.size(); ++h) {
        const CuboidHistoryEntry& e = history[h];
        for (std::size_t k = 0; k < e.cell_measurements.size(); ++k) {
          mw_update(approx, cell_workload[begin[e.cuboid_index] + k], e.cell_measurements[k]);
        }
      }
    }

    TraceEntry trace_entry;
    trace_entry.selected = ci;
    if (config.diagnostics) {
      trace_entry.true_score = scores[ci];
      trace_entry.potential = psi_or_nan(gate, approx);
      trace_entry.max_error = cuboid_max_avg_error(approx);
    }
    trace_entry.elapsed_ms = ms_since(run_start);
    trace.rounds.push_back(trace_entry);
  }

  Histogram output(dataset.universe());
  if (config.output_mode == OutputMode::average) {
    const double inv = 1.0 / static_cast<double>(rounds);
    for (double& x : average_acc) x *= inv;
    output = Histogram(dataset.universe(), std::move(average_acc));
  } else {
    output = std::move(approx);
  }
  CuboidRunResult result{std::move(output),  std::move(history),     std::move(trace),
                         std::move(ledger),  gate.charged_touches(), gate.diagnostics_used(),
                         {}};
  result.stats.total_ms = ms_since(run_start);
  result.stats.source_eval_ms = gate.source_eval_seconds() * 1000.0;
  result.stats.mwem_logic_ms = result.stats.total_ms - result.stats.source_eval_ms;
  result.stats.peak_table_entries = dataset.size();
  return result;
}

}  // namespace mwem

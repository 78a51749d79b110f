#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/mech.hpp"
#include "mwem/query.hpp"
#include "mwem/rng.hpp"
#include "mwem/sensitive.hpp"

namespace mwem {

enum class OutputMode { average, last };

// Floor applied to noisy initialization counts so every weight stays positive.
inline constexpr double kInitWeightFloor = 1e-6;

struct MwemConfig {
  int iterations = 10;  // T; an upper bound per stage when adaptive_iterations is set
  double epsilon = 1.0;
  OutputMode output_mode = OutputMode::last;
  // Multiplicative-weights sweeps over the full measurement history after
  // each new measurement; 0 applies only the single update for the round.
  int replay_passes = 100;
  // Fraction of epsilon spent on noisy-count initialization of the
  // approximation (0 = start uniform).
  double histogram_init_fraction = 0.0;
  bool adaptive_iterations = false;
  // Clamp measurements into the query's attainable range ([0, n] for counting
  // queries, [-n, n] generally) before updating. Off reproduces the plain
  // algorithm literally.
  bool clamp_measurements = true;
  // Record true scores, potentials, and workload errors per iteration. Reads
  // the protected data without charge and marks the run non-private.
  bool diagnostics = false;
  // Fraction of epsilon spent estimating the record count privately
  // (0 = use the true count, the reference behavior).
  double noisy_mass_fraction = 0.0;
  // Adaptive mode: a stage ends when the measured-signal proxy stays below
  // signal_factor times the per-measurement noise scale for two consecutive
  // rounds; stage budgets start at start_fraction * epsilon and double.
  double adaptive_signal_factor = 2.0;
  double adaptive_start_fraction = 0.0625;
  // Cap on any single factored part's weight table.
  std::uint64_t part_table_cap = kDefaultExplicitCap;

  void validate() const;
};

struct HistoryEntry {
  std::size_t query_index = 0;
  double measurement = 0.0;   // m_i, after any clamping
  double scale_factor = 0.0;  // l_i = m_i - q_i(A_{i-1})
};
using History = std::vector<HistoryEntry>;

struct TraceEntry {
  std::size_t selected = 0;
  double measurement = std::numeric_limits<double>::quiet_NaN();
  // Diagnostics-only fields (NaN on private runs):
  double true_score = std::numeric_limits<double>::quiet_NaN();
  double exact_answer = std::numeric_limits<double>::quiet_NaN();
  double potential = std::numeric_limits<double>::quiet_NaN();
  double max_error = std::numeric_limits<double>::quiet_NaN();
  double elapsed_ms = 0.0;
};

struct IterationTrace {
  double psi_initial = std::numeric_limits<double>::quiet_NaN();
  std::vector<TraceEntry> rounds;
};

struct RunStats {
  double total_ms = 0.0;
  double source_eval_ms = 0.0;
  double mwem_logic_ms = 0.0;
  std::size_t peak_table_entries = 0;
};

struct MwemResult {
  Histogram synthetic;
  History history;
  IterationTrace trace;
  BudgetLedger ledger;
  std::size_t charged_touches = 0;
  bool non_private_diagnostics = false;
  RunStats stats;
};

// The main loop: T rounds of select (exponential mechanism over error
// scores), measure (Laplace), correct (multiplicative weights with history
// replay). Returns the averaged iterates or the final one per output_mode.
MwemResult run_mwem(const Histogram& dataset, const Workload& workload, const MwemConfig& config,
                    RngStream& rng);

// Staged variant: restarts with doubling stage budgets until the observed
// signal drops below the noise scale or the budget cannot fund another stage.
MwemResult adaptive_run(const Histogram& dataset, const Workload& workload,
                        const MwemConfig& config, RngStream& rng);

// Samples an unmeasured index via the exponential mechanism over all scores,
// rejecting already-measured draws.
std::size_t select_query(std::span<const double> scores, std::span<const std::uint8_t> measured,
                         double eps_round, RngStream& rng);

// Scales each weight by exp(q(x) * eta) with eta = (target - q(approx)) / 2n,
// then renormalizes back to mass n.
void mw_update(Histogram& approx, const LinearQuery& query, double target);

// `passes` sweeps applying mw_update for every history entry in order;
// consumes no privacy budget.
void mw_replay(Histogram& approx, const Workload& workload, const History& history, int passes);

// Noisy-count initialization: weight(x) = max(count(x) + Lap(1/init_epsilon),
// floor), renormalized to the dataset mass; charges init_epsilon.
Histogram histogram_init(const Histogram& dataset, double init_epsilon, RngStream& rng,
                         BudgetLedger& ledger);

// Shared basis for histogram_init and the driver's gated path.
Histogram histogram_init_from_counts(const UniversePtr& universe, std::span<const double> counts,
                                     double mass, double init_epsilon, RngStream& rng);

// Worst-case error bound 2n*sqrt(ln|D|/T) + 10*T*ln|Q|/epsilon.
double utility_bound(double n, double domain_size, double workload_size, int iterations,
                     double epsilon);

// --- Cuboid (marginal) workloads ---------------------------------------------

struct CuboidHistoryEntry {
  std::size_t cuboid_index = 0;
  std::vector<double> cell_measurements;
  std::vector<double> scale_factors;
};

struct CuboidRunResult {
  Histogram synthetic;
  std::vector<CuboidHistoryEntry> history;
  IterationTrace trace;
  BudgetLedger ledger;
  std::size_t charged_touches = 0;
  bool non_private_diagnostics = false;
  RunStats stats;
};

// Selection score for one cuboid: the summed absolute cell errors minus the
// cell count (the size penalty biases selection away from large cuboids).
std::vector<double> cuboid_scores(std::span<const CuboidGroup> cuboids,
                                  std::span<const double> approx_cells,
                                  std::span<const double> exact_cells);

// MWEM over cuboid groups: one selection and one jointly-measured cuboid per
// round (independent Laplace noise per cell, a single budget charge).
CuboidRunResult run_mwem_cuboids(const Histogram& dataset, std::span<const CuboidGroup> cuboids,
                                 const MwemConfig& config, RngStream& rng);

}  // namespace mwem

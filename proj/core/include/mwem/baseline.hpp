#pragma once

#include "mwem/domain.hpp"
#include "mwem/mwem.hpp"
#include "mwem/query.hpp"
#include "mwem/rng.hpp"

namespace mwem {

struct BaselineConfig {
  int max_order = 3;  // k: parity queries over subsets of size 1..k
  double epsilon = 1.0;
  int replay_passes = 100;
  // Also measure the order-0 (total count) query.
  bool include_total = false;

  void validate() const {
    if (max_order < 1) throw ConfigError("baseline max_order must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (replay_passes < 0) throw ConfigError("replay pass count must be >= 0");
  }
};

struct BaselineResult {
  Histogram synthetic;
  Workload workload;
  History history;
  BudgetLedger ledger;
  std::size_t charged_touches = 0;
};

// Comparison algorithm: measure every low-order parity query once at a
// uniform accuracy (Laplace scale |workload|/epsilon each), then fit from
// uniform with multiplicative-weights replay. Binary universes only.
BaselineResult run_baseline(const Histogram& dataset, const BaselineConfig& config,
                            RngStream& rng);

}  // namespace mwem

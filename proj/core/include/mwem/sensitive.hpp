#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/mech.hpp"
#include "mwem/query.hpp"

namespace mwem {

// View over the protected dataset: either an explicit histogram or raw
// records. Record-backed evaluation streams over rows, touching only each
// query's footprint attributes, in parallel over fixed row blocks.
class SensitiveSource {
 public:
  explicit SensitiveSource(const Histogram* hist);
  explicit SensitiveSource(const RecordTable* records);

  double mass() const;
  double exact_answer(const LinearQuery& query) const;
  const Histogram* histogram() const { return hist_; }
  const RecordTable* records() const { return records_; }

 private:
  const Histogram* hist_ = nullptr;
  const RecordTable* records_ = nullptr;
};

// Access gate on the protected dataset. Every charged_* call debits the
// ledger and counts one touch, so a run's touch count audits its mechanism
// invocations. Exact answers are cached; caching never changes the count.
// Diagnostic reads are uncharged, demand an explicit opt-in, and mark the
// run non-private.
class SensitiveGate {
 public:
  SensitiveGate(SensitiveSource source, const Workload* workload, BudgetLedger* ledger,
                bool diagnostics_allowed);

  // Exact answers for the whole workload (scoring basis). One touch.
  std::span<const double> charged_workload_answers(std::string_view label, double epsilon);
  // Exact answer for one query (measurement basis). One touch.
  double charged_answer(std::size_t query_index, std::string_view label, double epsilon);
  // Exact answers for a set of queries measured jointly (a cuboid's cells:
  // disjoint, so one mechanism invocation covers all). One touch.
  std::vector<double> charged_answers(std::span<const std::size_t> query_indices,
                                      std::string_view label, double epsilon);
  // Copy of the true per-element counts (histogram initialization basis).
  // One touch; explicit sources only.
  std::vector<double> charged_count_snapshot(std::string_view label, double epsilon);
  // True record count (noisy-mass estimation basis). One touch.
  double charged_mass(std::string_view label, double epsilon);

  // The record count is used openly by the standard run (the reference
  // behavior); see the noisy-mass option for the private variant.
  double mass() const { return source_.mass(); }

  std::size_t charged_touches() const { return charged_touches_; }
  double source_eval_seconds() const { return source_eval_seconds_; }

  double diagnostic_answer(std::size_t query_index);
  const SensitiveSource& diagnostic_source();
  bool diagnostics_used() const { return diagnostics_used_; }

 private:
  double cached_answer(std::size_t query_index);

  SensitiveSource source_;
  const Workload* workload_;
  BudgetLedger* ledger_;
  bool diagnostics_allowed_;
  bool diagnostics_used_ = false;
  std::size_t charged_touches_ = 0;
  double source_eval_seconds_ = 0.0;
  std::vector<double> cache_;
  std::vector<std::uint8_t> cached_;
};

}  // namespace mwem

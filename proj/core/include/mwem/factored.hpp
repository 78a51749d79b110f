#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/mwem.hpp"
#include "mwem/query.hpp"

namespace mwem {

// Disjoint-set partition of the schema's attributes. Parts only merge.
class AttributePartition {
 public:
  explicit AttributePartition(std::size_t attribute_count);

  std::size_t find(std::size_t attribute) const;
  // Returns true when two distinct parts were merged.
  bool unite(std::size_t a, std::size_t b);
  std::size_t part_count() const { return count_; }
  std::size_t attribute_count() const { return parent_.size(); }
  std::vector<std::size_t> members(std::size_t root) const;

 private:
  mutable std::vector<std::size_t> parent_;
  std::size_t count_;
};

// Weight table over one part's sub-domain, normalized to sum 1. Attributes
// ascending; row-major with the first listed attribute most significant.
struct FactoredPart {
  std::vector<std::size_t> attributes;
  std::vector<std::uint32_t> cardinalities;
  std::vector<std::uint64_t> strides;
  std::vector<double> table;
};

// Product of per-part distributions with one global mass n. While no measured
// query entangles two parts, this represents the multiplicative-weights state
// exactly with memory proportional to the sum of part sub-domain sizes.
class FactoredDistribution {
 public:
  static FactoredDistribution singletons(UniversePtr universe, double mass,
                                         std::uint64_t part_cap = kDefaultExplicitCap);

  const UniversePtr& universe() const { return universe_; }
  double mass() const { return mass_; }
  std::uint64_t part_cap() const { return part_cap_; }
  std::size_t part_count() const { return parts_.size(); }
  const std::map<std::size_t, FactoredPart>& parts() const { return parts_; }
  std::size_t part_root_of(std::size_t attribute) const { return partition_.find(attribute); }
  const FactoredPart& part_of(std::size_t attribute) const {
    return parts_.at(partition_.find(attribute));
  }

  // Probability the product distribution assigns to one full tuple.
  double tuple_probability(std::span<const std::uint32_t> tuple) const;

  std::size_t total_table_entries() const { return current_entries_; }
  std::size_t peak_table_entries() const { return peak_entries_; }

  friend void partition_update(FactoredDistribution& dist, const LinearQuery& query);
  friend double factored_evaluate(const LinearQuery& query, const FactoredDistribution& dist);
  friend void factored_mw_update(FactoredDistribution& dist, const LinearQuery& query,
                                 double target);

 private:
  UniversePtr universe_;
  double mass_ = 0.0;
  std::uint64_t part_cap_ = kDefaultExplicitCap;
  AttributePartition partition_{1};
  std::map<std::size_t, FactoredPart> parts_;  // keyed by union-find root
  std::size_t current_entries_ = 0;
  std::size_t peak_entries_ = 0;
};

// Merges every part touched by the query's footprint; the merged table is the
// outer product of the old tables.
void partition_update(FactoredDistribution& dist, const LinearQuery& query);

// q(A) = n * prod_j sum_{x_j} q_j(x_j) A^j(x_j); parts outside the footprint
// contribute factor 1.
double factored_evaluate(const LinearQuery& query, const FactoredDistribution& dist);

// Mini multiplicative-weights step on the part owning the query's footprint.
// The query must not span parts (call partition_update first).
void factored_mw_update(FactoredDistribution& dist, const LinearQuery& query, double target);

// `passes` sweeps over the history in order; budget-free, like mw_replay.
void factored_mw_replay(FactoredDistribution& dist, const Workload& workload,
                        const History& history, int passes);

// Materializes the product as an explicit histogram (small universes only).
Histogram export_histogram(const FactoredDistribution& dist,
                           std::uint64_t explicit_cap = kDefaultExplicitCap);

struct FactoredRunResult {
  FactoredDistribution synthetic;
  // Averaged iterates (set when output_mode == average; requires an
  // explicitly materializable universe).
  std::optional<Histogram> averaged;
  History history;
  IterationTrace trace;
  BudgetLedger ledger;
  std::size_t charged_touches = 0;
  bool non_private_diagnostics = false;
  RunStats stats;
};

// The factored engine: identical round structure and noise draws as run_mwem,
// with the approximation held as a product of per-part tables and the
// protected side answered by streaming over records.
FactoredRunResult run_mwem_factored(const RecordTable& records, const Workload& workload,
                                    const MwemConfig& config, RngStream& rng);

}  // namespace mwem

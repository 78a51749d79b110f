#include "mwem/factored.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace mwem {

AttributePartition::AttributePartition(std::size_t attribute_count)
    : parent_(attribute_count), count_(attribute_count) {
  for (std::size_t i = 0; i < attribute_count; ++i) parent_[i] = i;
}

std::size_t AttributePartition::find(std::size_t attribute) const {
  std::size_t root = attribute;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[attribute] != root) {
    const std::size_t next = parent_[attribute];
    parent_[attribute] = root;
    attribute = next;
  }
  return root;
}

bool AttributePartition::unite(std::size_t a, std::size_t b) {
  const std::size_t ra = find(a), rb = find(b);
  if (ra == rb) return false;
  // Smaller root wins: part keys stay stable under merge order.
  const std::size_t winner = std::min(ra, rb);
  parent_[std::max(ra, rb)] = winner;
  --count_;
  return true;
}

std::vector<std::size_t> AttributePartition::members(std::size_t root) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parent_.size(); ++i) {
    if (find(i) == root) out.push_back(i);
  }
  return out;
}

namespace {

FactoredPart make_part(const AttributeSchema& schema, std::vector<std::size_t> attributes) {
  FactoredPart part;
  part.attributes = std::move(attributes);
  part.cardinalities.reserve(part.attributes.size());
  for (std::size_t a : part.attributes) {
    part.cardinalities.push_back(schema.attribute(a).cardinality);
  }
  part.strides.assign(part.attributes.size(), 1);
  std::uint64_t size = 1;
  for (std::size_t i = part.attributes.size(); i-- > 0;) {
    part.strides[i] = size;
    size *= part.cardinalities[i];
  }
  part.table.assign(size, 0.0);
  return part;
}

// Product of attribute_factor over the constrained attributes of one part,
// evaluated on the part-local tuple at `index`.
double part_partial_value(const FactoredPart& part, const LinearQuery& query,
                          std::span<const std::size_t> positions, std::uint64_t index) {
  double v = 1.0;
  for (std::size_t p : positions) {
    const std::uint32_t value =
        static_cast<std::uint32_t>((index / part.strides[p]) % part.cardinalities[p]);
    v *= query.attribute_factor(part.attributes[p], value);
  }
  return v;
}

// Positions (within part.attributes) of the attributes the query constrains.
std::vector<std::size_t> constrained_positions(const FactoredPart& part,
                                               const LinearQuery& query) {
  std::vector<std::size_t> positions;
  for (std::size_t p = 0; p < part.attributes.size(); ++p) {
    if (std::binary_search(query.footprint().begin(), query.footprint().end(),
                           part.attributes[p])) {
      positions.push_back(p);
    }
  }
  return positions;
}

std::vector<std::size_t> footprint_roots(const FactoredDistribution& dist,
                                         const LinearQuery& query) {
  std::vector<std::size_t> roots;
  for (std::size_t a : query.footprint()) {
    const std::size_t r = dist.part_root_of(a);
    if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

FactoredDistribution FactoredDistribution::singletons(UniversePtr universe, double mass,
                                                      std::uint64_t part_cap) {
  if (!(mass > 0.0)) throw DomainError("factored distribution mass must be positive");
  FactoredDistribution dist;
  dist.universe_ = std::move(universe);
  dist.mass_ = mass;
  dist.part_cap_ = part_cap;
  const AttributeSchema& schema = dist.universe_->schema();
  dist.partition_ = AttributePartition(schema.attribute_count());
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    FactoredPart part = make_part(schema, {a});
    const double uniform = 1.0 / static_cast<double>(part.table.size());
    std::fill(part.table.begin(), part.table.end(), uniform);
    dist.current_entries_ += part.table.size();
    dist.parts_.emplace(a, std::move(part));
  }
  dist.peak_entries_ = dist.current_entries_;
  return dist;
}

double FactoredDistribution::tuple_probability(std::span<const std::uint32_t> tuple) const {
  double p = 1.0;
  for (const auto& [root, part] : parts_) {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < part.attributes.size(); ++i) {
      index += part.strides[i] * tuple[part.attributes[i]];
    }
    p *= part.table[index];
  }
  return p;
}

void partition_update(FactoredDistribution& dist, const LinearQuery& query) {
  if (!query.universe()->same_as(*dist.universe_)) {
    throw DomainError("query and distribution universes differ");
  }
  const std::vector<std::size_t> roots = footprint_roots(dist, query);
  if (roots.size() <= 1) return;

  std::vector<std::size_t> merged_attrs;
  std::uint64_t merged_size = 1;
  for (std::size_t r : roots) {
    const FactoredPart& part = dist.parts_.at(r);
    merged_attrs.insert(merged_attrs.end(), part.attributes.begin(), part.attributes.end());
    if (merged_size > dist.part_cap_ / part.table.size()) {
      throw ResourceError(
          "merging entangled parts would exceed the part table cap; restrict query footprints "
          "or raise the cap");
    }
    merged_size *= part.table.size();
  }
  std::sort(merged_attrs.begin(), merged_attrs.end());

  FactoredPart merged = make_part(dist.universe_->schema(), std::move(merged_attrs));
  // Outer product of the source tables: the pre-merge distribution is exactly
  // their product, so the merged table reproduces it.
  struct Source {
    const FactoredPart* part;
    std::vector<std::size_t> positions;  // positions of its attributes in merged
  };
  std::vector<Source> sources;
  for (std::size_t r : roots) {
    const FactoredPart& part = dist.parts_.at(r);
    Source src{&part, {}};
    for (std::size_t a : part.attributes) {
      src.positions.push_back(std::lower_bound(merged.attributes.begin(), merged.attributes.end(),
                                               a) -
                              merged.attributes.begin());
    }
    sources.push_back(std::move(src));
  }
  for (std::uint64_t idx = 0; idx < merged.table.size(); ++idx) {
    double v = 1.0;
    for (const Source& src : sources) {
      std::uint64_t sub = 0;
      for (std::size_t i = 0; i < src.positions.size(); ++i) {
        const std::size_t p = src.positions[i];
        const std::uint32_t value =
            static_cast<std::uint32_t>((idx / merged.strides[p]) % merged.cardinalities[p]);
        sub += src.part->strides[i] * value;
      }
      v *= src.part->table[sub];
    }
    merged.table[idx] = v;
  }

  dist.current_entries_ += merged.table.size();
  dist.peak_entries_ = std::max(dist.peak_entries_, dist.current_entries_);
  std::size_t freed = 0;
  for (std::size_t r : roots) {
    freed += dist.parts_.at(r).table.size();
    dist.parts_.erase(r);
  }
  dist.current_entries_ -= freed;

  for (std::size_t i = 1; i < merged.attributes.size(); ++i) {
    dist.partition_.unite(merged.attributes[0], merged.attributes[i]);
  }
  const std::size_t new_root = dist.partition_.find(merged.attributes[0]);
  dist.parts_.emplace(new_root, std::move(merged));
}

double factored_evaluate(const LinearQuery& query, const FactoredDistribution& dist) {
  if (!query.universe()->same_as(*dist.universe_)) {
    throw DomainError("query and distribution universes differ");
  }
  if (!query.is_product_form()) {
    // Custom tables have no per-attribute factorization; a fully merged part
    // matches the universe layout element for element.
    if (dist.part_count() != 1) {
      throw DomainError("custom queries require a fully merged distribution");
    }
    const FactoredPart& part = dist.parts_.begin()->second;
    double sum = 0.0;
    std::span<const double> t = query.table();
    for (std::uint64_t idx = 0; idx < part.table.size(); ++idx) sum += t[idx] * part.table[idx];
    return dist.mass_ * sum;
  }
  double result = dist.mass_;
  for (std::size_t root : footprint_roots(dist, query)) {
    const FactoredPart& part = dist.parts_.at(root);
    const std::vector<std::size_t> positions = constrained_positions(part, query);
    double factor = 0.0;
    for (std::uint64_t idx = 0; idx < part.table.size(); ++idx) {
      factor += part_partial_value(part, query, positions, idx) * part.table[idx];
    }
    result *= factor;
  }
  return result;
}

void factored_mw_update(FactoredDistribution& dist, const LinearQuery& query, double target) {
  if (!query.universe()->same_as(*dist.universe_)) {
    throw DomainError("query and distribution universes differ");
  }
  if (query.footprint().empty()) return;  // constant query: scaling cancels
  const std::vector<std::size_t> roots = footprint_roots(dist, query);
  if (roots.size() > 1) {
    throw DomainError("query footprint spans parts; apply partition_update first");
  }
  const double eval = factored_evaluate(query, dist);
  const double eta = (target - eval) / (2.0 * dist.mass_);
  if (eta == 0.0) return;

  FactoredPart& part = dist.parts_.at(roots.front());
  if (!query.is_product_form()) {
    std::span<const double> t = query.table();
    for (std::uint64_t idx = 0; idx < part.table.size(); ++idx) {
      part.table[idx] *= std::exp(t[idx] * eta);
    }
  } else {
    const std::vector<std::size_t> positions = constrained_positions(part, query);
    for (std::uint64_t idx = 0; idx < part.table.size(); ++idx) {
      part.table[idx] *= std::exp(part_partial_value(part, query, positions, idx) * eta);
    }
  }
  double sum = 0.0;
  for (double v : part.table) sum += v;
  const double inv = 1.0 / sum;
  for (double& v : part.table) v *= inv;
}

void factored_mw_replay(FactoredDistribution& dist, const Workload& workload,
                        const History& history, int passes) {
  if (passes < 0) throw DomainError("replay pass count must be >= 0");
  for (int pass = 0; pass < passes; ++pass) {
    for (const HistoryEntry& entry : history) {
      factored_mw_update(dist, workload[entry.query_index], entry.measurement);
    }
  }
}

Histogram export_histogram(const FactoredDistribution& dist, std::uint64_t explicit_cap) {
  const Universe& u = *dist.universe();
  if (!u.has_explicit_size() || u.size() > explicit_cap) {
    throw ResourceError("universe too large to materialize; raise the cap or keep it factored");
  }
  Histogram hist(dist.universe(), explicit_cap);
  std::vector<double>& w = hist.mutable_weights();
  std::vector<std::uint32_t> tuple(u.attribute_count(), 0);
  for (std::uint64_t x = 0; x < u.size(); ++x) {
    w[x] = dist.mass() * dist.tuple_probability(tuple);
    std::size_t a = u.attribute_count();
    while (a-- > 0) {
      if (++tuple[a] < u.schema().attribute(a).cardinality) break;
      tuple[a] = 0;
    }
  }
  hist.recompute_mass();
  return hist;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Potential against record data: only supported tuples contribute, so huge
// universes are fine.
double psi_records(const RecordTable& records, const FactoredDistribution& dist) {
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::uint32_t> tuple(records.attribute_count());
  for (std::size_t r = 0; r < records.row_count(); ++r) {
    records.copy_row(r, tuple);
    counts[std::string(reinterpret_cast<const char*>(tuple.data()),
                       tuple.size() * sizeof(std::uint32_t))]++;
  }
  const double n = static_cast<double>(records.row_count());
  double sum = 0.0;
  for (const auto& [key, count] : counts) {
    std::span<const std::uint32_t> t(reinterpret_cast<const std::uint32_t*>(key.data()),
                                     key.size() / sizeof(std::uint32_t));
    const double b = static_cast<double>(count);
    const double a = dist.mass() * dist.tuple_probability(t);
    sum += b * std::log(b / a);
  }
  return sum / n;
}

}  // namespace

FactoredRunResult run_mwem_factored(const RecordTable& records, const Workload& workload,
                                    const MwemConfig& config, RngStream& rng) {
  config.validate();
  if (config.adaptive_iterations) {
    throw ConfigError("adaptive mode is not available for the factored engine");
  }
  if (config.histogram_init_fraction > 0.0) {
    throw ConfigError("histogram initialization requires the explicit engine");
  }
  if (!(workload.universe()->schema() == records.schema())) {
    throw DomainError("workload and record schemas differ");
  }
  if (static_cast<std::size_t>(config.iterations) > workload.size()) {
    throw ConfigError("iteration count exceeds workload size; distinct selection is impossible");
  }
  if (records.row_count() == 0) {
    throw DomainError("record table is empty");
  }
  for (std::size_t q = 0; q < workload.size(); ++q) {
    if (!workload[q].is_product_form()) {
      throw ConfigError("factored engine requires structured query kinds; query " +
                        std::to_string(q) + " is custom");
    }
  }

  const auto run_start = Clock::now();
  BudgetLedger ledger(config.epsilon);
  SensitiveGate gate(SensitiveSource(&records), &workload, &ledger, config.diagnostics);

  double n = gate.mass();
  double eps_rounds = config.epsilon;
  if (config.noisy_mass_fraction > 0.0) {
    const double eps_mass = config.noisy_mass_fraction * config.epsilon;
    n = std::max(1.0, gate.charged_mass("mass", eps_mass) +
                          laplace_sample(1.0 / eps_mass, rng));
    eps_rounds -= eps_mass;
  }

  FactoredDistribution dist =
      FactoredDistribution::singletons(workload.universe(), n, config.part_table_cap);

  const int rounds = config.iterations;
  const double eps_round = eps_rounds / (2.0 * rounds);
  const double noise_scale = 2.0 * rounds / eps_rounds;
  const bool averaging = config.output_mode == OutputMode::average;

  History history;
  IterationTrace trace;
  std::vector<std::uint8_t> measured(workload.size(), 0);
  std::vector<double> scores(workload.size()), approx_answers(workload.size());
  std::vector<double> average_acc;
  if (averaging) {
    // Averaged iterates are only representable explicitly.
    average_acc.assign(export_histogram(dist, config.part_table_cap).weights().size(), 0.0);
  }

  auto diag_max_error = [&]() {
    double worst = 0.0;
    for (std::size_t q = 0; q < workload.size(); ++q) {
      worst = std::max(worst,
                       std::abs(factored_evaluate(workload[q], dist) - gate.diagnostic_answer(q)));
    }
    return worst;
  };

  if (config.diagnostics) {
    gate.diagnostic_source();  // marks the run non-private
    trace.psi_initial = psi_records(records, dist);
  }

  for (int i = 0; i < rounds; ++i) {
    if (averaging) {
      const Histogram snapshot = export_histogram(dist, config.part_table_cap);
      std::span<const double> w = snapshot.weights();
      for (std::size_t x = 0; x < w.size(); ++x) average_acc[x] += w[x];
    }

    std::span<const double> exact = gate.charged_workload_answers("select", eps_round);
    for (std::size_t q = 0; q < workload.size(); ++q) {
      approx_answers[q] = factored_evaluate(workload[q], dist);
      scores[q] = std::abs(approx_answers[q] - exact[q]);
    }
    const std::size_t qi = select_query(scores, measured, eps_round, rng);
    measured[qi] = 1;

    const double exact_qi = gate.charged_answer(qi, "measure", eps_round);
    double m = exact_qi + laplace_sample(noise_scale, rng);
    if (config.clamp_measurements) {
      m = std::clamp(m, n * workload[qi].min_value(), n * workload[qi].max_value());
    }
    const double l = m - approx_answers[qi];
    history.push_back({qi, m, l});

    partition_update(dist, workload[qi]);
    if (config.replay_passes > 0) {
      factored_mw_replay(dist, workload, history, config.replay_passes);
    } else {
      factored_mw_update(dist, workload[qi], m);
    }

    TraceEntry entry;
    entry.selected = qi;
    entry.measurement = m;
    if (config.diagnostics) {
      entry.true_score = scores[qi];
      entry.exact_answer = gate.diagnostic_answer(qi);
      entry.potential = psi_records(records, dist);
      entry.max_error = diag_max_error();
    }
    entry.elapsed_ms = ms_since(run_start);
    trace.rounds.push_back(entry);
  }

  std::optional<Histogram> averaged;
  if (averaging) {
    const double inv = 1.0 / static_cast<double>(rounds);
    for (double& x : average_acc) x *= inv;
    averaged.emplace(workload.universe(), std::move(average_acc), config.part_table_cap);
  }

  FactoredRunResult result{std::move(dist),
                           std::move(averaged),
                           std::move(history),
                           std::move(trace),
                           std::move(ledger),
                           gate.charged_touches(),
                           gate.diagnostics_used(),
                           {}};
  result.stats.total_ms = ms_since(run_start);
  result.stats.source_eval_ms = gate.source_eval_seconds() * 1000.0;
  result.stats.mwem_logic_ms = result.stats.total_ms - result.stats.source_eval_ms;
  result.stats.peak_table_entries = result.synthetic.peak_table_entries();
  return result;
}

}  // namespace mwem

#include "mwem/query.hpp"

#include <algorithm>
#include <cmath>

namespace mwem {

LinearQuery::LinearQuery(Kind kind, UniversePtr universe)
    : kind_(kind), universe_(std::move(universe)) {}

LinearQuery LinearQuery::range(UniversePtr universe, std::vector<Interval> intervals) {
  LinearQuery q(Kind::range, std::move(universe));
  const AttributeSchema& schema = q.universe_->schema();
  if (intervals.size() != schema.attribute_count()) {
    throw DomainError("range query needs one interval per attribute");
  }
  for (std::size_t a = 0; a < intervals.size(); ++a) {
    const Attribute& attr = schema.attribute(a);
    if (intervals[a].lo > intervals[a].hi || intervals[a].hi >= attr.cardinality) {
      throw DomainError("invalid interval for attribute '" + attr.name + "'");
    }
    if (intervals[a].lo != 0 || intervals[a].hi != attr.cardinality - 1) {
      q.footprint_.push_back(a);
    }
  }
  q.intervals_ = std::move(intervals);
  q.min_value_ = 0.0;
  q.max_value_ = 1.0;
  return q;
}

LinearQuery LinearQuery::parity(UniversePtr universe, std::vector<std::size_t> attributes) {
  LinearQuery q(Kind::parity, std::move(universe));
  const AttributeSchema& schema = q.universe_->schema();
  if (attributes.empty()) {
    throw DomainError("parity query needs a non-empty attribute subset");
  }
  std::sort(attributes.begin(), attributes.end());
  if (std::adjacent_find(attributes.begin(), attributes.end()) != attributes.end()) {
    throw DomainError("parity query attributes must be distinct");
  }
  q.parity_mask_.assign(schema.attribute_count(), 0);
  for (std::size_t a : attributes) {
    if (a >= schema.attribute_count()) {
      throw DomainError("parity query references unknown attribute index " + std::to_string(a));
    }
    if (schema.attribute(a).cardinality != 2) {
      throw DomainError("parity query requires binary attributes; '" +
                        schema.attribute(a).name + "' is not binary");
    }
    q.parity_mask_[a] = 1;
  }
  q.footprint_ = std::move(attributes);
  q.min_value_ = -1.0;
  q.max_value_ = 1.0;
  return q;
}

LinearQuery LinearQuery::cell(UniversePtr universe,
                              std::vector<std::pair<std::size_t, std::uint32_t>> assignment) {
  LinearQuery q(Kind::cell, std::move(universe));
  const AttributeSchema& schema = q.universe_->schema();
  std::sort(assignment.begin(), assignment.end());
  q.intervals_.resize(schema.attribute_count());
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    q.intervals_[a] = {0, schema.attribute(a).cardinality - 1};
  }
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto& [a, v] = assignment[i];
    if (a >= schema.attribute_count()) {
      throw DomainError("cell query references unknown attribute index " + std::to_string(a));
    }
    if (i > 0 && assignment[i - 1].first == a) {
      throw DomainError("cell query assigns attribute '" + schema.attribute(a).name + "' twice");
    }
    if (v >= schema.attribute(a).cardinality) {
      throw DomainError("cell query value out of range for attribute '" +
                        schema.attribute(a).name + "'");
    }
    q.intervals_[a] = {v, v};
    q.footprint_.push_back(a);
  }
  q.assignment_ = std::move(assignment);
  q.min_value_ = 0.0;
  q.max_value_ = 1.0;
  return q;
}

LinearQuery LinearQuery::custom(UniversePtr universe, std::vector<double> values) {
  LinearQuery q(Kind::custom, std::move(universe));
  const Universe& u = *q.universe_;
  if (!u.has_explicit_size() || u.size() > kCustomTableCap) {
    throw ResourceError("custom queries require |D| <= 2^16; use a structured kind");
  }
  if (values.size() != u.size()) {
    throw DomainError("custom query table length does not match universe size");
  }
  double lo = 1.0, hi = -1.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
      throw DomainError("custom query values must lie in [-1, +1]");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  q.table_ = std::move(values);
  q.min_value_ = std::min(lo, hi);
  q.max_value_ = std::max(lo, hi);
  for (std::size_t a = 0; a < u.attribute_count(); ++a) q.footprint_.push_back(a);
  return q;
}

double LinearQuery::attribute_factor(std::size_t attribute, std::uint32_t value) const {
  switch (kind_) {
    case Kind::range:
    case Kind::cell:
      return intervals_[attribute].contains(value) ? 1.0 : 0.0;
    case Kind::parity:
      if (!parity_mask_[attribute]) return 1.0;
      return (value & 1u) ? -1.0 : 1.0;
    case Kind::custom:
      break;
  }
  throw DomainError("custom queries have no per-attribute factorization");
}

double LinearQuery::value_on_tuple(std::span<const std::uint32_t> tuple) const {
  switch (kind_) {
    case Kind::range:
    case Kind::cell: {
      for (std::size_t a : footprint_) {
        if (!intervals_[a].contains(tuple[a])) return 0.0;
      }
      return 1.0;
    }
    case Kind::parity: {
      std::uint32_t bits = 0;
      for (std::size_t a : footprint_) bits ^= tuple[a];
      return (bits & 1u) ? -1.0 : 1.0;
    }
    case Kind::custom:
      return table_[universe_->index_of(tuple)];
  }
  return 0.0;
}

double LinearQuery::value_on_record(const RecordTable& table, std::size_t row) const {
  switch (kind_) {
    case Kind::range:
    case Kind::cell: {
      for (std::size_t a : footprint_) {
        if (!intervals_[a].contains(table.value(row, a))) return 0.0;
      }
      return 1.0;
    }
    case Kind::parity: {
      std::uint32_t bits = 0;
      for (std::size_t a : footprint_) bits ^= table.value(row, a);
      return (bits & 1u) ? -1.0 : 1.0;
    }
    case Kind::custom: {
      std::vector<std::uint32_t> tuple(table.attribute_count());
      table.copy_row(row, tuple);
      return table_[universe_->index_of(tuple)];
    }
  }
  return 0.0;
}

double LinearQuery::value_at(std::uint64_t index) const {
  if (kind_ == Kind::custom) return table_[index];
  return value_on_tuple(universe_->tuple_of(index));
}

double evaluate(const LinearQuery& query, const Histogram& hist) {
  if (!query.universe()->same_as(*hist.universe())) {
    throw DomainError("query and histogram universes differ");
  }
  std::span<const double> w = hist.weights();
  switch (query.kind()) {
    case LinearQuery::Kind::range:
    case LinearQuery::Kind::cell: {
      double sum = 0.0;
      for_each_box_run(*hist.universe(), query.box(), [&](std::uint64_t offset, std::uint64_t len) {
        for (std::uint64_t i = 0; i < len; ++i) sum += w[offset + i];
      });
      return sum;
    }
    case LinearQuery::Kind::parity: {
      double sum = 0.0;
      std::vector<std::uint8_t> mask(hist.universe()->attribute_count(), 0);
      for (std::size_t a : query.footprint()) mask[a] = 1;
      for_each_parity_sign(*hist.universe(), mask,
                           [&](std::uint64_t i, int sign) { sum += sign * w[i]; });
      return sum;
    }
    case LinearQuery::Kind::custom: {
      double sum = 0.0;
      std::span<const double> t = query.table();
      for (std::uint64_t i = 0; i < w.size(); ++i) sum += t[i] * w[i];
      return sum;
    }
  }
  return 0.0;
}

Workload::Workload(std::vector<LinearQuery> queries, std::string provenance)
    : queries_(std::move(queries)), provenance_(std::move(provenance)) {
  if (queries_.empty()) {
    throw DomainError("empty workload rejected");
  }
  const Universe& u = *queries_.front().universe();
  for (const LinearQuery& q : queries_) {
    if (!q.universe()->same_as(u)) {
      throw DomainError("workload queries must share one universe");
    }
  }
}

namespace {

Interval sample_interval(std::uint32_t cardinality, RngStream& rng) {
  // Uniform over all (lo, hi) pairs with lo <= hi.
  const std::uint64_t n = cardinality;
  std::uint64_t r = rng.next_below(n * (n + 1) / 2);
  for (std::uint32_t lo = 0; lo < cardinality; ++lo) {
    const std::uint64_t count = n - lo;
    if (r < count) return {lo, lo + static_cast<std::uint32_t>(r)};
    r -= count;
  }
  return {cardinality - 1, cardinality - 1};  // unreachable
}

// Lexicographic enumeration of size-k subsets of {0..n-1}.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k == 0) {
    fn(std::span<const std::size_t>());
    return;
  }
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(std::span<const std::size_t>(idx));
    std::size_t i = k;
    while (i-- > 0) {
      if (idx[i] != i + n - k) break;
      if (i == 0) return;
    }
    ++idx[i];
    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Workload random_range_workload(const UniversePtr& universe, std::size_t count, RngStream& rng) {
  if (count == 0) {
    throw DomainError("empty workload rejected");
  }
  const AttributeSchema& schema = universe->schema();
  std::vector<LinearQuery> queries;
  queries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Interval> intervals(schema.attribute_count());
    for (std::size_t a = 0; a < intervals.size(); ++a) {
      intervals[a] = sample_interval(schema.attribute(a).cardinality, rng);
    }
    queries.push_back(LinearQuery::range(universe, std::move(intervals)));
  }
  return Workload(std::move(queries), "random-range n=" + std::to_string(count));
}

Workload parity_workload(const UniversePtr& universe, int max_order) {
  if (max_order < 1) {
    throw DomainError("parity workload needs max_order >= 1");
  }
  const std::size_t d = universe->attribute_count();
  if (!universe->schema().all_binary()) {
    throw DomainError("parity workload requires a binary universe");
  }
  const std::size_t k = std::min<std::size_t>(d, static_cast<std::size_t>(max_order));
  std::vector<LinearQuery> queries;
  for (std::size_t size = 1; size <= k; ++size) {
    for_each_combination(d, size, [&](std::span<const std::size_t> subset) {
      queries.push_back(
          LinearQuery::parity(universe, std::vector<std::size_t>(subset.begin(), subset.end())));
    });
  }
  return Workload(std::move(queries), "parity order<=" + std::to_string(k));
}

std::vector<CuboidGroup> cuboid_workload(const UniversePtr& universe, int max_order,
                                         bool include_empty) {
  const std::size_t d = universe->attribute_count();
  if (max_order < 0 || static_cast<std::size_t>(max_order) > d) {
    throw DomainError("cuboid max_order must lie in [0, attribute count]");
  }
  std::vector<CuboidGroup> groups;
  const AttributeSchema& schema = universe->schema();
  auto emit = [&](std::span<const std::size_t> subset) {
    CuboidGroup group;
    group.attributes.assign(subset.begin(), subset.end());
    // Row-major odometer over the subset's values.
    std::vector<std::uint32_t> value(subset.size(), 0);
    while (true) {
      std::vector<std::pair<std::size_t, std::uint32_t>> assignment;
      assignment.reserve(subset.size());
      for (std::size_t i = 0; i < subset.size(); ++i) assignment.emplace_back(subset[i], value[i]);
      group.cells.push_back(LinearQuery::cell(universe, std::move(assignment)));
      std::size_t a = subset.size();
      bool done = subset.empty();
      while (a-- > 0) {
        if (++value[a] < schema.attribute(subset[a]).cardinality) break;
        value[a] = 0;
        if (a == 0) done = true;
      }
      if (done) break;
    }
    groups.push_back(std::move(group));
  };
  for (std::size_t size = include_empty ? 0 : 1;
       size <= static_cast<std::size_t>(max_order); ++size) {
    for_each_combination(d, size, emit);
  }
  return groups;
}

HadamardMatrix hadamard_matrix(int order) {
  if (order < 1) {
    throw DomainError("Hadamard order must be >= 1");
  }
  const std::uint64_t side = std::uint64_t(1) << (order - 1);
  if (side > kHadamardSideCap) {
    throw ResourceError("Hadamard matrix side exceeds cap 2^13");
  }
  HadamardMatrix h;
  h.side = side;
  h.values.assign(side * side, 1);
  // H_{m+1} = [[H_m, H_m], [H_m, -H_m]], grown in place.
  for (std::uint64_t s = 1; s < side; s *= 2) {
    for (std::uint64_t r = 0; r < s; ++r) {
      for (std::uint64_t c = 0; c < s; ++c) {
        const std::int8_t v = h.values[r * side + c];
        h.values[r * side + (c + s)] = v;
        h.values[(r + s) * side + c] = v;
        h.values[(r + s) * side + (c + s)] = static_cast<std::int8_t>(-v);
      }
    }
  }
  return h;
}

std::vector<double> marginal_of(const Histogram& hist, std::span<const std::size_t> attributes) {
  if (attributes.empty()) {
    throw DomainError("marginal requires a non-empty attribute subset");
  }
  const Universe& u = *hist.universe();
  const std::size_t d = u.attribute_count();
  for (std::size_t a : attributes) {
    if (a >= d) {
      throw DomainError("marginal references unknown attribute index " + std::to_string(a));
    }
  }
  std::vector<std::uint64_t> cell_stride(attributes.size());
  std::uint64_t cells = 1;
  for (std::size_t i = attributes.size(); i-- > 0;) {
    cell_stride[i] = cells;
    cells *= u.schema().attribute(attributes[i]).cardinality;
  }
  std::vector<double> marginal(cells, 0.0);
  std::vector<std::uint32_t> tuple(d, 0);
  std::span<const double> w = hist.weights();
  for (std::uint64_t x = 0; x < u.size(); ++x) {
    std::uint64_t cell = 0;
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      cell += cell_stride[i] * tuple[attributes[i]];
    }
    marginal[cell] += w[x];
    std::size_t a = d;
    while (a-- > 0) {
      if (++tuple[a] < u.schema().attribute(a).cardinality) break;
      tuple[a] = 0;
    }
  }
  return marginal;
}

}  // namespace mwem

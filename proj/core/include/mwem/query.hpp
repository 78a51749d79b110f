#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/rng.hpp"

namespace mwem {

// Explicit value tables (custom queries, Hadamard matrices) are capped.
inline constexpr std::uint64_t kCustomTableCap = std::uint64_t(1) << 16;
inline constexpr std::uint64_t kHadamardSideCap = std::uint64_t(1) << 13;

// Inclusive value interval for one attribute.
struct Interval {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  bool contains(std::uint32_t v) const { return v >= lo && v <= hi; }
  std::uint32_t width() const { return hi - lo + 1; }
};

// A function from universe elements to [-1, +1], evaluated against datasets
// by weighted summation. Range and cell queries are {0,1}-valued indicator
// (counting) queries; parity queries are {-1,+1}-valued; custom queries carry
// an explicit per-element table.
class LinearQuery {
 public:
  enum class Kind { range, parity, cell, custom };

  // Indicator of a cross product of intervals, one per attribute.
  static LinearQuery range(UniversePtr universe, std::vector<Interval> intervals);
  // +1 on records with an even number of the subset's bits set, -1 otherwise.
  // All listed attributes must be binary.
  static LinearQuery parity(UniversePtr universe, std::vector<std::size_t> attributes);
  // Indicator of a conjunction attribute=value; the empty conjunction is the
  // constant-1 (total count) query.
  static LinearQuery cell(UniversePtr universe,
                          std::vector<std::pair<std::size_t, std::uint32_t>> assignment);
  // Explicit value table over the whole (small) universe; values in [-1, +1].
  static LinearQuery custom(UniversePtr universe, std::vector<double> values);

  Kind kind() const { return kind_; }
  const UniversePtr& universe() const { return universe_; }

  // Attributes the query actually constrains, ascending. Range intervals that
  // cover an attribute's whole domain do not count; custom queries touch
  // every attribute.
  const std::vector<std::size_t>& footprint() const { return footprint_; }

  // True for kinds whose value is a product of per-attribute factors.
  bool is_product_form() const { return kind_ != Kind::custom; }

  // Structural value bounds (used for measurement clamping).
  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }
  bool is_counting() const { return min_value_ >= 0.0; }

  // Per-attribute factor for product-form kinds; 1 for unconstrained attributes.
  double attribute_factor(std::size_t attribute, std::uint32_t value) const;

  double value_on_tuple(std::span<const std::uint32_t> tuple) const;
  double value_on_record(const RecordTable& table, std::size_t row) const;
  double value_at(std::uint64_t index) const;

  // Payload accessors.
  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<std::pair<std::size_t, std::uint32_t>>& assignment() const {
    return assignment_;
  }
  std::span<const double> table() const { return table_; }

  // Range view of the query's support, one interval per attribute (range and
  // cell kinds only); used for box-restricted evaluation and updates.
  std::span<const Interval> box() const { return intervals_; }

 private:
  LinearQuery(Kind kind, UniversePtr universe);

  Kind kind_;
  UniversePtr universe_;
  std::vector<std::size_t> footprint_;
  std::vector<Interval> intervals_;  // range & cell (cell stored as point intervals)
  std::vector<std::pair<std::size_t, std::uint32_t>> assignment_;  // cell
  std::vector<double> table_;                                      // custom
  std::vector<std::uint8_t> parity_mask_;                          // parity
  double min_value_ = 0.0;
  double max_value_ = 1.0;
};

// q(A) = sum_x q(x) * A(x).
double evaluate(const LinearQuery& query, const Histogram& hist);

// Ordered, immutable query set; the index of a query is its identity.
class Workload {
 public:
  Workload(std::vector<LinearQuery> queries, std::string provenance);

  std::size_t size() const { return queries_.size(); }
  const LinearQuery& operator[](std::size_t i) const { return queries_[i]; }
  const std::vector<LinearQuery>& queries() const { return queries_; }
  const std::string& provenance() const { return provenance_; }
  const UniversePtr& universe() const { return queries_.front().universe(); }

  auto begin() const { return queries_.begin(); }
  auto end() const { return queries_.end(); }

 private:
  std::vector<LinearQuery> queries_;
  std::string provenance_;
};

// `count` range queries with per-attribute intervals drawn uniformly from all
// (lo, hi) pairs with lo <= hi.
Workload random_range_workload(const UniversePtr& universe, std::size_t count, RngStream& rng);

// One parity query per non-empty attribute subset of size <= max_order,
// ordered by subset size then lexicographically. Binary universes only.
Workload parity_workload(const UniversePtr& universe, int max_order);

// A marginal over one attribute subset: its cells partition the universe.
struct CuboidGroup {
  std::vector<std::size_t> attributes;  // ascending; empty = total-count cuboid
  std::vector<LinearQuery> cells;       // row-major over the attributes' values
  std::size_t cell_count() const { return cells.size(); }
};

// One group per attribute subset of size 1..max_order (plus the empty subset
// when include_empty is set), ordered by size then lexicographically.
std::vector<CuboidGroup> cuboid_workload(const UniversePtr& universe, int max_order,
                                         bool include_empty = false);

// Sylvester-ordered sign matrix of side 2^(order-1); row i is the value table
// of the parity query on the attribute set encoded by the bits of i.
struct HadamardMatrix {
  std::size_t side = 0;
  std::vector<std::int8_t> values;  // row-major
  int at(std::size_t row, std::size_t col) const { return values[row * side + col]; }
};

HadamardMatrix hadamard_matrix(int order);

// Cell counts over the chosen attributes, row-major in the given order.
std::vector<double> marginal_of(const Histogram& hist, std::span<const std::size_t> attributes);

// --- Iteration helpers -------------------------------------------------------

// Calls fn(offset, length) for every contiguous index run inside the sub-box
// described by one inclusive interval per attribute.
template <typename Fn>
void for_each_box_run(const Universe& universe, std::span<const Interval> box, Fn&& fn) {
  const std::size_t d = universe.attribute_count();
  std::uint64_t run = box[d - 1].width();  // last attribute has stride 1
  if (d == 1) {
    fn(static_cast<std::uint64_t>(box[0].lo), run);
    return;
  }
  std::vector<std::uint32_t> value(d - 1);
  std::uint64_t base = box[d - 1].lo;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    value[i] = box[i].lo;
    base += universe.stride(i) * box[i].lo;
  }
  while (true) {
    fn(base, run);
    std::size_t a = d - 1;
    while (a-- > 0) {
      if (value[a] < box[a].hi) {
        ++value[a];
        base += universe.stride(a);
        break;
      }
      base -= universe.stride(a) * (box[a].hi - box[a].lo);
      value[a] = box[a].lo;
      if (a == 0) return;
    }
  }
}

// Calls fn(index, sign) for every universe element in index order, where sign
// is +1/-1 by the parity of the masked (binary) attributes.
template <typename Fn>
void for_each_parity_sign(const Universe& universe, std::span<const std::uint8_t> mask, Fn&& fn) {
  const std::size_t d = universe.attribute_count();
  const std::uint64_t size = universe.size();
  std::vector<std::uint32_t> value(d, 0);
  int sign = 1;
  for (std::uint64_t i = 0; i < size; ++i) {
    fn(i, sign);
    std::size_t a = d;
    while (a-- > 0) {
      const std::uint32_t card = universe.schema().attribute(a).cardinality;
      if (mask[a]) sign = -sign;  // binary attribute: any step flips parity
      if (++value[a] < card) break;
      value[a] = 0;
    }
  }
}

}  // namespace mwem

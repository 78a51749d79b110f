#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwem/errors.hpp"

namespace mwem {

// Largest element count an explicitly materialized weight vector may have.
// Larger record universes must go through the factored engine.
inline constexpr std::uint64_t kDefaultExplicitCap = std::uint64_t(1) << 26;

struct Attribute {
  std::string name;
  std::uint32_t cardinality = 0;
};

// Ordered list of named attributes. Immutable after construction; attribute
// order fixes the record layout and the row-major index order everywhere.
class AttributeSchema {
 public:
  explicit AttributeSchema(std::vector<Attribute> attributes);

  std::size_t attribute_count() const { return attributes_.size(); }
  const Attribute& attribute(std::size_t i) const { return attributes_[i]; }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::optional<std::size_t> find(std::string_view name) const;
  bool all_binary() const;

  bool operator==(const AttributeSchema& other) const;

 private:
  std::vector<Attribute> attributes_;
};

// Convenience: schema with generated names ("a0", "a1", ...).
AttributeSchema make_schema(std::span<const std::uint32_t> cardinalities);
AttributeSchema make_schema(std::initializer_list<std::uint32_t> cardinalities);

// The record universe D: cross product of the schema's attribute domains,
// with a row-major bijection between element indices and value tuples
// (first attribute most significant). Domains with more than 2^64 elements
// carry only their log2 size; index/tuple mapping then refuses to run.
class Universe {
 public:
  static std::shared_ptr<const Universe> create(AttributeSchema schema);

  const AttributeSchema& schema() const { return schema_; }
  std::size_t attribute_count() const { return schema_.attribute_count(); }

  bool has_explicit_size() const { return has_explicit_size_; }
  // Element count; throws ResourceError when the product exceeds 2^64.
  std::uint64_t size() const;
  double log2_size() const { return log2_size_; }
  // Natural log of |D|; valid for arbitrarily large universes.
  double log_size() const;

  std::uint64_t index_of(std::span<const std::uint32_t> tuple) const;
  void tuple_of(std::uint64_t index, std::span<std::uint32_t> out) const;
  std::vector<std::uint32_t> tuple_of(std::uint64_t index) const;
  std::uint64_t stride(std::size_t attribute) const { return strides_[attribute]; }

  bool same_as(const Universe& other) const;

 private:
  explicit Universe(AttributeSchema schema);

  AttributeSchema schema_;
  bool has_explicit_size_ = false;
  std::uint64_t size_ = 0;
  double log2_size_ = 0.0;
  std::vector<std::uint64_t> strides_;
};

using UniversePtr = std::shared_ptr<const Universe>;

// Nonnegative weight per universe element with total mass n. Weights are
// doubles: multiplicative-weights runs produce fractional weightings even
// when the input is integer counts.
class Histogram {
 public:
  Histogram(UniversePtr universe, std::vector<double> weights,
            std::uint64_t explicit_cap = kDefaultExplicitCap);
  // All-zero histogram.
  explicit Histogram(UniversePtr universe, std::uint64_t explicit_cap = kDefaultExplicitCap);

  const UniversePtr& universe() const { return universe_; }
  std::uint64_t size() const { return weights_.size(); }
  double mass() const { return mass_; }

  double weight(std::uint64_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  // Mutable access for update rules; call recompute_mass() or
  // renormalize_to() afterwards to restore the mass invariant.
  std::vector<double>& mutable_weights() { return weights_; }

  double recompute_mass();
  // Scales all weights so the mass equals target exactly.
  void renormalize_to(double target);
  double min_weight() const;

 private:
  UniversePtr universe_;
  std::vector<double> weights_;
  double mass_ = 0.0;
};

// Raw microdata: one integer-coded value per (row, attribute). Backed by
// bytes when every cardinality fits, so thousand-attribute tables stay small.
class RecordTable {
 public:
  RecordTable(AttributeSchema schema, std::size_t row_capacity_hint = 0);

  const AttributeSchema& schema() const { return schema_; }
  std::size_t row_count() const { return rows_; }
  std::size_t attribute_count() const { return schema_.attribute_count(); }

  void append_row(std::span<const std::uint32_t> values);

  std::uint32_t value(std::size_t row, std::size_t attribute) const {
    const std::size_t at = row * schema_.attribute_count() + attribute;
    return narrow_ ? static_cast<std::uint32_t>(data8_[at]) : data32_[at];
  }
  void copy_row(std::size_t row, std::span<std::uint32_t> out) const;

 private:
  AttributeSchema schema_;
  std::size_t rows_ = 0;
  bool narrow_ = true;
  std::vector<std::uint8_t> data8_;
  std::vector<std::uint32_t> data32_;
};

// Counts rows into an explicit histogram; mass equals the row count.
Histogram histogram_from_records(const RecordTable& table,
                                 std::uint64_t explicit_cap = kDefaultExplicitCap);

// n times the uniform distribution over the universe.
Histogram uniform_histogram(const UniversePtr& universe, double mass,
                            std::uint64_t explicit_cap = kDefaultExplicitCap);

}  // namespace mwem

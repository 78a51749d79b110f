#include "mwem/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace mwem {

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes)
    : attributes_(std::move(attributes)) {
  if (attributes_.empty()) {
    throw DomainError("schema must declare at least one attribute");
  }
  std::unordered_set<std::string_view> seen;
  for (const Attribute& a : attributes_) {
    if (a.cardinality < 2) {
      throw DomainError("attribute '" + a.name + "' must have cardinality >= 2");
    }
    if (!seen.insert(a.name).second) {
      throw DomainError("duplicate attribute name '" + a.name + "'");
    }
  }
}

std::optional<std::size_t> AttributeSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

bool AttributeSchema::all_binary() const {
  return std::all_of(attributes_.begin(), attributes_.end(),
                     [](const Attribute& a) { return a.cardinality == 2; });
}

bool AttributeSchema::operator==(const AttributeSchema& other) const {
  if (attributes_.size() != other.attributes_.size()) return false;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name != other.attributes_[i].name ||
        attributes_[i].cardinality != other.attributes_[i].cardinality) {
      return false;
    }
  }
  return true;
}

AttributeSchema make_schema(std::span<const std::uint32_t> cardinalities) {
  std::vector<Attribute> attrs;
  attrs.reserve(cardinalities.size());
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    attrs.push_back({"a" + std::to_string(i), cardinalities[i]});
  }
  return AttributeSchema(std::move(attrs));
}

AttributeSchema make_schema(std::initializer_list<std::uint32_t> cardinalities) {
  std::vector<std::uint32_t> cards(cardinalities);
  return make_schema(std::span<const std::uint32_t>(cards));
}

Universe::Universe(AttributeSchema schema) : schema_(std::move(schema)) {
  const std::size_t d = schema_.attribute_count();
  strides_.assign(d, 0);
  // Row-major: first attribute most significant.
  bool overflow = false;
  std::uint64_t size = 1;
  for (std::size_t i = d; i-- > 0;) {
    strides_[i] = overflow ? 0 : size;
    const std::uint64_t card = schema_.attribute(i).cardinality;
    if (!overflow && size > std::numeric_limits<std::uint64_t>::max() / card) {
      overflow = true;
    } else if (!overflow) {
      size *= card;
    }
  }
  has_explicit_size_ = !overflow;
  size_ = overflow ? 0 : size;
  log2_size_ = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    log2_size_ += std::log2(static_cast<double>(schema_.attribute(i).cardinality));
  }
}

std::shared_ptr<const Universe> Universe::create(AttributeSchema schema) {
  return std::shared_ptr<const Universe>(new Universe(std::move(schema)));
}

std::uint64_t Universe::size() const {
  if (!has_explicit_size_) {
    throw ResourceError("universe has more than 2^64 elements; use the factored engine");
  }
  return size_;
}

double Universe::log_size() const { return log2_size_ * std::log(2.0); }

std::uint64_t Universe::index_of(std::span<const std::uint32_t> tuple) const {
  if (!has_explicit_size_) {
    throw ResourceError("index_of requires an explicitly sized universe");
  }
  if (tuple.size() != schema_.attribute_count()) {
    throw DomainError("tuple length does not match attribute count");
  }
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const Attribute& a = schema_.attribute(i);
    if (tuple[i] >= a.cardinality) {
      throw DomainError("value " + std::to_string(tuple[i]) + " out of range for attribute '" +
                        a.name + "' (cardinality " + std::to_string(a.cardinality) + ")");
    }
    index += strides_[i] * tuple[i];
  }
  return index;
}

void Universe::tuple_of(std::uint64_t index, std::span<std::uint32_t> out) const {
  if (!has_explicit_size_) {
    throw ResourceError("tuple_of requires an explicitly sized universe");
  }
  if (index >= size_) {
    throw DomainError("element index " + std::to_string(index) + " out of range");
  }
  if (out.size() != schema_.attribute_count()) {
    throw DomainError("output tuple length does not match attribute count");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint32_t>(index / strides_[i]);
    index %= strides_[i];
  }
}

std::vector<std::uint32_t> Universe::tuple_of(std::uint64_t index) const {
  std::vector<std::uint32_t> out(schema_.attribute_count());
  tuple_of(index, std::span<std::uint32_t>(out));
  return out;
}

bool Universe::same_as(const Universe& other) const {
  return this == &other || schema_ == other.schema_;
}

namespace {

std::uint64_t checked_explicit_size(const Universe& universe, std::uint64_t cap) {
  if (!universe.has_explicit_size() || universe.size() > cap) {
    throw ResourceError("universe size exceeds the explicit-histogram cap (" +
                        std::to_string(cap) + "); use the factored engine");
  }
  return universe.size();
}

}  // namespace

Histogram::Histogram(UniversePtr universe, std::vector<double> weights, std::uint64_t explicit_cap)
    : universe_(std::move(universe)), weights_(std::move(weights)) {
  const std::uint64_t size = checked_explicit_size(*universe_, explicit_cap);
  if (weights_.size() != size) {
    throw DomainError("weight vector length does not match universe size");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("histogram weights must be finite and nonnegative");
    }
  }
  recompute_mass();
}

Histogram::Histogram(UniversePtr universe, std::uint64_t explicit_cap)
    : universe_(std::move(universe)) {
  const std::uint64_t size = checked_explicit_size(*universe_, explicit_cap);
  weights_.assign(size, 0.0);
  mass_ = 0.0;
}

double Histogram::recompute_mass() {
  mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  return mass_;
}

void Histogram::renormalize_to(double target) {
  const double current = recompute_mass();
  if (!(current > 0.0)) {
    throw DomainError("cannot renormalize a histogram with zero mass");
  }
  const double scale = target / current;
  for (double& w : weights_) w *= scale;
  mass_ = target;
}

double Histogram::min_weight() const {
  return *std::min_element(weights_.begin(), weights_.end());
}

RecordTable::RecordTable(AttributeSchema schema, std::size_t row_capacity_hint)
    : schema_(std::move(schema)) {
  narrow_ = std::all_of(schema_.attributes().begin(), schema_.attributes().end(),
                        [](const Attribute& a) { return a.cardinality <= 256; });
  const std::size_t cells = row_capacity_hint * schema_.attribute_count();
  if (narrow_) {
    data8_.reserve(cells);
  } else {
    data32_.reserve(cells);
  }
}

void RecordTable::append_row(std::span<const std::uint32_t> values) {
  if (values.size() != schema_.attribute_count()) {
    throw DomainError("row length does not match attribute count");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Attribute& a = schema_.attribute(i);
    if (values[i] >= a.cardinality) {
      throw DomainError("row " + std::to_string(rows_) + ": value " + std::to_string(values[i]) +
                        " out of range for attribute '" + a.name + "'");
    }
  }
  if (narrow_) {
    for (std::uint32_t v : values) data8_.push_back(static_cast<std::uint8_t>(v));
  } else {
    data32_.insert(data32_.end(), values.begin(), values.end());
  }
  ++rows_;
}

void RecordTable::copy_row(std::size_t row, std::span<std::uint32_t> out) const {
  for (std::size_t i = 0; i < schema_.attribute_count(); ++i) {
    out[i] = value(row, i);
  }
}

Histogram histogram_from_records(const RecordTable& table, std::uint64_t explicit_cap) {
  UniversePtr universe = Universe::create(table.schema());
  Histogram hist(universe, explicit_cap);
  std::vector<double>& weights = hist.mutable_weights();
  std::vector<std::uint32_t> tuple(table.attribute_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    table.copy_row(r, tuple);
    weights[universe->index_of(tuple)] += 1.0;
  }
  hist.recompute_mass();
  return hist;
}

Histogram uniform_histogram(const UniversePtr& universe, double mass, std::uint64_t explicit_cap) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) {
    throw DomainError("uniform histogram mass must be finite and nonnegative");
  }
  Histogram hist(universe, explicit_cap);
  const double w = mass / static_cast<double>(hist.size());
  std::fill(hist.mutable_weights().begin(), hist.mutable_weights().end(), w);
  hist.recompute_mass();
  return hist;
}

}  // namespace mwem

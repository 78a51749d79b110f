#include "mwem/synthetic.hpp"

#include <string>

namespace mwem {

namespace {

AttributeSchema binary_schema(std::size_t attributes, const std::string& prefix) {
  std::vector<Attribute> attrs;
  attrs.reserve(attributes);
  for (std::size_t i = 0; i < attributes; ++i) {
    attrs.push_back({prefix + std::to_string(i), 2});
  }
  return AttributeSchema(std::move(attrs));
}

}  // namespace

RecordTable synthetic_binary_independent(std::size_t rows, std::size_t attributes, double p,
                                         RngStream& rng) {
  RecordTable table(binary_schema(attributes, "x"), rows);
  std::vector<std::uint32_t> row(attributes);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t a = 0; a < attributes; ++a) {
      row[a] = rng.next_double() < p ? 1u : 0u;
    }
    table.append_row(row);
  }
  return table;
}

RecordTable synthetic_binary_chain(std::size_t rows, std::size_t attributes, double flip_prob,
                                   RngStream& rng) {
  RecordTable table(binary_schema(attributes, "x"), rows);
  std::vector<std::uint32_t> row(attributes);
  for (std::size_t r = 0; r < rows; ++r) {
    row[0] = rng.next_double() < 0.5 ? 1u : 0u;
    for (std::size_t a = 1; a < attributes; ++a) {
      const bool flip = rng.next_double() < flip_prob;
      row[a] = flip ? (1u - row[a - 1]) : row[a - 1];
    }
    table.append_row(row);
  }
  return table;
}

RecordTable synthetic_pattern_mixture(const AttributeSchema& schema, std::size_t rows,
                                      std::span<const std::vector<std::uint32_t>> patterns,
                                      std::span<const double> pattern_weights, double noise,
                                      RngStream& rng) {
  if (patterns.empty() || patterns.size() != pattern_weights.size()) {
    throw DomainError("pattern mixture needs matching pattern and weight lists");
  }
  double total = 0.0;
  for (double w : pattern_weights) {
    if (!(w > 0.0)) throw DomainError("pattern weights must be positive");
    total += w;
  }
  RecordTable table(schema, rows);
  std::vector<std::uint32_t> row(schema.attribute_count());
  for (std::size_t r = 0; r < rows; ++r) {
    double pick = total * rng.next_double();
    std::size_t k = 0;
    for (; k + 1 < patterns.size(); ++k) {
      pick -= pattern_weights[k];
      if (pick <= 0.0) break;
    }
    for (std::size_t a = 0; a < row.size(); ++a) {
      row[a] = patterns[k][a];
      if (noise > 0.0 && rng.next_double() < noise) {
        row[a] = static_cast<std::uint32_t>(
            rng.next_below(schema.attribute(a).cardinality));
      }
    }
    table.append_row(row);
  }
  return table;
}

RecordTable append_noise_attributes(const RecordTable& table, std::size_t extra, double p,
                                    RngStream& rng) {
  std::vector<Attribute> attrs = table.schema().attributes();
  for (std::size_t i = 0; i < extra; ++i) {
    attrs.push_back({"noise" + std::to_string(i), 2});
  }
  RecordTable out(AttributeSchema(std::move(attrs)), table.row_count());
  std::vector<std::uint32_t> row(out.attribute_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t a = 0; a < table.attribute_count(); ++a) row[a] = table.value(r, a);
    for (std::size_t a = table.attribute_count(); a < out.attribute_count(); ++a) {
      row[a] = rng.next_double() < p ? 1u : 0u;
    }
    out.append_row(row);
  }
  return out;
}

}  // namespace mwem

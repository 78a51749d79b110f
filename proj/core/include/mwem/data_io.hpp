#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/factored.hpp"
#include "mwem/rng.hpp"

namespace mwem {

// Declared shape of one CSV column: either a plain cardinality (values are
// integers in [0, cardinality)) or an explicit category list mapped to codes
// in declaration order.
struct ColumnSpec {
  std::string name;
  std::uint32_t cardinality = 0;          // 0 when categories drive the shape
  std::vector<std::string> categories;    // empty for integer-coded columns
  bool infer = false;                     // cardinality = max seen value + 1
};

struct SchemaSpec {
  std::vector<ColumnSpec> columns;

  // "name:card,name:card" or "auto" (infer every column).
  static SchemaSpec parse(const std::string& text);
};

// Reads a CSV with a header row naming the attributes. Column order follows
// the schema spec; every spec column must appear in the header.
RecordTable ingest_csv(const std::string& path, const SchemaSpec& schema);
RecordTable ingest_csv(std::istream& in, const SchemaSpec& schema, const std::string& origin);

enum class BinarizeStrategy { bitwise_log, one_hot };

// Tracks how a binarized table's attributes map back to the source schema.
struct BinaryCodec {
  AttributeSchema source;
  BinarizeStrategy strategy = BinarizeStrategy::bitwise_log;
  std::vector<std::size_t> bits_per_attribute;

  std::uint32_t decode(std::size_t source_attribute,
                       std::span<const std::uint32_t> binary_row) const;
};

struct BinarizeResult {
  RecordTable table;
  BinaryCodec codec;
};

// bitwise_log: an attribute of cardinality c becomes ceil(log2 c) binary
// attributes holding the value's bits, most significant first. one_hot: one
// indicator attribute per value.
BinarizeResult binarize(const RecordTable& table, BinarizeStrategy strategy);

enum class ExportFormat { weighted, sampled };

// weighted: one row per universe element (tuple values + weight).
// sampled: round(n) records drawn proportionally to the weights.
void export_synthetic(const Histogram& hist, const std::string& path, ExportFormat format,
                      RngStream& rng);
// Factored variant: weighted export materializes (small universes only);
// sampled export draws per part and composes tuples.
void export_synthetic(const FactoredDistribution& dist, const std::string& path,
                      ExportFormat format, RngStream& rng);

// Reads a weighted-domain CSV (as written by export_synthetic) back into an
// explicit histogram over the given universe.
Histogram read_weighted_csv(const std::string& path, const UniversePtr& universe);

}  // namespace mwem

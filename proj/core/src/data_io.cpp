#include "mwem/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace mwem {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SchemaSpec SchemaSpec::parse(const std::string& text) {
  SchemaSpec spec;
  if (trim(text) == "auto") return spec;  // empty columns = infer everything
  for (const std::string& piece : split(text, ',')) {
    const std::string entry = trim(piece);
    if (entry.empty()) continue;
    const auto colon = entry.rfind(':');
    if (colon == std::string::npos) {
      throw ConfigError("schema entry '" + entry + "' must look like name:cardinality");
    }
    ColumnSpec col;
    col.name = trim(entry.substr(0, colon));
    const std::string card = trim(entry.substr(colon + 1));
    if (card == "auto") {
      col.infer = true;
    } else {
      try {
        col.cardinality = static_cast<std::uint32_t>(std::stoul(card));
      } catch (const std::exception&) {
        throw ConfigError("schema entry '" + entry + "' has a non-numeric cardinality");
      }
    }
    if (col.name.empty()) {
      throw ConfigError("schema entry '" + entry + "' is missing a name");
    }
    spec.columns.push_back(std::move(col));
  }
  if (spec.columns.empty()) {
    throw ConfigError("schema spec declares no columns");
  }
  return spec;
}

RecordTable ingest_csv(const std::string& path, const SchemaSpec& schema) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open input file '" + path + "'");
  }
  return ingest_csv(in, schema, path);
}

RecordTable ingest_csv(std::istream& in, const SchemaSpec& schema, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DomainError(origin + ": missing header row");
  }
  const std::vector<std::string> header = split(line, ',');
  std::vector<std::string> header_names(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) header_names[i] = trim(header[i]);

  // Infer-everything mode: one column spec per header name.
  std::vector<ColumnSpec> columns = schema.columns;
  if (columns.empty()) {
    for (const std::string& name : header_names) {
      ColumnSpec col;
      col.name = name;
      col.infer = true;
      columns.push_back(std::move(col));
    }
  }

  std::vector<std::size_t> column_of(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto it = std::find(header_names.begin(), header_names.end(), columns[c].name);
    if (it == header_names.end()) {
      throw DomainError(origin + ": missing column '" + columns[c].name + "'");
    }
    column_of[c] = static_cast<std::size_t>(it - header_names.begin());
  }

  std::vector<std::unordered_map<std::string, std::uint32_t>> category_codes(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::uint32_t v = 0; v < columns[c].categories.size(); ++v) {
      category_codes[c][columns[c].categories[v]] = v;
    }
  }

  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::uint32_t> max_seen(columns.size(), 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != header_names.size()) {
      throw DomainError(origin + ": row " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header_names.size()));
    }
    std::vector<std::uint32_t> row(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string value = trim(fields[column_of[c]]);
      if (!columns[c].categories.empty()) {
        const auto it = category_codes[c].find(value);
        if (it == category_codes[c].end()) {
          throw DomainError(origin + ": row " + std::to_string(line_no) + ": unknown category '" +
                            value + "' for attribute '" + columns[c].name + "'");
        }
        row[c] = it->second;
      } else {
        try {
          row[c] = static_cast<std::uint32_t>(std::stoul(value));
        } catch (const std::exception&) {
          throw DomainError(origin + ": row " + std::to_string(line_no) +
                            ": non-integer value '" + value + "' for attribute '" +
                            columns[c].name + "'");
        }
        if (!columns[c].infer && row[c] >= columns[c].cardinality) {
          throw DomainError(origin + ": row " + std::to_string(line_no) + ": value " + value +
                            " out of range for attribute '" + columns[c].name +
                            "' (cardinality " + std::to_string(columns[c].cardinality) + ")");
        }
      }
      max_seen[c] = std::max(max_seen[c], row[c]);
    }
    rows.push_back(std::move(row));
  }

  std::vector<Attribute> attrs;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::uint32_t card = columns[c].cardinality;
    if (!columns[c].categories.empty()) card = static_cast<std::uint32_t>(columns[c].categories.size());
    if (columns[c].infer) card = std::max<std::uint32_t>(max_seen[c] + 1, 2);
    attrs.push_back({columns[c].name, card});
  }
  RecordTable table(AttributeSchema(std::move(attrs)), rows.size());
  for (const auto& row : rows) table.append_row(row);
  return table;
}

std::uint32_t BinaryCodec::decode(std::size_t source_attribute,
                                  std::span<const std::uint32_t> binary_row) const {
  std::size_t offset = 0;
  for (std::size_t a = 0; a < source_attribute; ++a) offset += bits_per_attribute[a];
  const std::size_t width = bits_per_attribute[source_attribute];
  if (strategy == BinarizeStrategy::bitwise_log) {
    std::uint32_t value = 0;
    for (std::size_t b = 0; b < width; ++b) {
      value = (value << 1) | binary_row[offset + b];
    }
    return value;
  }
  for (std::size_t b = 0; b < width; ++b) {
    if (binary_row[offset + b]) return static_cast<std::uint32_t>(b);
  }
  throw DomainError("one-hot row has no set indicator for attribute " +
                    std::to_string(source_attribute));
}

BinarizeResult binarize(const RecordTable& table, BinarizeStrategy strategy) {
  const AttributeSchema& source = table.schema();
  std::vector<Attribute> attrs;
  std::vector<std::size_t> bits_per(source.attribute_count());
  for (std::size_t a = 0; a < source.attribute_count(); ++a) {
    const Attribute& attr = source.attribute(a);
    std::size_t width;
    if (strategy == BinarizeStrategy::bitwise_log) {
      width = 0;
      while ((std::uint64_t(1) << width) < attr.cardinality) ++width;
      width = std::max<std::size_t>(width, 1);
      for (std::size_t b = 0; b < width; ++b) {
        attrs.push_back({attr.name + ".b" + std::to_string(width - 1 - b), 2});
      }
    } else {
      width = attr.cardinality;
      for (std::size_t v = 0; v < width; ++v) {
        attrs.push_back({attr.name + ".v" + std::to_string(v), 2});
      }
    }
    bits_per[a] = width;
  }

  BinarizeResult result{RecordTable(AttributeSchema(std::move(attrs)), table.row_count()),
                        BinaryCodec{source, strategy, std::move(bits_per)}};
  std::vector<std::uint32_t> out(result.table.attribute_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::size_t at = 0;
    for (std::size_t a = 0; a < source.attribute_count(); ++a) {
      const std::uint32_t v = table.value(r, a);
      const std::size_t width = result.codec.bits_per_attribute[a];
      if (strategy == BinarizeStrategy::bitwise_log) {
        for (std::size_t b = 0; b < width; ++b) {
          out[at++] = (v >> (width - 1 - b)) & 1u;
        }
      } else {
        for (std::size_t b = 0; b < width; ++b) {
          out[at++] = (b == v) ? 1u : 0u;
        }
      }
    }
    result.table.append_row(out);
  }
  return result;
}

namespace {

void write_header(std::ostream& out, const AttributeSchema& schema, bool with_weight) {
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    if (a) out << ',';
    out << schema.attribute(a).name;
  }
  if (with_weight) out << ",weight";
  out << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot open output file '" + path + "'");
  }
  out.precision(17);
  return out;
}

}  // namespace

void export_synthetic(const Histogram& hist, const std::string& path, ExportFormat format,
                      RngStream& rng) {
  std::ofstream out = open_out(path);
  const Universe& u = *hist.universe();
  if (format == ExportFormat::weighted) {
    write_header(out, u.schema(), true);
    std::vector<std::uint32_t> tuple(u.attribute_count());
    for (std::uint64_t x = 0; x < u.size(); ++x) {
      u.tuple_of(x, tuple);
      for (std::size_t a = 0; a < tuple.size(); ++a) {
        if (a) out << ',';
        out << tuple[a];
      }
      out << ',' << hist.weight(x) << '\n';
    }
    return;
  }
  write_header(out, u.schema(), false);
  const auto n = static_cast<std::uint64_t>(std::llround(hist.mass()));
  std::span<const double> w = hist.weights();
  std::vector<std::uint32_t> tuple(u.attribute_count());
  for (std::uint64_t r = 0; r < n; ++r) {
    double pick = hist.mass() * rng.next_double();
    std::uint64_t x = 0;
    for (; x + 1 < w.size(); ++x) {
      pick -= w[x];
      if (pick <= 0.0) break;
    }
    u.tuple_of(x, tuple);
    for (std::size_t a = 0; a < tuple.size(); ++a) {
      if (a) out << ',';
      out << tuple[a];
    }
    out << '\n';
  }
}

void export_synthetic(const FactoredDistribution& dist, const std::string& path,
                      ExportFormat format, RngStream& rng) {
  if (format == ExportFormat::weighted) {
    export_synthetic(export_histogram(dist), path, format, rng);
    return;
  }
  std::ofstream out = open_out(path);
  const Universe& u = *dist.universe();
  write_header(out, u.schema(), false);
  const auto n = static_cast<std::uint64_t>(std::llround(dist.mass()));
  std::vector<std::uint32_t> tuple(u.attribute_count(), 0);
  for (std::uint64_t r = 0; r < n; ++r) {
    // Product distribution: draw each part independently.
    for (const auto& [root, part] : dist.parts()) {
      double pick = rng.next_double();
      std::uint64_t idx = 0;
      for (; idx + 1 < part.table.size(); ++idx) {
        pick -= part.table[idx];
        if (pick <= 0.0) break;
      }
      for (std::size_t i = 0; i < part.attributes.size(); ++i) {
        tuple[part.attributes[i]] =
            static_cast<std::uint32_t>((idx / part.strides[i]) % part.cardinalities[i]);
      }
    }
    for (std::size_t a = 0; a < tuple.size(); ++a) {
      if (a) out << ',';
      out << tuple[a];
    }
    out << '\n';
  }
}

Histogram read_weighted_csv(const std::string& path, const UniversePtr& universe) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open input file '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DomainError(path + ": missing header row");
  }
  const std::vector<std::string> header = split(line, ',');
  const std::size_t d = universe->attribute_count();
  if (header.size() != d + 1 || trim(header.back()) != "weight") {
    throw DomainError(path + ": expected attribute columns plus a trailing weight column");
  }
  Histogram hist(universe);
  std::vector<std::uint32_t> tuple(d);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != d + 1) {
      throw DomainError(path + ": row " + std::to_string(line_no) + " has the wrong field count");
    }
    for (std::size_t a = 0; a < d; ++a) {
      tuple[a] = static_cast<std::uint32_t>(std::stoul(trim(fields[a])));
    }
    hist.mutable_weights()[universe->index_of(tuple)] += std::stod(trim(fields[d]));
  }
  hist.recompute_mass();
  return hist;
}

}  // namespace mwem

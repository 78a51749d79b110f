#include "mwem/workload_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mwem {

namespace {

using nlohmann::json;

std::size_t resolve_attribute(const json& key, const AttributeSchema& schema,
                              const std::string& origin) {
  if (key.is_number_unsigned() || key.is_number_integer()) {
    const auto idx = key.get<std::int64_t>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= schema.attribute_count()) {
      throw ConfigError(origin + ": attribute index " + std::to_string(idx) + " out of range");
    }
    return static_cast<std::size_t>(idx);
  }
  const std::string name = key.get<std::string>();
  if (const auto found = schema.find(name)) return *found;
  throw ConfigError(origin + ": unknown attribute '" + name + "'");
}

std::size_t resolve_attribute_name(const std::string& name, const AttributeSchema& schema,
                                   const std::string& origin) {
  if (const auto found = schema.find(name)) return *found;
  // Allow bare indices as object keys ("0": ...).
  try {
    const std::size_t idx = std::stoul(name);
    if (idx < schema.attribute_count()) return idx;
  } catch (const std::exception&) {
  }
  throw ConfigError(origin + ": unknown attribute '" + name + "'");
}

LinearQuery parse_query(const json& entry, const UniversePtr& universe,
                        const std::string& origin) {
  const AttributeSchema& schema = universe->schema();
  const std::string kind = entry.at("kind").get<std::string>();
  if (kind == "range") {
    std::vector<Interval> intervals(schema.attribute_count());
    for (std::size_t a = 0; a < intervals.size(); ++a) {
      intervals[a] = {0, schema.attribute(a).cardinality - 1};
    }
    if (entry.contains("intervals")) {
      for (const auto& [key, value] : entry.at("intervals").items()) {
        const std::size_t a = resolve_attribute_name(key, schema, origin);
        intervals[a] = {value.at(0).get<std::uint32_t>(), value.at(1).get<std::uint32_t>()};
      }
    }
    return LinearQuery::range(universe, std::move(intervals));
  }
  if (kind == "parity") {
    std::vector<std::size_t> attrs;
    for (const auto& key : entry.at("attributes")) {
      attrs.push_back(resolve_attribute(key, schema, origin));
    }
    return LinearQuery::parity(universe, std::move(attrs));
  }
  if (kind == "cell") {
    std::vector<std::pair<std::size_t, std::uint32_t>> assignment;
    if (entry.contains("assignment")) {
      for (const auto& [key, value] : entry.at("assignment").items()) {
        assignment.emplace_back(resolve_attribute_name(key, schema, origin),
                                value.get<std::uint32_t>());
      }
    }
    return LinearQuery::cell(universe, std::move(assignment));
  }
  if (kind == "custom") {
    return LinearQuery::custom(universe, entry.at("values").get<std::vector<double>>());
  }
  throw ConfigError(origin + ": unknown query kind '" + kind + "'");
}

json query_to_json(const LinearQuery& q) {
  const AttributeSchema& schema = q.universe()->schema();
  json entry;
  switch (q.kind()) {
    case LinearQuery::Kind::range: {
      entry["kind"] = "range";
      json intervals = json::object();
      for (std::size_t a : q.footprint()) {
        intervals[schema.attribute(a).name] = {q.intervals()[a].lo, q.intervals()[a].hi};
      }
      entry["intervals"] = std::move(intervals);
      break;
    }
    case LinearQuery::Kind::parity: {
      entry["kind"] = "parity";
      json attrs = json::array();
      for (std::size_t a : q.footprint()) attrs.push_back(schema.attribute(a).name);
      entry["attributes"] = std::move(attrs);
      break;
    }
    case LinearQuery::Kind::cell: {
      entry["kind"] = "cell";
      json assignment = json::object();
      for (const auto& [a, v] : q.assignment()) {
        assignment[schema.attribute(a).name] = v;
      }
      entry["assignment"] = std::move(assignment);
      break;
    }
    case LinearQuery::Kind::custom: {
      entry["kind"] = "custom";
      entry["values"] = std::vector<double>(q.table().begin(), q.table().end());
      break;
    }
  }
  return entry;
}

}  // namespace

Workload parse_workload(const std::string& json_text, const UniversePtr& universe,
                        const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": invalid workload JSON: " + e.what());
  }
  try {
    std::vector<LinearQuery> queries;
    for (const json& entry : doc.at("queries")) {
      queries.push_back(parse_query(entry, universe, origin));
    }
    return Workload(std::move(queries), doc.value("provenance", std::string("file:" + origin)));
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": malformed workload entry: " + e.what());
  }
}

Workload load_workload(const std::string& path, const UniversePtr& universe) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open workload file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_workload(buffer.str(), universe, path);
}

void save_workload(const Workload& workload, const std::string& path) {
  json doc;
  doc["provenance"] = workload.provenance();
  json queries = json::array();
  for (const LinearQuery& q : workload) queries.push_back(query_to_json(q));
  doc["queries"] = std::move(queries);
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot open output file '" + path + "'");
  }
  out << doc.dump(2) << '\n';
}

}  // namespace mwem

#pragma once

#include <string>

#include "mwem/query.hpp"

namespace mwem {

// Workload description files are JSON:
//   {
//     "provenance": "label",
//     "queries": [
//       {"kind": "range",  "intervals": {"age": [10, 20]}},
//       {"kind": "parity", "attributes": ["b0", "b3"]},
//       {"kind": "cell",   "assignment": {"color": 2}},
//       {"kind": "custom", "values": [0.5, -0.5, ...]}
//     ]
//   }
// Attributes may be named or given as indices; omitted range intervals cover
// the whole attribute.
Workload load_workload(const std::string& path, const UniversePtr& universe);
Workload parse_workload(const std::string& json_text, const UniversePtr& universe,
                        const std::string& origin);
void save_workload(const Workload& workload, const std::string& path);

}  // namespace mwem

#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "netflat/flat.hpp"
#include "netflat/graph.hpp"
#include "netflat/schedule.hpp"

namespace netflat {

using nlohmann::json;

json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);

// Graph description:
// {
//   "core": {"vertices": [["a", 1.0], ...], "edges": [["a", "b", 1.0], ...]},
//   "tails": [{"id": 0,
//              "attachments": [["a", 0, 1.0]],
//              "period": {"slots": 1, "mu_factor": [1.0],
//                         "intra": [[0, 1, 1.0]], "inter": [[0, 0, 1.0]]},
//              "r_schedule": {...}, "mu_schedule": {...},
//              "sup_certificate": 4.0}],
//   "root": "a" | [tail, depth, slot]
// }
json graph_to_json(const GraphModel& g);
std::shared_ptr<const GraphModel> graph_from_json(const json& j);

// Accepts a family shorthand ("k2", "path:N", "ray:unit", "ray:geometric:G",
// "spider:T", "lattice2d:N"), a path to a JSON file, or an inline JSON
// object / string starting with '{'.
std::shared_ptr<const GraphModel> load_graph(const json& source);

// Vertex reference: core label string or [tail, depth, slot].
VertexId vertex_from_json(const GraphModel& g, const json& j);
json vertex_to_json(const GraphModel& g, const VertexId& v);

// Flat function:
// {"dimension": d, "explicit": [[vertex, [values...]], ...],
//  "tails": [[tail, [values...]], ...]}
json flat_to_json(const FlatFunction& f);
FlatFunction flat_from_json(std::shared_ptr<const GraphModel> g, const json& j);

// Stable 64-bit FNV-1a hash of the canonical (sorted-key) dump.
std::string config_hash(const json& j);

json load_json_file(const std::string& path);

}  // namespace netflat

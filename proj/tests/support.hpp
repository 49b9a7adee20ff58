#pragma once

#include <memory>

#include "netflat/graph.hpp"
#include "netflat/properties.hpp"

namespace netflat::testing {

inline std::shared_ptr<const GraphModel> k2() { return make_family("k2"); }
inline std::shared_ptr<const GraphModel> path3() { return make_family("path:3"); }
inline std::shared_ptr<const GraphModel> unit_ray() { return make_family("ray:unit"); }
inline std::shared_ptr<const GraphModel> geometric_ray() {
    return make_family("ray:geometric:0.5");
}
inline std::shared_ptr<const GraphModel> spider(int t) {
    return make_family("spider:" + std::to_string(t));
}
inline std::shared_ptr<const GraphModel> fixture10() { return fixture_graph_10(); }

inline VertexId ray_depth(int d) { return VertexId::in_tail(0, d, 0); }

// K2 with a configurable edge weight.
inline std::shared_ptr<const GraphModel> k2_weighted(double R, double mu = 1.0) {
    CoreGraph core;
    core.labels = {"a", "b"};
    core.mu = {mu, mu};
    core.edges = {CoreEdge{0, 1, R}};
    return GraphModel::make(std::move(core), {}, VertexId::core(0));
}

}  // namespace netflat::testing

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netflat/schedule.hpp"

namespace netflat {

// Vertex of an infinite graph: either a core vertex (finite part) or a
// vertex inside one of the eventually-periodic tails, addressed by
// (tail id, depth, slot within the period graph).
//
// Field order gives the canonical vertex ordering: core vertices first by
// index, then tail vertices by (tail, depth, slot).
struct VertexId {
    int32_t kind = 0;   // 0 = core, 1 = tail
    int32_t tail = 0;   // tail id (kind 1)
    int32_t depth = 0;  // core index (kind 0) or tail depth (kind 1)
    int32_t slot = 0;

    static VertexId core(int index) { return VertexId{0, 0, index, 0}; }
    static VertexId in_tail(int tail, int depth, int slot = 0) {
        return VertexId{1, tail, depth, slot};
    }

    bool is_core() const noexcept { return kind == 0; }
    int core_index() const noexcept { return depth; }
    int tail_id() const noexcept { return tail; }

    friend auto operator<=>(const VertexId&, const VertexId&) = default;
};

struct VertexIdHash {
    size_t operator()(const VertexId& v) const noexcept {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t x) {
            h ^= x;
            h *= 1099511628211ull;
        };
        mix(static_cast<uint32_t>(v.kind));
        mix(static_cast<uint32_t>(v.tail));
        mix(static_cast<uint32_t>(v.depth));
        mix(static_cast<uint32_t>(v.slot));
        return static_cast<size_t>(h);
    }
};

// Structural identity of an edge independent of any weight assignment.
// Inter edges live between depth and depth + 1; attach edges join a core
// vertex to a slot at depth 0.
struct EdgeRef {
    enum class Kind : uint8_t { Core, Attach, Intra, Inter };
    Kind kind = Kind::Core;
    int32_t tail = 0;   // Attach/Intra/Inter
    int32_t index = 0;  // core edge index / attachment index / template index
    int32_t depth = 0;  // Intra: layer; Inter: shallower endpoint

    friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

struct IncidentEdge {
    VertexId other;
    EdgeRef edge;
    double R = 1.0;  // resistance (edge length) under the base weights
    double C = 1.0;  // conductance 1/R
};

struct CoreEdge {
    int u = 0;
    int v = 0;
    double R = 1.0;
};

// One depth layer of a tail: slots plus the edge templates repeated at every
// depth. Template weights are factor * schedule(depth); inter templates use
// the shallower endpoint's depth.
struct TailEdgeTemplate {
    int a = 0;  // slot (intra) or slot at depth k (inter)
    int b = 0;  // slot (intra) or slot at depth k + 1 (inter)
    double factor = 1.0;
};

struct PeriodGraph {
    int slots = 1;
    std::vector<double> mu_factor;           // per slot, default 1
    std::vector<TailEdgeTemplate> intra;     // within one depth layer
    std::vector<TailEdgeTemplate> inter;     // between consecutive layers
};

struct Attachment {
    int core_vertex = 0;
    int slot = 0;
    double R = 1.0;
};

struct TailSpec {
    PeriodGraph period;
    Schedule r_schedule = Schedule::constant(1.0);
    Schedule mu_schedule = Schedule::constant(1.0);
    std::vector<Attachment> attachments;  // empty only for a coreless single-tail graph
    // Optional user-declared supremum of (2/mu) sum_C over the tail,
    // spot-checked against the computed values at construction.
    std::optional<double> sup_certificate;
};

struct CoreGraph {
    std::vector<std::string> labels;  // unique vertex labels
    std::vector<double> mu;           // vertex weights
    std::vector<CoreEdge> edges;
};

class FiniteSubgraph;

// Locally finite weighted graph given as a finite core plus finitely many
// eventually-periodic infinite tails. Immutable after construction; all
// generation is pure and recomputed on demand, so instances are safe to
// share across threads. Construct through make() — ball() hands out
// subgraphs that share ownership of their parent.
class GraphModel : public std::enable_shared_from_this<GraphModel> {
public:
    static std::shared_ptr<const GraphModel> make(CoreGraph core,
                                                  std::vector<TailSpec> tails,
                                                  VertexId root);

    const CoreGraph& core() const noexcept { return core_; }
    const std::vector<TailSpec>& tails() const noexcept { return tails_; }
    int core_size() const noexcept { return static_cast<int>(core_.labels.size()); }
    int tail_count() const noexcept { return static_cast<int>(tails_.size()); }
    VertexId root() const noexcept { return root_; }

    bool resolves(const VertexId& v) const noexcept;
    void require_vertex(const VertexId& v) const;

    std::string label(const VertexId& v) const;
    std::optional<VertexId> find_label(const std::string& label) const;

    double base_mu(const VertexId& v) const;
    double base_edge_R(const EdgeRef& e) const;
    std::pair<VertexId, VertexId> edge_endpoints(const EdgeRef& e) const;

    // All incident edges with base weights, sorted by neighbor vertex id.
    std::vector<IncidentEdge> incident_edges(const VertexId& v) const;

    std::optional<int> tail_of(const VertexId& v) const;

    int combinatorial_distance(const VertexId& u, const VertexId& v,
                               int radius_cap = kDefaultRadiusCap) const;

    FiniteSubgraph ball(const VertexId& center, int radius) const;

    static constexpr int kDefaultRadiusCap = 1000;

private:
    GraphModel(CoreGraph core, std::vector<TailSpec> tails, VertexId root);
    void validate() const;

    CoreGraph core_;
    std::vector<TailSpec> tails_;
    VertexId root_;
    std::vector<std::vector<int>> core_adjacency_;  // core edge indices per vertex
    std::vector<std::vector<std::pair<int, int>>> attach_by_core_;  // (tail, attachment idx)
};

// Induced subgraph snapshot with base weights copied bit-exactly.
// Cut vertices have at least one neighbor outside the subgraph.
class FiniteSubgraph {
public:
    struct Edge {
        int u = 0;  // indices into vertices()
        int v = 0;
        double R = 1.0;
        EdgeRef ref;
    };

    FiniteSubgraph(std::shared_ptr<const GraphModel> graph,
                   std::vector<VertexId> vertices,
                   std::vector<Edge> edges,
                   std::vector<bool> cut);

    const std::vector<VertexId>& vertices() const noexcept { return vertices_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    bool is_cut(int index) const { return cut_[static_cast<size_t>(index)]; }
    int index_of(const VertexId& v) const;  // -1 if absent
    bool contains(const VertexId& v) const { return index_of(v) >= 0; }
    const GraphModel& graph() const noexcept { return *graph_; }
    std::shared_ptr<const GraphModel> graph_ptr() const noexcept { return graph_; }

private:
    std::shared_ptr<const GraphModel> graph_;
    std::vector<VertexId> vertices_;  // sorted
    std::vector<Edge> edges_;
    std::vector<bool> cut_;
};

// Weighted shortest-path distance over a lazily expanded region. The search
// never generates vertices beyond radius_cap combinatorial steps from u;
// exhausting the cap raises InconclusiveDistance with the best lower bound.
class EdgeWeights;  // defined in weights.hpp
double geodesic_distance(const GraphModel& g, const VertexId& u, const VertexId& v,
                         const EdgeWeights& weights,
                         int radius_cap = GraphModel::kDefaultRadiusCap);

// Built-in families: "k2", "path:N", "ray:unit", "ray:geometric:G",
// "spider:T", "lattice2d:N".
std::shared_ptr<const GraphModel> make_family(const std::string& name);

}  // namespace netflat

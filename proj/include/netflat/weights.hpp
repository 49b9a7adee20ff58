#pragma once

#include <memory>
#include <optional>
#include <unordered_set>
#include <vector>

#include "netflat/graph.hpp"
#include "netflat/schedule.hpp"

namespace netflat {

// A complete edge weight assignment: per-core-edge values, per-attachment
// values, and one schedule per tail (edge weight = template factor *
// schedule(depth)).
class EdgeWeights {
public:
    static EdgeWeights base(const GraphModel& g);

    double edge_R(const GraphModel& g, const EdgeRef& e) const;

    // Sum of all edge weights; nullopt when a tail series diverges.
    std::optional<double> total(const GraphModel& g) const;

    std::vector<double> core;                 // per core edge index
    std::vector<std::vector<double>> attach;  // [tail][attachment index]
    std::vector<Schedule> tail;               // per tail
};

// A complete vertex weight assignment with per-slot depth rules on tails.
class VertexWeights {
public:
    static VertexWeights base(const GraphModel& g);

    double mu(const GraphModel& g, const VertexId& v) const;
    std::optional<double> total(const GraphModel& g) const;

    std::vector<double> core;                     // per core vertex
    std::vector<std::vector<DepthRule>> tail;     // [tail][slot]
};

// mu0(v) = half the sum of incident edge lengths; total measure equals the
// edge-weight volume whenever that is finite.
VertexWeights derive_mu0(const GraphModel& g, const EdgeWeights& edges);

// Finite-volume reweighting: rho = core_scale * R on core and attachment
// edges, and a geometric schedule (core_scale, gamma) on every tail.
// Companion vertex weights are mu0 derived from rho, or the base mu when
// derive_companion_mu0 is false (base mu must then have finite total).
struct WeightPlan {
    double gamma = 0.5;
    double core_scale = 1.0;
    bool mu_is_derived = true;
    EdgeWeights rho;
    VertexWeights mu;
    double volume = 0.0;  // vol_rho, finite by construction
};

WeightPlan finite_volume_weights(const GraphModel& g, double gamma, double core_scale,
                                 bool derive_companion_mu0 = true);

// Effective weights used by an operator: the base pair, a plan's pair, or
// the hybrid assignment that keeps base weights inside the combinatorial
// radius-n ball around a root and plan weights beyond it.
class Weighting {
public:
    enum class Mode { Base, Plan, Hybrid };

    static Weighting base(std::shared_ptr<const GraphModel> g);
    static Weighting plan(std::shared_ptr<const GraphModel> g, WeightPlan plan);
    static Weighting hybrid(std::shared_ptr<const GraphModel> g, WeightPlan plan,
                            VertexId root, int n);
    // Arbitrary assignment; shape-checked against the graph, values taken
    // as given.
    static Weighting custom(std::shared_ptr<const GraphModel> g, EdgeWeights edges,
                            VertexWeights vertices);

    Mode mode() const noexcept { return mode_; }
    const GraphModel& graph() const noexcept { return *graph_; }
    std::shared_ptr<const GraphModel> graph_ptr() const noexcept { return graph_; }
    const WeightPlan* plan_data() const noexcept { return plan_ ? &*plan_ : nullptr; }
    int hybrid_radius() const noexcept { return hybrid_n_; }

    double edge_R(const EdgeRef& e) const;
    double conductance(const EdgeRef& e) const { return 1.0 / edge_R(e); }
    double mu(const VertexId& v) const;

    std::optional<double> mu_total() const;
    std::optional<double> edge_total() const;

    // Tail weight structure for series computations (norms, sums).
    const EdgeWeights& edges() const noexcept { return effective_edges_; }
    const VertexWeights& vertices() const noexcept { return effective_vertices_; }
    bool is_hybrid() const noexcept { return mode_ == Mode::Hybrid; }
    bool within_base_region(const VertexId& v) const;

private:
    Weighting() = default;

    Mode mode_ = Mode::Base;
    std::shared_ptr<const GraphModel> graph_;
    std::optional<WeightPlan> plan_;
    EdgeWeights effective_edges_;      // base or plan weights (hybrid: plan side)
    VertexWeights effective_vertices_;
    EdgeWeights base_edges_;           // hybrid only
    VertexWeights base_vertices_;      // hybrid only
    VertexId hybrid_root_{};
    int hybrid_n_ = -1;
    std::unordered_set<VertexId, VertexIdHash> near_root_;  // d_c(root, v) <= n
};

}  // namespace netflat

#pragma once

#include <memory>
#include <set>
#include <vector>

#include "netflat/graph.hpp"
#include "netflat/weights.hpp"

namespace netflat {

// Norm-style results that may be infinite (a nonzero tail constant against a
// divergent vertex-weight series).
struct NormValue {
    double value = 0.0;
    bool finite = true;

    static NormValue infinite() { return NormValue{0.0, false}; }
};

// Clopen boundary set at tail granularity: each tail stands for one end of
// the graph.
class BoundarySet {
public:
    BoundarySet() = default;
    BoundarySet(std::initializer_list<int> tails) : tails_(tails) {}
    explicit BoundarySet(std::set<int> tails) : tails_(std::move(tails)) {}

    static BoundarySet all_tails(const GraphModel& g);

    bool contains(int tail) const { return tails_.count(tail) > 0; }
    bool empty() const { return tails_.empty(); }
    const std::set<int>& tails() const { return tails_; }
    bool disjoint_from(const BoundarySet& other) const;
    void require_valid(const GraphModel& g) const;

private:
    std::set<int> tails_;
};

// A function on the vertex set that changes value across only finitely many
// edges: explicit values on the core and on the first few layers of each
// tail, one constant vector per tail beyond its horizon. The representation
// is exact; no thresholding ever shrinks it.
//
// Values are immutable through the public algebra; the *_in_place helpers
// exist for local accumulation on owned copies and must not be applied to
// shared instances.
class FlatFunction {
public:
    FlatFunction(std::shared_ptr<const GraphModel> graph, int dimension);

    static FlatFunction constant(std::shared_ptr<const GraphModel> graph,
                                 std::vector<double> value);
    static FlatFunction constant(std::shared_ptr<const GraphModel> graph, double value);
    // Normalized point mass: 1/mu(v) at v, zero elsewhere.
    static FlatFunction delta(std::shared_ptr<const GraphModel> graph, const VertexId& v,
                              double mu_at_v);
    // 1 on the given tail up to cutoff_depth inclusive (plus the whole core
    // and the other tails' shallow part if include_core), 0 beyond.
    static FlatFunction step(std::shared_ptr<const GraphModel> graph, int tail,
                             int cutoff_depth, double inside = 1.0, double outside = 0.0);

    const GraphModel& graph() const noexcept { return *graph_; }
    std::shared_ptr<const GraphModel> graph_ptr() const noexcept { return graph_; }
    int dimension() const noexcept { return dim_; }

    int horizon(int tail) const;
    const std::vector<double>& tail_constant(int tail) const;

    double value(const VertexId& v, int component = 0) const;
    std::vector<double> evaluate(const VertexId& v) const;

    void set_value(const VertexId& v, int component, double x);  // grows horizons as needed
    void set_tail_constant(int tail, std::vector<double> value);
    void ensure_horizon(int tail, int horizon);

    // Edges across which the function changes value. Exact comparison.
    std::vector<EdgeRef> jump_edges() const;

    // Distinct values over the explicit region and tail constants
    // (single component). Finite by construction.
    std::vector<double> range_values(int component = 0) const;

    double sup_norm() const;
    NormValue lp_norm(double p, const VertexWeights& weights) const;
    // Componentwise sum of f * mu; Inconclusive error when a nonzero tail
    // constant meets a divergent weight series.
    std::vector<double> weighted_sum(const VertexWeights& weights) const;

    FlatFunction add(const FlatFunction& other) const;
    FlatFunction sub(const FlatFunction& other) const;
    FlatFunction mul(const FlatFunction& other) const;  // componentwise
    FlatFunction scale(double c) const;

    FlatFunction& add_scaled_in_place(const FlatFunction& other, double c);
    FlatFunction& scale_in_place(double c);

    // Largest absolute difference over explicit regions and tail constants.
    double sup_diff(const FlatFunction& other) const;

    // Fold explicit layers beyond max_depth into the tail constant,
    // discarding their values. Solver-internal locality cap.
    void clamp_horizon(int tail, int max_depth);
    // Drop deepest explicit layers equal (bitwise) to the tail constant.
    void compact();

    bool vanishes_on(const BoundarySet& omega) const;
    // Representation consistency; throws on violation.
    void check_invariants() const;

    bool same_graph(const FlatFunction& other) const { return graph_ == other.graph_; }

private:
    struct TailData {
        std::vector<double> values;    // depth-major: [depth][slot][component]
        std::vector<double> constant;  // one vector per tail
    };

    double* tail_entry(int tail, int depth, int slot);
    const double* tail_entry(int tail, int depth, int slot) const;
    void align_with(const FlatFunction& other, FlatFunction& out) const;

    std::shared_ptr<const GraphModel> graph_;
    int dim_ = 1;
    std::vector<double> core_;     // [core index][component]
    std::vector<TailData> tails_;
};

// f in the flat algebra with range {0,1}: asymptotically 1 on omega1 tails,
// 0 on omega2 tails, constant on every other tail. Core vertices take the
// value of the nearest omega1 attachment (ties and neutral cases go to 0).
FlatFunction separation_function(std::shared_ptr<const GraphModel> graph,
                                 const BoundarySet& omega1, const BoundarySet& omega2,
                                 int guard_depth);

}  // namespace netflat

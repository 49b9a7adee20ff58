#pragma once

#include <memory>

#include <Eigen/Dense>

#include "netflat/flat.hpp"
#include "netflat/weights.hpp"

namespace netflat {

// Graph Laplacian  L f(v) = (1/mu(v)) sum_{u~v} C(u,v) (f(v) - f(u))
// under a weight assignment. Construction certifies boundedness by computing
// sup_v (2/mu(v)) sum_C exactly over the core and tail schedules; plans with
// growing conductances come out unbounded and then only feed finite sections.
class Laplacian {
public:
    explicit Laplacian(Weighting weighting);

    static Laplacian base(std::shared_ptr<const GraphModel> g) {
        return Laplacian(Weighting::base(std::move(g)));
    }

    const Weighting& weighting() const noexcept { return weighting_; }
    const GraphModel& graph() const noexcept { return weighting_.graph(); }
    std::shared_ptr<const GraphModel> graph_ptr() const noexcept {
        return weighting_.graph_ptr();
    }

    bool bounded() const noexcept { return bounded_; }
    // sup_v (2/mu(v)) sum_C; exact. Unavailable for unbounded operators.
    double op_norm_inf() const;
    double mu(const VertexId& v) const { return weighting_.mu(v); }

    // Exact application; zero away from the jump set of f, explicit region
    // grows by one combinatorial step, output tail constants are all zero.
    FlatFunction apply(const FlatFunction& f) const;

    // B(f,g) = sum over edges C * df * dg (componentwise, summed).
    double bilinear_form(const FlatFunction& f, const FlatFunction& g) const;

    // mu-weighted inner product; requires a summable product (one factor
    // with zero tail constants, or summable weights).
    double inner(const FlatFunction& f, const FlatFunction& g) const;

    // <f,f>_1 = sum f^2 mu + B(f,f); infinite flag from the l2 part.
    NormValue sobolev_norm(const FlatFunction& f) const;

    // Matrix of the operator restricted to a finite region. Rows of interior
    // vertices sum to zero exactly; cut-vertex rows keep the full diagonal.
    Eigen::MatrixXd q_matrix(const FiniteSubgraph& region) const;

private:
    void compute_bound();

    Weighting weighting_;
    bool bounded_ = false;
    double sup_row_sum_ = 0.0;  // sup (1/mu) sum_C
};

}  // namespace netflat

#include "netflat/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "netflat/errors.hpp"

namespace netflat {

namespace {

// Conductance coefficients of one slot: level edges live at the slot's own
// depth, carry edges come down from depth - 1.
struct SlotCoefficients {
    double level = 0.0;  // sum of 1/factor over intra and outgoing inter edges
    double carry = 0.0;  // sum of 1/factor over incoming inter edges
    double attach_c = 0.0;  // sum of conductances of attachment edges (depth 0)
};

SlotCoefficients slot_coefficients(const GraphModel& g, const EdgeWeights& edges, int tail,
                                   int slot) {
    const TailSpec& t = g.tails()[static_cast<size_t>(tail)];
    SlotCoefficients c;
    for (const TailEdgeTemplate& e : t.period.intra)
        if (e.a == slot || e.b == slot) c.level += 1.0 / e.factor;
    for (const TailEdgeTemplate& e : t.period.inter) {
        if (e.a == slot) c.level += 1.0 / e.factor;
        if (e.b == slot) c.carry += 1.0 / e.factor;
    }
    for (size_t a = 0; a < t.attachments.size(); ++a)
        if (t.attachments[a].slot == slot)
            c.attach_c += 1.0 / edges.attach[static_cast<size_t>(tail)][a];
    return c;
}

double row_sum_at(const GraphModel& g, const EdgeWeights& edges, const VertexWeights& mu,
                  int tail, int slot, int depth) {
    SlotCoefficients c = slot_coefficients(g, edges, tail, slot);
    const Schedule& rs = edges.tail[static_cast<size_t>(tail)];
    double sum_c = c.level / rs.at(depth);
    sum_c += depth == 0 ? c.attach_c : c.carry / rs.at(depth - 1);
    return sum_c / mu.tail[static_cast<size_t>(tail)][static_cast<size_t>(slot)].at(depth);
}

// Supremum of (1/mu) sum_C over one tail; +inf when the per-period ratio
// exceeds one. Values are eventually periodic-geometric, so a bounded tail
// attains its supremum within the sampled window.
double tail_row_sup(const GraphModel& g, const EdgeWeights& edges, const VertexWeights& mu,
                    int tail, int sample_from = 0) {
    const Schedule& rs = edges.tail[static_cast<size_t>(tail)];
    const TailSpec& spec = g.tails()[static_cast<size_t>(tail)];
    double sup = 0.0;
    for (int s = 0; s < spec.period.slots; ++s) {
        const DepthRule& rule = mu.tail[static_cast<size_t>(tail)][static_cast<size_t>(s)];
        int period = std::lcm(rs.period(), rule.rest().period());
        double ratio_r = std::pow(rs.period_factor(), period / rs.period());
        double ratio_mu =
            std::pow(rule.rest().period_factor(), period / rule.rest().period());
        double beta = 1.0 / (ratio_r * ratio_mu);
        int k_min = std::max({1, static_cast<int>(rule.head().size()), sample_from});
        if (beta > 1.0 + 1e-12) return std::numeric_limits<double>::infinity();
        for (int k = sample_from; k <= k_min + 2 * period; ++k)
            sup = std::max(sup, row_sum_at(g, edges, mu, tail, s, k));
    }
    return sup;
}

}  // namespace

Laplacian::Laplacian(Weighting weighting) : weighting_(std::move(weighting)) {
    compute_bound();
}

void Laplacian::compute_bound() {
    const GraphModel& g = weighting_.graph();
    double sup = 0.0;
    auto explicit_row = [&](const VertexId& v) {
        double sum_c = 0.0;
        for (const IncidentEdge& ie : g.incident_edges(v))
            sum_c += weighting_.conductance(ie.edge);
        return sum_c / weighting_.mu(v);
    };
    for (int i = 0; i < g.core_size(); ++i)
        sup = std::max(sup, explicit_row(VertexId::core(i)));

    if (!weighting_.is_hybrid()) {
        for (int t = 0; t < g.tail_count(); ++t)
            sup = std::max(sup, tail_row_sup(g, weighting_.edges(), weighting_.vertices(), t));
    } else {
        // Mixed region: enumerate rows out to two steps beyond the base
        // radius, then analyze the pure plan side of each tail.
        int n = weighting_.hybrid_radius();
        FiniteSubgraph near = g.ball(g.root(), n + 2);
        int max_depth = 0;
        for (const VertexId& v : near.vertices()) {
            sup = std::max(sup, explicit_row(v));
            if (!v.is_core()) max_depth = std::max(max_depth, v.depth);
        }
        for (int t = 0; t < g.tail_count(); ++t)
            sup = std::max(sup, tail_row_sup(g, weighting_.edges(), weighting_.vertices(), t,
                                             max_depth + 1));
    }
    sup_row_sum_ = sup;
    bounded_ = std::isfinite(sup);
}

double Laplacian::op_norm_inf() const {
    if (!bounded_)
        fail(ErrorKind::Unbounded, "operator norm unavailable: row sums are unbounded");
    return 2.0 * sup_row_sum_;
}

FlatFunction Laplacian::apply(const FlatFunction& f) const {
    if (!bounded_)
        fail(ErrorKind::Unbounded,
             "apply is restricted to bounded operators; use a finite section");
    if (f.graph_ptr().get() != &weighting_.graph())
        fail(ErrorKind::Validation, "function lives on a different graph");
    const GraphModel& g = weighting_.graph();
    int dim = f.dimension();
    FlatFunction out(f.graph_ptr(), dim);

    auto emit = [&](const VertexId& v) {
        double inv_mu = 1.0 / weighting_.mu(v);
        for (const IncidentEdge& ie : g.incident_edges(v)) {
            double c = weighting_.conductance(ie.edge);
            for (int k = 0; k < dim; ++k) {
                double diff = f.value(v, k) - f.value(ie.other, k);
                if (diff != 0.0)
                    out.set_value(v, k, out.value(v, k) + inv_mu * c * diff);
            }
        }
    };
    for (int i = 0; i < g.core_size(); ++i) emit(VertexId::core(i));
    for (int t = 0; t < g.tail_count(); ++t) {
        out.ensure_horizon(t, f.horizon(t) + 1);
        int slots = g.tails()[static_cast<size_t>(t)].period.slots;
        for (int d = 0; d <= f.horizon(t); ++d)
            for (int s = 0; s < slots; ++s) emit(VertexId::in_tail(t, d, s));
    }
    return out;
}

double Laplacian::bilinear_form(const FlatFunction& f, const FlatFunction& g) const {
    if (!f.same_graph(g)) fail(ErrorKind::Validation, "functions live on different graphs");
    if (f.dimension() != g.dimension())
        fail(ErrorKind::Validation, "function dimension mismatch");
    const GraphModel& gm = weighting_.graph();
    double sum = 0.0;
    for (const EdgeRef& e : f.jump_edges()) {
        auto [u, v] = gm.edge_endpoints(e);
        double c = weighting_.conductance(e);
        for (int k = 0; k < f.dimension(); ++k)
            sum += c * (f.value(v, k) - f.value(u, k)) * (g.value(v, k) - g.value(u, k));
    }
    return sum;
}

double Laplacian::inner(const FlatFunction& f, const FlatFunction& g) const {
    std::vector<double> sums = f.mul(g).weighted_sum(weighting_.vertices());
    double total = 0.0;
    for (double s : sums) total += s;
    return total;
}

NormValue Laplacian::sobolev_norm(const FlatFunction& f) const {
    NormValue l2 = f.lp_norm(2.0, weighting_.vertices());
    if (!l2.finite) return NormValue::infinite();
    return NormValue{l2.value * l2.value + bilinear_form(f, f), true};
}

Eigen::MatrixXd Laplacian::q_matrix(const FiniteSubgraph& region) const {
    int n = static_cast<int>(region.vertices().size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const VertexId& v = region.vertices()[static_cast<size_t>(i)];
        double inv_mu = 1.0 / weighting_.mu(v);
        double diag = 0.0;
        for (const IncidentEdge& ie : weighting_.graph().incident_edges(v)) {
            double c = weighting_.conductance(ie.edge);
            diag += c;
            int j = region.index_of(ie.other);
            if (j >= 0) m(i, j) = -inv_mu * c;
        }
        m(i, i) = inv_mu * diag;
    }
    return m;
}

}  // namespace netflat

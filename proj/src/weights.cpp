#include "netflat/weights.hpp"

#include <cmath>
#include <set>

#include "netflat/errors.hpp"

namespace netflat {

EdgeWeights EdgeWeights::base(const GraphModel& g) {
    EdgeWeights w;
    w.core.reserve(g.core().edges.size());
    for (const CoreEdge& e : g.core().edges) w.core.push_back(e.R);
    for (const TailSpec& t : g.tails()) {
        std::vector<double> att;
        for (const Attachment& a : t.attachments) att.push_back(a.R);
        w.attach.push_back(std::move(att));
        w.tail.push_back(t.r_schedule);
    }
    return w;
}

double EdgeWeights::edge_R(const GraphModel& g, const EdgeRef& e) const {
    switch (e.kind) {
        case EdgeRef::Kind::Core:
            return core[static_cast<size_t>(e.index)];
        case EdgeRef::Kind::Attach:
            return attach[static_cast<size_t>(e.tail)][static_cast<size_t>(e.index)];
        case EdgeRef::Kind::Intra:
            return g.tails()[static_cast<size_t>(e.tail)]
                       .period.intra[static_cast<size_t>(e.index)].factor *
                   tail[static_cast<size_t>(e.tail)].at(e.depth);
        case EdgeRef::Kind::Inter:
            return g.tails()[static_cast<size_t>(e.tail)]
                       .period.inter[static_cast<size_t>(e.index)].factor *
                   tail[static_cast<size_t>(e.tail)].at(e.depth);
    }
    fail(ErrorKind::Validation, "bad edge ref");
}

std::optional<double> EdgeWeights::total(const GraphModel& g) const {
    double sum = 0.0;
    for (double r : core) sum += r;
    for (const auto& att : attach)
        for (double r : att) sum += r;
    for (int t = 0; t < g.tail_count(); ++t) {
        const PeriodGraph& p = g.tails()[static_cast<size_t>(t)].period;
        double factor_sum = 0.0;
        for (const TailEdgeTemplate& e : p.intra) factor_sum += e.factor;
        for (const TailEdgeTemplate& e : p.inter) factor_sum += e.factor;
        auto series = tail[static_cast<size_t>(t)].sum_from(0);
        if (!series) return std::nullopt;
        sum += factor_sum * *series;
    }
    return sum;
}

VertexWeights VertexWeights::base(const GraphModel& g) {
    VertexWeights w;
    w.core = g.core().mu;
    for (const TailSpec& t : g.tails()) {
        std::vector<DepthRule> rules;
        for (int s = 0; s < t.period.slots; ++s) {
            double factor = t.period.mu_factor.empty()
                                ? 1.0
                                : t.period.mu_factor[static_cast<size_t>(s)];
            rules.push_back(DepthRule::pure(t.mu_schedule.scaled(factor)));
        }
        w.tail.push_back(std::move(rules));
    }
    return w;
}

double VertexWeights::mu(const GraphModel& g, const VertexId& v) const {
    g.require_vertex(v);
    if (v.is_core()) return core[static_cast<size_t>(v.core_index())];
    return tail[static_cast<size_t>(v.tail)][static_cast<size_t>(v.slot)].at(v.depth);
}

std::optional<double> VertexWeights::total(const GraphModel& g) const {
    double sum = 0.0;
    for (double m : core) sum += m;
    (void)g;
    for (const auto& rules : tail)
        for (const DepthRule& r : rules) {
            auto s = r.sum_from(0);
            if (!s) return std::nullopt;
            sum += *s;
        }
    return sum;
}

VertexWeights derive_mu0(const GraphModel& g, const EdgeWeights& edges) {
    VertexWeights w;
    w.core.assign(g.core().labels.size(), 0.0);
    for (int i = 0; i < g.core_size(); ++i) {
        double sum = 0.0;
        for (const IncidentEdge& ie : g.incident_edges(VertexId::core(i)))
            sum += edges.edge_R(g, ie.edge);
        w.core[static_cast<size_t>(i)] = 0.5 * sum;
    }
    for (int t = 0; t < g.tail_count(); ++t) {
        const TailSpec& tail = g.tails()[static_cast<size_t>(t)];
        const PeriodGraph& p = tail.period;
        const Schedule& rs = edges.tail[static_cast<size_t>(t)];
        std::vector<DepthRule> rules;
        for (int s = 0; s < p.slots; ++s) {
            // Per-depth incident length at depth k >= 1:
            //   level_factor * rs(k) + carry_factor * rs(k-1)
            // where level edges live at this depth and carry edges come down
            // from depth k-1.
            double level_factor = 0.0;
            double carry_factor = 0.0;
            for (const TailEdgeTemplate& e : p.intra)
                if (e.a == s || e.b == s) level_factor += e.factor;
            for (const TailEdgeTemplate& e : p.inter) {
                if (e.a == s) level_factor += e.factor;
                if (e.b == s) carry_factor += e.factor;
            }
            double depth0 = level_factor * rs.at(0);
            for (size_t a = 0; a < tail.attachments.size(); ++a)
                if (tail.attachments[a].slot == s)
                    depth0 += edges.attach[static_cast<size_t>(t)][a];

            Schedule rest = Schedule::constant(1.0);
            switch (rs.kind()) {
                case Schedule::Kind::Constant:
                    rest = Schedule::constant(0.5 * (level_factor + carry_factor) * rs.value());
                    break;
                case Schedule::Kind::Geometric:
                    rest = Schedule::geometric(
                        0.5 * rs.scale() * (level_factor + carry_factor / rs.ratio()),
                        rs.ratio());
                    break;
                case Schedule::Kind::Table: {
                    const std::vector<double>& tab = rs.table_values();
                    int n = static_cast<int>(tab.size());
                    std::vector<double> out(static_cast<size_t>(n));
                    for (int j = 0; j < n; ++j)
                        out[static_cast<size_t>(j)] =
                            0.5 * (level_factor * tab[static_cast<size_t>(j)] +
                                   carry_factor * tab[static_cast<size_t>((j - 1 + n) % n)]);
                    rest = Schedule::table(std::move(out));
                    break;
                }
            }
            rules.push_back(DepthRule({0.5 * depth0}, rest));
        }
        w.tail.push_back(std::move(rules));
    }
    return w;
}

WeightPlan finite_volume_weights(const GraphModel& g, double gamma, double core_scale,
                                 bool derive_companion_mu0) {
    if (!(gamma > 0.0 && gamma < 1.0))
        fail(ErrorKind::Validation, "finite-volume plan needs 0 < gamma < 1");
    if (!(core_scale > 0.0))
        fail(ErrorKind::Validation, "finite-volume plan needs core_scale > 0");
    WeightPlan plan;
    plan.gamma = gamma;
    plan.core_scale = core_scale;
    plan.rho = EdgeWeights::base(g);
    for (double& r : plan.rho.core) r *= core_scale;
    for (auto& att : plan.rho.attach)
        for (double& r : att) r *= core_scale;
    for (Schedule& s : plan.rho.tail) s = Schedule::geometric(core_scale, gamma);
    auto vol = plan.rho.total(g);
    if (!vol) fail(ErrorKind::Validation, "finite-volume plan produced a divergent volume");
    plan.volume = *vol;
    plan.mu_is_derived = derive_companion_mu0;
    if (derive_companion_mu0) {
        plan.mu = derive_mu0(g, plan.rho);
    } else {
        plan.mu = VertexWeights::base(g);
        if (!plan.mu.total(g))
            fail(ErrorKind::Validation,
                 "base vertex weights have infinite total; use the derived companion");
    }
    return plan;
}

Weighting Weighting::base(std::shared_ptr<const GraphModel> g) {
    Weighting w;
    w.mode_ = Mode::Base;
    w.effective_edges_ = EdgeWeights::base(*g);
    w.effective_vertices_ = VertexWeights::base(*g);
    w.graph_ = std::move(g);
    return w;
}

Weighting Weighting::plan(std::shared_ptr<const GraphModel> g, WeightPlan plan) {
    Weighting w;
    w.mode_ = Mode::Plan;
    w.effective_edges_ = plan.rho;
    w.effective_vertices_ = plan.mu;
    w.plan_ = std::move(plan);
    w.graph_ = std::move(g);
    return w;
}

Weighting Weighting::custom(std::shared_ptr<const GraphModel> g, EdgeWeights edges,
                            VertexWeights vertices) {
    if (edges.core.size() != g->core().edges.size() ||
        edges.tail.size() != static_cast<size_t>(g->tail_count()) ||
        vertices.core.size() != g->core().labels.size() ||
        vertices.tail.size() != static_cast<size_t>(g->tail_count()))
        fail(ErrorKind::Validation, "custom weighting shape does not match the graph");
    Weighting w;
    w.mode_ = Mode::Plan;
    w.effective_edges_ = std::move(edges);
    w.effective_vertices_ = std::move(vertices);
    w.graph_ = std::move(g);
    return w;
}

Weighting Weighting::hybrid(std::shared_ptr<const GraphModel> g, WeightPlan plan,
                            VertexId root, int n) {
    if (n < 0) fail(ErrorKind::Validation, "hybrid radius must be nonnegative");
    g->require_vertex(root);
    Weighting w;
    w.mode_ = Mode::Hybrid;
    w.effective_edges_ = plan.rho;
    w.effective_vertices_ = plan.mu;
    w.base_edges_ = EdgeWeights::base(*g);
    w.base_vertices_ = VertexWeights::base(*g);
    w.hybrid_root_ = root;
    w.hybrid_n_ = n;
    FiniteSubgraph ball = g->ball(root, n);
    for (const VertexId& v : ball.vertices()) w.near_root_.insert(v);
    w.plan_ = std::move(plan);
    w.graph_ = std::move(g);
    return w;
}

bool Weighting::within_base_region(const VertexId& v) const {
    return mode_ != Mode::Hybrid || near_root_.count(v) > 0;
}

double Weighting::edge_R(const EdgeRef& e) const {
    if (mode_ == Mode::Hybrid) {
        auto [u, v] = graph_->edge_endpoints(e);
        if (near_root_.count(u) && near_root_.count(v))
            return base_edges_.edge_R(*graph_, e);
    }
    return effective_edges_.edge_R(*graph_, e);
}

double Weighting::mu(const VertexId& v) const {
    if (mode_ == Mode::Hybrid && near_root_.count(v))
        return base_vertices_.mu(*graph_, v);
    return effective_vertices_.mu(*graph_, v);
}

std::optional<double> Weighting::mu_total() const {
    if (mode_ != Mode::Hybrid) return effective_vertices_.total(*graph_);
    // Finite correction of the plan total over the near-root region.
    auto t = effective_vertices_.total(*graph_);
    if (!t) return std::nullopt;
    double sum = *t;
    for (const VertexId& v : near_root_)
        sum += base_vertices_.mu(*graph_, v) - effective_vertices_.mu(*graph_, v);
    return sum;
}

std::optional<double> Weighting::edge_total() const {
    if (mode_ != Mode::Hybrid) return effective_edges_.total(*graph_);
    auto t = effective_edges_.total(*graph_);
    if (!t) return std::nullopt;
    double sum = *t;
    std::set<EdgeRef> seen;
    for (const VertexId& v : near_root_)
        for (const IncidentEdge& ie : graph_->incident_edges(v)) {
            if (!near_root_.count(ie.other)) continue;
            if (!seen.insert(ie.edge).second) continue;
            sum += base_edges_.edge_R(*graph_, ie.edge) -
                   effective_edges_.edge_R(*graph_, ie.edge);
        }
    return sum;
}

}  // namespace netflat

#include "netflat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_set>

#include "netflat/errors.hpp"

namespace netflat {

SpectralModel build_spectral_model(const Weighting& weighting, const BoundarySet& omega,
                                   int depth) {
    const GraphModel& g = weighting.graph();
    omega.require_valid(g);
    // Clamp the cut vertices that sit on omega tails; everything else keeps
    // a free truncation row.
    FiniteSubgraph sub = g.ball(g.root(), depth);
    std::unordered_set<VertexId, VertexIdHash> clamped;
    for (int i = 0; i < static_cast<int>(sub.vertices().size()); ++i) {
        const VertexId& v = sub.vertices()[static_cast<size_t>(i)];
        auto t = g.tail_of(v);
        if (sub.is_cut(i) && t && omega.contains(*t)) clamped.insert(v);
    }
    return build_spectral_model_masked(
        weighting,
        [clamped = std::move(clamped)](const VertexId& v) { return clamped.count(v) > 0; },
        depth);
}

SpectralModel build_spectral_model_masked(
    const Weighting& weighting, const std::function<bool(const VertexId&)>& dirichlet,
    int depth) {
    if (depth < 1) fail(ErrorKind::Validation, "section depth must be >= 1");
    const GraphModel& g = weighting.graph();
    FiniteSubgraph sub = g.ball(g.root(), depth);

    SpectralModel m;
    m.graph_ = weighting.graph_ptr();
    m.depth_ = depth;
    m.section_ = sub.vertices();
    int n = static_cast<int>(m.section_.size());
    m.dirichlet_.assign(static_cast<size_t>(n), false);
    m.kept_.assign(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i)
        if (dirichlet(m.section_[static_cast<size_t>(i)]))
            m.dirichlet_[static_cast<size_t>(i)] = true;
    for (int i = 0; i < n; ++i) {
        if (m.dirichlet_[static_cast<size_t>(i)]) continue;
        m.kept_[static_cast<size_t>(i)] = static_cast<int>(m.kept_vertices_.size());
        m.kept_vertices_.push_back(m.section_[static_cast<size_t>(i)]);
        m.mu_.push_back(weighting.mu(m.section_[static_cast<size_t>(i)]));
    }
    int kept = static_cast<int>(m.kept_vertices_.size());
    if (kept == 0) fail(ErrorKind::Validation, "section has no free vertices");

    // Conductance structure over the kept vertices. sink holds couplings
    // into clamped (dirichlet) vertices; edges leaving the section are
    // dropped (free truncation).
    std::vector<std::map<int, double>> coupling(static_cast<size_t>(kept));
    std::vector<double> sink(static_cast<size_t>(kept), 0.0);
    std::set<EdgeRef> seen;
    for (int i = 0; i < n; ++i) {
        int ki = m.kept_[static_cast<size_t>(i)];
        if (ki < 0) continue;
        for (const IncidentEdge& ie : g.incident_edges(m.section_[static_cast<size_t>(i)])) {
            auto it = std::lower_bound(m.section_.begin(), m.section_.end(), ie.other);
            if (it == m.section_.end() || *it != ie.other) continue;
            if (!seen.insert(ie.edge).second) continue;
            int j = static_cast<int>(it - m.section_.begin());
            int kj = m.kept_[static_cast<size_t>(j)];
            double c = weighting.conductance(ie.edge);
            if (kj >= 0) {
                coupling[static_cast<size_t>(ki)][kj] += c;
                coupling[static_cast<size_t>(kj)][ki] += c;
            } else {
                sink[static_cast<size_t>(ki)] += c;
            }
        }
    }

    // Star-mesh elimination of fast vertices (see the class note).
    m.kept_to_remaining_.assign(static_cast<size_t>(kept), 0);
    std::vector<bool> gone(static_cast<size_t>(kept), false);
    auto rate_of = [&](int k) {
        double total = sink[static_cast<size_t>(k)];
        for (const auto& [j, c] : coupling[static_cast<size_t>(k)]) total += c;
        return total / m.mu_[static_cast<size_t>(k)];
    };
    int alive = kept;
    while (alive > 1) {
        int worst = -1;
        double worst_rate = SpectralModel::kFastRateThreshold;
        for (int k = 0; k < kept; ++k)
            if (!gone[static_cast<size_t>(k)]) {
                double r = rate_of(k);
                if (r > worst_rate) {
                    worst_rate = r;
                    worst = k;
                }
            }
        if (worst < 0) break;
        auto neighbors = coupling[static_cast<size_t>(worst)];
        double total = sink[static_cast<size_t>(worst)];
        for (const auto& [j, c] : neighbors) total += c;
        SpectralModel::EliminationStep step;
        step.vertex = worst;
        for (const auto& [u, cu] : neighbors) {
            step.neighbor_weights.emplace_back(u, cu / total);
            coupling[static_cast<size_t>(u)].erase(worst);
            sink[static_cast<size_t>(u)] += cu * sink[static_cast<size_t>(worst)] / total;
            for (const auto& [v, cv] : neighbors) {
                if (v <= u) continue;
                double add = cu * cv / total;
                coupling[static_cast<size_t>(u)][v] += add;
                coupling[static_cast<size_t>(v)][u] += add;
            }
        }
        coupling[static_cast<size_t>(worst)].clear();
        sink[static_cast<size_t>(worst)] = 0.0;
        gone[static_cast<size_t>(worst)] = true;
        m.eliminated_.push_back(std::move(step));
        --alive;
    }
    for (int k = 0; k < kept; ++k) {
        if (gone[static_cast<size_t>(k)]) {
            m.kept_to_remaining_[static_cast<size_t>(k)] = -1;
        } else {
            m.kept_to_remaining_[static_cast<size_t>(k)] =
                static_cast<int>(m.remaining_.size());
            m.remaining_.push_back(k);
        }
    }

    int nrem = static_cast<int>(m.remaining_.size());
    m.sqrt_mu_.resize(nrem);
    for (int r = 0; r < nrem; ++r)
        m.sqrt_mu_(r) = std::sqrt(m.mu_[static_cast<size_t>(m.remaining_[static_cast<size_t>(r)])]);

    // A(i,j) = -C_ij / sqrt(mu_i mu_j); the diagonal carries the full row
    // conductance including the clamped couplings.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nrem, nrem);
    for (int r = 0; r < nrem; ++r) {
        int k = m.remaining_[static_cast<size_t>(r)];
        double total = sink[static_cast<size_t>(k)];
        for (const auto& [j, c] : coupling[static_cast<size_t>(k)]) {
            total += c;
            int rj = m.kept_to_remaining_[static_cast<size_t>(j)];
            double off = -c / (m.sqrt_mu_(r) *
                               std::sqrt(m.mu_[static_cast<size_t>(j)]));
            a(r, rj) = off;
        }
        a(r, r) = total / m.mu_[static_cast<size_t>(k)];
    }
    m.symmetry_defect_ = nrem > 0 ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        fail(ErrorKind::Numeric,
             "eigendecomposition failed on a section of size " + std::to_string(nrem) +
                 " (max |A| = " + std::to_string(a.cwiseAbs().maxCoeff()) + ")");
    m.eigenvalues_ = solver.eigenvalues();
    m.eigenvectors_ = solver.eigenvectors();
    if (m.eigenvalues_(0) < -1e-10)
        fail(ErrorKind::Numeric, "section spectrum dips below the nonnegativity floor");
    return m;
}

Eigen::VectorXd SpectralModel::restrict(const FlatFunction& f, int component) const {
    Eigen::VectorXd out(kept_count());
    for (int i = 0; i < kept_count(); ++i)
        out(i) = f.value(kept_vertices_[static_cast<size_t>(i)], component);
    return out;
}

Eigen::VectorXd SpectralModel::evolve(const Eigen::VectorXd& kept_values, double t) const {
    if (t == 0.0) return kept_values;  // S(0) is the identity, exactly
    int nrem = static_cast<int>(remaining_.size());
    Eigen::VectorXd r(nrem);
    for (int i = 0; i < nrem; ++i)
        r(i) = kept_values(remaining_[static_cast<size_t>(i)]);
    Eigen::VectorXd w = sqrt_mu_.cwiseProduct(r);
    Eigen::VectorXd coeff = eigenvectors_.transpose() * w;
    for (int i = 0; i < coeff.size(); ++i)
        coeff(i) *= std::exp(-eigenvalues_(i) * t);
    w = eigenvectors_ * coeff;
    r = w.cwiseQuotient(sqrt_mu_);

    Eigen::VectorXd full = Eigen::VectorXd::Zero(kept_count());
    for (int i = 0; i < nrem; ++i) full(remaining_[static_cast<size_t>(i)]) = r(i);
    // Instantaneously relaxed vertices: conductance-weighted means, walked in
    // reverse elimination order.
    for (auto it = eliminated_.rbegin(); it != eliminated_.rend(); ++it) {
        double value = 0.0;
        for (auto [u, share] : it->neighbor_weights) value += share * full(u);
        full(it->vertex) = value;
    }
    return full;
}

bool SpectralModel::in_section(const VertexId& v) const {
    auto it = std::lower_bound(section_.begin(), section_.end(), v);
    return it != section_.end() && *it == v;
}

double SpectralModel::value_at(const Eigen::VectorXd& kept_values, const VertexId& v) const {
    auto it = std::lower_bound(section_.begin(), section_.end(), v);
    if (it == section_.end() || *it != v)
        fail(ErrorKind::InvalidVertex, "vertex is outside the section");
    int idx = static_cast<int>(it - section_.begin());
    int k = kept_[static_cast<size_t>(idx)];
    return k < 0 ? 0.0 : kept_values(k);
}

FlatFunction spectral_propagate(const SpectralModel& model, const FlatFunction& f,
                                double t) {
    if (f.dimension() != 1)
        fail(ErrorKind::Validation, "spectral propagation handles one component at a time");
    Eigen::VectorXd evolved = model.evolve(model.restrict(f), t);

    FlatFunction out = f;
    const GraphModel& g = f.graph();
    // Cover the section explicitly, then overwrite with evolved values.
    for (const VertexId& v : model.section())
        if (!v.is_core()) out.ensure_horizon(v.tail, v.depth + 1);
    for (const VertexId& v : model.section())
        out.set_value(v, 0, model.value_at(evolved, v));
    (void)g;
    return out;
}

double dirichlet_lower_bound(std::shared_ptr<const GraphModel> g, const WeightPlan& plan) {
    auto mu_total = plan.mu.total(*g);
    if (!mu_total) fail(ErrorKind::Validation, "companion vertex measure is infinite");

    // Region plus one pseudo-end vertex per tail, attached to the deepest
    // generated layer at the remaining straight-descent series length.
    int region_depth = g->core_size() + 16;
    FiniteSubgraph region = g->ball(g->root(), region_depth);
    int n = static_cast<int>(region.vertices().size());
    int total = n + g->tail_count();
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(total));
    for (const FiniteSubgraph::Edge& e : region.edges()) {
        double w = plan.rho.edge_R(*g, e.ref);
        adj[static_cast<size_t>(e.u)].push_back({e.v, w});
        adj[static_cast<size_t>(e.v)].push_back({e.u, w});
    }
    for (int t = 0; t < g->tail_count(); ++t) {
        const TailSpec& tail = g->tails()[static_cast<size_t>(t)];
        double min_factor = std::numeric_limits<double>::infinity();
        for (const TailEdgeTemplate& e : tail.period.inter)
            min_factor = std::min(min_factor, e.factor);
        int end_node = n + t;
        // Deepest generated layer of this tail.
        int deepest = -1;
        for (const VertexId& v : region.vertices())
            if (!v.is_core() && v.tail == t) deepest = std::max(deepest, v.depth);
        if (deepest < 0) fail(ErrorKind::Validation, "region did not reach tail");
        auto series = plan.rho.tail[static_cast<size_t>(t)].sum_from(deepest);
        if (!series) fail(ErrorKind::Validation, "tail diameter is infinite under this plan");
        double rem = min_factor * *series;
        for (const VertexId& v : region.vertices()) {
            if (v.is_core() || v.tail != t || v.depth != deepest) continue;
            int i = region.index_of(v);
            adj[static_cast<size_t>(i)].push_back({end_node, rem});
            adj[static_cast<size_t>(end_node)].push_back({i, rem});
        }
    }

    double diameter = 0.0;
    for (int src = 0; src < total; ++src) {
        std::vector<double> dist(static_cast<size_t>(total),
                                 std::numeric_limits<double>::infinity());
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
        dist[static_cast<size_t>(src)] = 0.0;
        queue.push({0.0, src});
        while (!queue.empty()) {
            auto [d, v] = queue.top();
            queue.pop();
            if (d > dist[static_cast<size_t>(v)]) continue;
            for (auto [w, len] : adj[static_cast<size_t>(v)]) {
                double nd = d + len;
                if (nd < dist[static_cast<size_t>(w)]) {
                    dist[static_cast<size_t>(w)] = nd;
                    queue.push({nd, w});
                }
            }
        }
        for (double d : dist) {
            if (!std::isfinite(d))
                fail(ErrorKind::Validation, "region is disconnected under this plan");
            diameter = std::max(diameter, d);
        }
    }
    if (!(diameter > 0.0)) fail(ErrorKind::Validation, "degenerate diameter");
    return 1.0 / (4.0 * *mu_total * diameter);
}

std::vector<VertexId> evaluation_window(const GraphModel& g, int radius) {
    return g.ball(g.root(), radius).vertices();
}

namespace {

struct RefinedModel {
    SpectralModel model;
    double defect = 0.0;
};

RefinedModel build_refined(const Weighting& weighting, const BoundarySet& omega,
                           const FlatFunction& f, const std::vector<double>& t_grid,
                           const std::vector<VertexId>& window, int initial_depth,
                           int max_depth, double refine_tol) {
    int depth = initial_depth;
    SpectralModel coarse = build_spectral_model(weighting, omega, depth);
    while (true) {
        SpectralModel fine = build_spectral_model(weighting, omega, 2 * depth);
        double defect = 0.0;
        Eigen::VectorXd coarse0 = coarse.restrict(f);
        Eigen::VectorXd fine0 = fine.restrict(f);
        for (double t : t_grid) {
            Eigen::VectorXd a = coarse.evolve(coarse0, t);
            Eigen::VectorXd b = fine.evolve(fine0, t);
            for (const VertexId& v : window)
                defect = std::max(defect,
                                  std::abs(coarse.value_at(a, v) - fine.value_at(b, v)));
        }
        if (defect <= refine_tol) return RefinedModel{std::move(coarse), defect};
        if (2 * depth > max_depth)
            fail(ErrorKind::Resource,
                 "section refinement did not settle below the tolerance by depth " +
                     std::to_string(2 * depth));
        depth *= 2;
        coarse = std::move(fine);
    }
}

}  // namespace

std::vector<ConvergenceRow> linear_convergence_experiment(const Laplacian& base,
                                                          const WeightPlan& plan,
                                                          const BoundarySet& omega,
                                                          const FlatFunction& f,
                                                          const ConvergenceSetup& setup) {
    const GraphModel& g = base.graph();
    omega.require_valid(g);
    if (!f.vanishes_on(omega))
        fail(ErrorKind::Validation, "initial data must vanish on the dirichlet tails");
    std::vector<VertexId> window = evaluation_window(g, setup.window_radius);

    // Reference evolution through the series semigroup, one per grid time.
    std::vector<FlatFunction> reference;
    reference.reserve(setup.t_grid.size());
    PropagateOptions opts;
    opts.tol = setup.tol;
    for (double t : setup.t_grid) reference.push_back(propagate(base, f, t, opts).value);

    auto run_one = [&](int n) {
        Weighting hybrid = Weighting::hybrid(base.graph_ptr(), plan, g.root(), n);
        RefinedModel refined =
            build_refined(hybrid, omega, f, setup.t_grid, window, setup.initial_depth,
                          setup.max_depth, setup.refine_tol);
        Eigen::VectorXd f0 = refined.model.restrict(f);
        std::vector<ConvergenceRow> rows;
        for (size_t ti = 0; ti < setup.t_grid.size(); ++ti) {
            double t = setup.t_grid[ti];
            Eigen::VectorXd evolved = refined.model.evolve(f0, t);
            double sup = 0.0;
            for (const VertexId& v : window)
                sup = std::max(sup, std::abs(reference[ti].value(v, 0) -
                                             refined.model.value_at(evolved, v)));
            rows.push_back(ConvergenceRow{n, t, sup, refined.model.depth(), refined.defect});
        }
        return rows;
    };

    std::vector<ConvergenceRow> rows;
    if (setup.threads > 1) {
        std::vector<std::future<std::vector<ConvergenceRow>>> futures;
        for (int n : setup.n_list)
            futures.push_back(std::async(std::launch::async, run_one, n));
        for (auto& fut : futures)
            for (ConvergenceRow& r : fut.get()) rows.push_back(r);
    } else {
        for (int n : setup.n_list)
            for (ConvergenceRow& r : run_one(n)) rows.push_back(r);
    }
    return rows;
}

}  // namespace netflat

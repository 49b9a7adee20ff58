#include "netflat/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "netflat/errors.hpp"
#include "netflat/weights.hpp"

namespace netflat {

namespace {

int checked_slot(const PeriodGraph& p, int slot, const char* what) {
    if (slot < 0 || slot >= p.slots)
        fail(ErrorKind::Validation, std::string(what) + ": slot out of range");
    return slot;
}

}  // namespace

GraphModel::GraphModel(CoreGraph core, std::vector<TailSpec> tails, VertexId root)
    : core_(std::move(core)), tails_(std::move(tails)), root_(root) {
    core_adjacency_.resize(core_.labels.size());
    for (int e = 0; e < static_cast<int>(core_.edges.size()); ++e) {
        const CoreEdge& edge = core_.edges[static_cast<size_t>(e)];
        core_adjacency_[static_cast<size_t>(edge.u)].push_back(e);
        core_adjacency_[static_cast<size_t>(edge.v)].push_back(e);
    }
    attach_by_core_.resize(core_.labels.size());
    for (int t = 0; t < static_cast<int>(tails_.size()); ++t) {
        const TailSpec& tail = tails_[static_cast<size_t>(t)];
        for (int a = 0; a < static_cast<int>(tail.attachments.size()); ++a) {
            int cv = tail.attachments[static_cast<size_t>(a)].core_vertex;
            if (cv < 0 || cv >= core_size())
                fail(ErrorKind::Validation, "attachment references missing core vertex");
            attach_by_core_[static_cast<size_t>(cv)].emplace_back(t, a);
        }
    }
    validate();
}

std::shared_ptr<const GraphModel> GraphModel::make(CoreGraph core,
                                                   std::vector<TailSpec> tails,
                                                   VertexId root) {
    return std::shared_ptr<const GraphModel>(
        new GraphModel(std::move(core), std::move(tails), root));
}

void GraphModel::validate() const {
    // Core checks: unique labels, positive weights, simple undirected edges.
    std::unordered_set<std::string> seen_labels;
    if (core_.mu.size() != core_.labels.size())
        fail(ErrorKind::Validation, "core vertex weight list length mismatch");
    for (const std::string& l : core_.labels)
        if (!seen_labels.insert(l).second)
            fail(ErrorKind::Validation, "duplicate core vertex label: " + l);
    for (double m : core_.mu)
        if (!(m > 0.0)) fail(ErrorKind::Validation, "core vertex weight must be positive");
    std::set<std::pair<int, int>> seen_edges;
    for (const CoreEdge& e : core_.edges) {
        if (e.u < 0 || e.u >= core_size() || e.v < 0 || e.v >= core_size())
            fail(ErrorKind::Validation, "core edge endpoint out of range");
        if (e.u == e.v) fail(ErrorKind::Validation, "loops are not allowed");
        if (!(e.R > 0.0)) fail(ErrorKind::Validation, "edge weight must be positive");
        auto key = std::minmax(e.u, e.v);
        if (!seen_edges.insert(key).second)
            fail(ErrorKind::Validation, "parallel core edges are not allowed");
    }

    for (int t = 0; t < tail_count(); ++t) {
        const TailSpec& tail = tails_[static_cast<size_t>(t)];
        const PeriodGraph& p = tail.period;
        if (p.slots < 1) fail(ErrorKind::Validation, "period graph needs at least one slot");
        if (!p.mu_factor.empty() && static_cast<int>(p.mu_factor.size()) != p.slots)
            fail(ErrorKind::Validation, "mu_factor length must match slot count");
        for (double f : p.mu_factor)
            if (!(f > 0.0)) fail(ErrorKind::Validation, "mu_factor must be positive");
        if (p.inter.empty())
            fail(ErrorKind::Validation, "a tail needs at least one inter-depth edge template");
        std::set<std::pair<int, int>> intra_seen;
        for (const TailEdgeTemplate& e : p.intra) {
            checked_slot(p, e.a, "intra edge");
            checked_slot(p, e.b, "intra edge");
            if (e.a == e.b) fail(ErrorKind::Validation, "loops are not allowed");
            if (!(e.factor > 0.0)) fail(ErrorKind::Validation, "edge factor must be positive");
            if (!intra_seen.insert(std::minmax(e.a, e.b)).second)
                fail(ErrorKind::Validation, "duplicate intra edge template");
        }
        std::set<std::pair<int, int>> inter_seen;
        for (const TailEdgeTemplate& e : p.inter) {
            checked_slot(p, e.a, "inter edge");
            checked_slot(p, e.b, "inter edge");
            if (!(e.factor > 0.0)) fail(ErrorKind::Validation, "edge factor must be positive");
            if (!inter_seen.insert({e.a, e.b}).second)
                fail(ErrorKind::Validation, "duplicate inter edge template");
        }
        if (!tail.r_schedule.all_positive() || !tail.mu_schedule.all_positive())
            fail(ErrorKind::Validation, "tail schedules must be strictly positive");
        std::set<std::pair<int, int>> attach_seen;
        for (const Attachment& a : tail.attachments) {
            checked_slot(p, a.slot, "attachment");
            if (!(a.R > 0.0)) fail(ErrorKind::Validation, "attachment weight must be positive");
            if (!attach_seen.insert({a.core_vertex, a.slot}).second)
                fail(ErrorKind::Validation, "duplicate attachment");
        }
        if (tail.attachments.empty() && !(core_size() == 0 && tail_count() == 1))
            fail(ErrorKind::Validation, "unattached tail in a graph with a core");
    }
    if (core_size() == 0 && tail_count() == 0)
        fail(ErrorKind::Validation, "empty graph");
    if (core_size() == 0 && tail_count() > 1)
        fail(ErrorKind::Validation, "coreless graphs must have exactly one tail");

    require_vertex(root_);

    // Connectivity and minimum degree on the skeleton: core plus the first
    // four layers of each tail. Deeper layers repeat the same templates, so
    // reaching layer 3 from layer <= 2 proves every layer is reachable.
    std::vector<VertexId> skeleton;
    for (int i = 0; i < core_size(); ++i) skeleton.push_back(VertexId::core(i));
    for (int t = 0; t < tail_count(); ++t)
        for (int d = 0; d < 4; ++d)
            for (int s = 0; s < tails_[static_cast<size_t>(t)].period.slots; ++s)
                skeleton.push_back(VertexId::in_tail(t, d, s));
    std::unordered_set<VertexId, VertexIdHash> reached;
    std::deque<VertexId> frontier{root_};
    reached.insert(root_);
    while (!frontier.empty()) {
        VertexId v = frontier.front();
        frontier.pop_front();
        for (const IncidentEdge& ie : incident_edges(v)) {
            if (ie.other.kind == 1 && ie.other.depth >= 4) continue;
            if (reached.insert(ie.other).second) frontier.push_back(ie.other);
        }
    }
    for (const VertexId& v : skeleton) {
        if (incident_edges(v).empty())
            fail(ErrorKind::Validation, "isolated vertex: " + label(v));
        if (!reached.count(v))
            fail(ErrorKind::Validation, "graph is not connected at " + label(v));
    }

    // Spot-check user-declared suprema of (2/mu) sum_C against sampled depths.
    for (int t = 0; t < tail_count(); ++t) {
        const TailSpec& tail = tails_[static_cast<size_t>(t)];
        if (!tail.sup_certificate) continue;
        double cert = *tail.sup_certificate;
        for (int d = 0; d <= 1000; d += (d < 32 ? 1 : 31)) {
            for (int s = 0; s < tail.period.slots; ++s) {
                VertexId v = VertexId::in_tail(t, d, s);
                double sum_c = 0.0;
                for (const IncidentEdge& ie : incident_edges(v)) sum_c += ie.C;
                double value = 2.0 * sum_c / base_mu(v);
                if (value > cert * (1.0 + 1e-12))
                    fail(ErrorKind::Validation,
                         "tail sup certificate violated at " + label(v));
            }
        }
    }
}

bool GraphModel::resolves(const VertexId& v) const noexcept {
    if (v.kind == 0)
        return v.depth >= 0 && v.depth < core_size() && v.tail == 0 && v.slot == 0;
    if (v.tail < 0 || v.tail >= tail_count() || v.depth < 0) return false;
    return v.slot >= 0 && v.slot < tails_[static_cast<size_t>(v.tail)].period.slots;
}

void GraphModel::require_vertex(const VertexId& v) const {
    if (!resolves(v)) fail(ErrorKind::InvalidVertex, "vertex does not resolve in this graph");
}

std::string GraphModel::label(const VertexId& v) const {
    require_vertex(v);
    if (v.is_core()) return core_.labels[static_cast<size_t>(v.core_index())];
    std::string s = "t" + std::to_string(v.tail) + ":d" + std::to_string(v.depth);
    if (tails_[static_cast<size_t>(v.tail)].period.slots > 1)
        s += ":s" + std::to_string(v.slot);
    return s;
}

std::optional<VertexId> GraphModel::find_label(const std::string& label) const {
    for (int i = 0; i < core_size(); ++i)
        if (core_.labels[static_cast<size_t>(i)] == label) return VertexId::core(i);
    // tail form t<T>:d<D>[:s<S>]
    if (label.size() > 1 && label[0] == 't') {
        int t = 0, d = 0, s = 0;
        const char* p = label.data() + 1;
        const char* end = label.data() + label.size();
        auto r1 = std::from_chars(p, end, t);
        if (r1.ec == std::errc{} && r1.ptr + 2 <= end && r1.ptr[0] == ':' && r1.ptr[1] == 'd') {
            auto r2 = std::from_chars(r1.ptr + 2, end, d);
            if (r2.ec == std::errc{}) {
                if (r2.ptr == end) {
                    VertexId v = VertexId::in_tail(t, d, 0);
                    if (resolves(v)) return v;
                } else if (r2.ptr + 2 <= end && r2.ptr[0] == ':' && r2.ptr[1] == 's') {
                    auto r3 = std::from_chars(r2.ptr + 2, end, s);
                    if (r3.ec == std::errc{} && r3.ptr == end) {
                        VertexId v = VertexId::in_tail(t, d, s);
                        if (resolves(v)) return v;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

double GraphModel::base_mu(const VertexId& v) const {
    require_vertex(v);
    if (v.is_core()) return core_.mu[static_cast<size_t>(v.core_index())];
    const TailSpec& tail = tails_[static_cast<size_t>(v.tail)];
    double factor = tail.period.mu_factor.empty()
                        ? 1.0
                        : tail.period.mu_factor[static_cast<size_t>(v.slot)];
    return factor * tail.mu_schedule.at(v.depth);
}

double GraphModel::base_edge_R(const EdgeRef& e) const {
    switch (e.kind) {
        case EdgeRef::Kind::Core:
            return core_.edges[static_cast<size_t>(e.index)].R;
        case EdgeRef::Kind::Attach:
            return tails_[static_cast<size_t>(e.tail)]
                .attachments[static_cast<size_t>(e.index)].R;
        case EdgeRef::Kind::Intra: {
            const TailSpec& t = tails_[static_cast<size_t>(e.tail)];
            return t.period.intra[static_cast<size_t>(e.index)].factor *
                   t.r_schedule.at(e.depth);
        }
        case EdgeRef::Kind::Inter: {
            const TailSpec& t = tails_[static_cast<size_t>(e.tail)];
            return t.period.inter[static_cast<size_t>(e.index)].factor *
                   t.r_schedule.at(e.depth);
        }
    }
    fail(ErrorKind::Validation, "bad edge ref");
}

std::pair<VertexId, VertexId> GraphModel::edge_endpoints(const EdgeRef& e) const {
    switch (e.kind) {
        case EdgeRef::Kind::Core: {
            const CoreEdge& ce = core_.edges[static_cast<size_t>(e.index)];
            return {VertexId::core(ce.u), VertexId::core(ce.v)};
        }
        case EdgeRef::Kind::Attach: {
            const Attachment& a =
                tails_[static_cast<size_t>(e.tail)].attachments[static_cast<size_t>(e.index)];
            return {VertexId::core(a.core_vertex), VertexId::in_tail(e.tail, 0, a.slot)};
        }
        case EdgeRef::Kind::Intra: {
            const TailEdgeTemplate& t =
                tails_[static_cast<size_t>(e.tail)].period.intra[static_cast<size_t>(e.index)];
            return {VertexId::in_tail(e.tail, e.depth, t.a),
                    VertexId::in_tail(e.tail, e.depth, t.b)};
        }
        case EdgeRef::Kind::Inter: {
            const TailEdgeTemplate& t =
                tails_[static_cast<size_t>(e.tail)].period.inter[static_cast<size_t>(e.index)];
            return {VertexId::in_tail(e.tail, e.depth, t.a),
                    VertexId::in_tail(e.tail, e.depth + 1, t.b)};
        }
    }
    fail(ErrorKind::Validation, "bad edge ref");
}

std::vector<IncidentEdge> GraphModel::incident_edges(const VertexId& v) const {
    require_vertex(v);
    std::vector<IncidentEdge> out;
    auto push = [&](VertexId other, EdgeRef ref) {
        double R = base_edge_R(ref);
        out.push_back(IncidentEdge{other, ref, R, 1.0 / R});
    };
    if (v.is_core()) {
        int idx = v.core_index();
        for (int e : core_adjacency_[static_cast<size_t>(idx)]) {
            const CoreEdge& ce = core_.edges[static_cast<size_t>(e)];
            int other = ce.u == idx ? ce.v : ce.u;
            push(VertexId::core(other), EdgeRef{EdgeRef::Kind::Core, 0, e, 0});
        }
        for (auto [t, a] : attach_by_core_[static_cast<size_t>(idx)]) {
            const Attachment& at = tails_[static_cast<size_t>(t)].attachments[static_cast<size_t>(a)];
            push(VertexId::in_tail(t, 0, at.slot), EdgeRef{EdgeRef::Kind::Attach, t, a, 0});
        }
    } else {
        const TailSpec& tail = tails_[static_cast<size_t>(v.tail)];
        const PeriodGraph& p = tail.period;
        for (int i = 0; i < static_cast<int>(p.intra.size()); ++i) {
            const TailEdgeTemplate& t = p.intra[static_cast<size_t>(i)];
            if (t.a == v.slot)
                push(VertexId::in_tail(v.tail, v.depth, t.b),
                     EdgeRef{EdgeRef::Kind::Intra, v.tail, i, v.depth});
            else if (t.b == v.slot)
                push(VertexId::in_tail(v.tail, v.depth, t.a),
                     EdgeRef{EdgeRef::Kind::Intra, v.tail, i, v.depth});
        }
        for (int i = 0; i < static_cast<int>(p.inter.size()); ++i) {
            const TailEdgeTemplate& t = p.inter[static_cast<size_t>(i)];
            if (t.a == v.slot)
                push(VertexId::in_tail(v.tail, v.depth + 1, t.b),
                     EdgeRef{EdgeRef::Kind::Inter, v.tail, i, v.depth});
            if (v.depth > 0 && t.b == v.slot)
                push(VertexId::in_tail(v.tail, v.depth - 1, t.a),
                     EdgeRef{EdgeRef::Kind::Inter, v.tail, i, v.depth - 1});
        }
        if (v.depth == 0) {
            for (int a = 0; a < static_cast<int>(tail.attachments.size()); ++a) {
                const Attachment& at = tail.attachments[static_cast<size_t>(a)];
                if (at.slot == v.slot)
                    push(VertexId::core(at.core_vertex),
                         EdgeRef{EdgeRef::Kind::Attach, v.tail, a, 0});
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const IncidentEdge& a, const IncidentEdge& b) { return a.other < b.other; });
    return out;
}

std::optional<int> GraphModel::tail_of(const VertexId& v) const {
    require_vertex(v);
    if (v.is_core()) return std::nullopt;
    return v.tail;
}

int GraphModel::combinatorial_distance(const VertexId& u, const VertexId& v,
                                       int radius_cap) const {
    require_vertex(u);
    require_vertex(v);
    if (u == v) return 0;
    std::unordered_map<VertexId, int, VertexIdHash> dist;
    std::deque<VertexId> frontier{u};
    dist[u] = 0;
    while (!frontier.empty()) {
        VertexId w = frontier.front();
        frontier.pop_front();
        int d = dist[w];
        if (d >= radius_cap)
            throw InconclusiveDistance("combinatorial distance search hit the radius cap",
                                       static_cast<double>(radius_cap));
        for (const IncidentEdge& ie : incident_edges(w)) {
            if (dist.count(ie.other)) continue;
            if (ie.other == v) return d + 1;
            dist[ie.other] = d + 1;
            frontier.push_back(ie.other);
        }
    }
    throw InconclusiveDistance("vertices are not connected within the generated region", 0.0);
}

FiniteSubgraph GraphModel::ball(const VertexId& center, int radius) const {
    require_vertex(center);
    if (radius < 0) fail(ErrorKind::Validation, "ball radius must be nonnegative");
    std::unordered_map<VertexId, int, VertexIdHash> dist;
    std::deque<VertexId> frontier{center};
    dist[center] = 0;
    while (!frontier.empty()) {
        VertexId w = frontier.front();
        frontier.pop_front();
        int d = dist[w];
        if (d == radius) continue;
        for (const IncidentEdge& ie : incident_edges(w)) {
            if (dist.count(ie.other)) continue;
            dist[ie.other] = d + 1;
            frontier.push_back(ie.other);
        }
    }
    std::vector<VertexId> vertices;
    vertices.reserve(dist.size());
    for (const auto& [v, d] : dist) vertices.push_back(v);
    std::sort(vertices.begin(), vertices.end());
    std::unordered_map<VertexId, int, VertexIdHash> index;
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
        index[vertices[static_cast<size_t>(i)]] = i;

    std::vector<FiniteSubgraph::Edge> edges;
    std::vector<bool> cut(vertices.size(), false);
    std::set<EdgeRef> seen;
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
        const VertexId& v = vertices[static_cast<size_t>(i)];
        for (const IncidentEdge& ie : incident_edges(v)) {
            auto it = index.find(ie.other);
            if (it == index.end()) {
                cut[static_cast<size_t>(i)] = true;
                continue;
            }
            if (!seen.insert(ie.edge).second) continue;
            edges.push_back(FiniteSubgraph::Edge{i, it->second, ie.R, ie.edge});
        }
    }
    return FiniteSubgraph(shared_from_this(), std::move(vertices), std::move(edges),
                          std::move(cut));
}

FiniteSubgraph::FiniteSubgraph(std::shared_ptr<const GraphModel> graph,
                               std::vector<VertexId> vertices, std::vector<Edge> edges,
                               std::vector<bool> cut)
    : graph_(std::move(graph)),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      cut_(std::move(cut)) {}

int FiniteSubgraph::index_of(const VertexId& v) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
    if (it == vertices_.end() || *it != v) return -1;
    return static_cast<int>(it - vertices_.begin());
}

double geodesic_distance(const GraphModel& g, const VertexId& u, const VertexId& v,
                         const EdgeWeights& weights, int radius_cap) {
    g.require_vertex(u);
    g.require_vertex(v);
    if (u == v) return 0.0;
    struct Item {
        double dist;
        int hops;
        VertexId vertex;
        bool operator>(const Item& o) const { return dist > o.dist; }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    std::unordered_map<VertexId, double, VertexIdHash> best;
    queue.push({0.0, 0, u});
    best[u] = 0.0;
    double frontier_floor = 0.0;
    while (!queue.empty()) {
        Item item = queue.top();
        queue.pop();
        auto it = best.find(item.vertex);
        if (it != best.end() && item.dist > it->second) continue;
        if (item.vertex == v) return item.dist;
        frontier_floor = item.dist;
        if (item.hops >= radius_cap) continue;  // do not expand beyond the cap
        for (const IncidentEdge& ie : g.incident_edges(item.vertex)) {
            double w = weights.edge_R(g, ie.edge);
            double nd = item.dist + w;
            auto bit = best.find(ie.other);
            if (bit != best.end() && bit->second <= nd) continue;
            best[ie.other] = nd;
            queue.push({nd, item.hops + 1, ie.other});
        }
    }
    throw InconclusiveDistance("geodesic search exhausted the radius cap", frontier_floor);
}

std::shared_ptr<const GraphModel> make_family(const std::string& name) {
    auto starts_with = [&](const char* prefix) {
        return name.rfind(prefix, 0) == 0;
    };
    auto tail_ray = [](Schedule r, Schedule mu) {
        TailSpec t;
        t.period.slots = 1;
        t.period.inter = {TailEdgeTemplate{0, 0, 1.0}};
        t.r_schedule = std::move(r);
        t.mu_schedule = std::move(mu);
        return t;
    };
    if (name == "k2") {
        CoreGraph core;
        core.labels = {"a", "b"};
        core.mu = {1.0, 1.0};
        core.edges = {CoreEdge{0, 1, 1.0}};
        return GraphModel::make(std::move(core), {}, VertexId::core(0));
    }
    if (starts_with("path:")) {
        int n = std::stoi(name.substr(5));
        if (n < 2) fail(ErrorKind::Validation, "path:N needs N >= 2");
        CoreGraph core;
        for (int i = 0; i < n; ++i) {
            core.labels.push_back("v" + std::to_string(i));
            core.mu.push_back(1.0);
        }
        for (int i = 0; i + 1 < n; ++i) core.edges.push_back(CoreEdge{i, i + 1, 1.0});
        return GraphModel::make(std::move(core), {}, VertexId::core(0));
    }
    if (name == "ray:unit") {
        std::vector<TailSpec> tails{tail_ray(Schedule::constant(1.0), Schedule::constant(1.0))};
        return GraphModel::make(CoreGraph{}, std::move(tails), VertexId::in_tail(0, 0, 0));
    }
    if (starts_with("ray:geometric:")) {
        double gamma = std::stod(name.substr(14));
        if (!(gamma > 0.0 && gamma < 1.0))
            fail(ErrorKind::Validation, "ray:geometric:G needs 0 < G < 1");
        std::vector<TailSpec> tails{
            tail_ray(Schedule::geometric(gamma, gamma), Schedule::constant(1.0))};
        return GraphModel::make(CoreGraph{}, std::move(tails), VertexId::in_tail(0, 0, 0));
    }
    if (starts_with("spider:")) {
        int t = std::stoi(name.substr(7));
        if (t < 1) fail(ErrorKind::Validation, "spider:T needs T >= 1");
        CoreGraph core;
        core.labels = {"c"};
        core.mu = {1.0};
        std::vector<TailSpec> tails;
        for (int i = 0; i < t; ++i) {
            TailSpec tail = tail_ray(Schedule::constant(1.0), Schedule::constant(1.0));
            tail.attachments = {Attachment{0, 0, 1.0}};
            tails.push_back(std::move(tail));
        }
        return GraphModel::make(std::move(core), std::move(tails), VertexId::core(0));
    }
    if (starts_with("lattice2d:")) {
        int n = std::stoi(name.substr(10));
        if (n < 2) fail(ErrorKind::Validation, "lattice2d:N needs N >= 2");
        CoreGraph core;
        auto id = [n](int x, int y) { return x * n + y; };
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                core.labels.push_back("x" + std::to_string(x) + "_" + std::to_string(y));
                core.mu.push_back(1.0);
            }
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                if (x + 1 < n) core.edges.push_back(CoreEdge{id(x, y), id(x + 1, y), 1.0});
                if (y + 1 < n) core.edges.push_back(CoreEdge{id(x, y), id(x, y + 1), 1.0});
            }
        // Far field grouped into a single tail attached along the boundary,
        // matching the one-end view of the plane at desk scale.
        TailSpec tail = tail_ray(Schedule::constant(1.0), Schedule::constant(1.0));
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (x == 0 || y == 0 || x == n - 1 || y == n - 1)
                    tail.attachments.push_back(Attachment{id(x, y), 0, 1.0});
        std::vector<TailSpec> tails{std::move(tail)};
        return GraphModel::make(std::move(core), std::move(tails), VertexId::core(id(n / 2, n / 2)));
    }
    fail(ErrorKind::Validation, "unknown graph family: " + name);
}

}  // namespace netflat

#include "netflat/flat.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "netflat/errors.hpp"

namespace netflat {

BoundarySet BoundarySet::all_tails(const GraphModel& g) {
    std::set<int> tails;
    for (int t = 0; t < g.tail_count(); ++t) tails.insert(t);
    return BoundarySet(std::move(tails));
}

bool BoundarySet::disjoint_from(const BoundarySet& other) const {
    for (int t : tails_)
        if (other.contains(t)) return false;
    return true;
}

void BoundarySet::require_valid(const GraphModel& g) const {
    for (int t : tails_)
        if (t < 0 || t >= g.tail_count())
            fail(ErrorKind::Validation, "boundary set references missing tail");
}

FlatFunction::FlatFunction(std::shared_ptr<const GraphModel> graph, int dimension)
    : graph_(std::move(graph)), dim_(dimension) {
    if (dim_ < 1) fail(ErrorKind::Validation, "dimension must be >= 1");
    core_.assign(static_cast<size_t>(graph_->core_size() * dim_), 0.0);
    tails_.resize(static_cast<size_t>(graph_->tail_count()));
    for (TailData& t : tails_) t.constant.assign(static_cast<size_t>(dim_), 0.0);
}

FlatFunction FlatFunction::constant(std::shared_ptr<const GraphModel> graph,
                                    std::vector<double> value) {
    FlatFunction f(graph, static_cast<int>(value.size()));
    for (int i = 0; i < graph->core_size(); ++i)
        for (int c = 0; c < f.dim_; ++c)
            f.core_[static_cast<size_t>(i * f.dim_ + c)] = value[static_cast<size_t>(c)];
    for (TailData& t : f.tails_) t.constant = value;
    return f;
}

FlatFunction FlatFunction::constant(std::shared_ptr<const GraphModel> graph, double value) {
    return constant(std::move(graph), std::vector<double>{value});
}

FlatFunction FlatFunction::delta(std::shared_ptr<const GraphModel> graph, const VertexId& v,
                                 double mu_at_v) {
    graph->require_vertex(v);
    if (!(mu_at_v > 0.0)) fail(ErrorKind::Validation, "delta needs mu(v) > 0");
    FlatFunction f(std::move(graph), 1);
    f.set_value(v, 0, 1.0 / mu_at_v);
    return f;
}

FlatFunction FlatFunction::step(std::shared_ptr<const GraphModel> graph, int tail,
                                int cutoff_depth, double inside, double outside) {
    if (tail < 0 || tail >= graph->tail_count())
        fail(ErrorKind::Validation, "step function references missing tail");
    if (cutoff_depth < 0) fail(ErrorKind::Validation, "step cutoff must be nonnegative");
    FlatFunction f(graph, 1);
    for (int i = 0; i < graph->core_size(); ++i) f.core_[static_cast<size_t>(i)] = inside;
    for (int t = 0; t < graph->tail_count(); ++t) {
        if (t == tail) {
            f.tails_[static_cast<size_t>(t)].constant = {outside};
            f.ensure_horizon(t, cutoff_depth + 1);
            int slots = graph->tails()[static_cast<size_t>(t)].period.slots;
            for (int d = 0; d <= cutoff_depth; ++d)
                for (int s = 0; s < slots; ++s)
                    *f.tail_entry(t, d, s) = inside;
        } else {
            f.tails_[static_cast<size_t>(t)].constant = {inside};
        }
    }
    return f;
}

int FlatFunction::horizon(int tail) const {
    const TailData& t = tails_[static_cast<size_t>(tail)];
    int slots = graph_->tails()[static_cast<size_t>(tail)].period.slots;
    return static_cast<int>(t.values.size()) / (slots * dim_);
}

const std::vector<double>& FlatFunction::tail_constant(int tail) const {
    return tails_[static_cast<size_t>(tail)].constant;
}

double* FlatFunction::tail_entry(int tail, int depth, int slot) {
    int slots = graph_->tails()[static_cast<size_t>(tail)].period.slots;
    return tails_[static_cast<size_t>(tail)].values.data() +
           (static_cast<size_t>(depth) * static_cast<size_t>(slots) +
            static_cast<size_t>(slot)) * static_cast<size_t>(dim_);
}

const double* FlatFunction::tail_entry(int tail, int depth, int slot) const {
    return const_cast<FlatFunction*>(this)->tail_entry(tail, depth, slot);
}

double FlatFunction::value(const VertexId& v, int component) const {
    graph_->require_vertex(v);
    if (v.is_core()) return core_[static_cast<size_t>(v.core_index() * dim_ + component)];
    if (v.depth >= horizon(v.tail))
        return tails_[static_cast<size_t>(v.tail)].constant[static_cast<size_t>(component)];
    return tail_entry(v.tail, v.depth, v.slot)[component];
}

std::vector<double> FlatFunction::evaluate(const VertexId& v) const {
    std::vector<double> out(static_cast<size_t>(dim_));
    for (int c = 0; c < dim_; ++c) out[static_cast<size_t>(c)] = value(v, c);
    return out;
}

void FlatFunction::ensure_horizon(int tail, int h) {
    TailData& t = tails_[static_cast<size_t>(tail)];
    int slots = graph_->tails()[static_cast<size_t>(tail)].period.slots;
    int current = horizon(tail);
    if (h <= current) return;
    t.values.resize(static_cast<size_t>(h) * static_cast<size_t>(slots) *
                        static_cast<size_t>(dim_),
                    0.0);
    for (int d = current; d < h; ++d)
        for (int s = 0; s < slots; ++s)
            for (int c = 0; c < dim_; ++c)
                tail_entry(tail, d, s)[c] = t.constant[static_cast<size_t>(c)];
}

void FlatFunction::set_value(const VertexId& v, int component, double x) {
    graph_->require_vertex(v);
    if (v.is_core()) {
        core_[static_cast<size_t>(v.core_index() * dim_ + component)] = x;
        return;
    }
    ensure_horizon(v.tail, v.depth + 1);
    tail_entry(v.tail, v.depth, v.slot)[component] = x;
}

void FlatFunction::set_tail_constant(int tail, std::vector<double> value) {
    if (static_cast<int>(value.size()) != dim_)
        fail(ErrorKind::Validation, "tail constant dimension mismatch");
    tails_[static_cast<size_t>(tail)].constant = std::move(value);
}

std::vector<EdgeRef> FlatFunction::jump_edges() const {
    std::vector<EdgeRef> out;
    auto differs = [this](const VertexId& u, const VertexId& v) {
        for (int c = 0; c < dim_; ++c)
            if (value(u, c) != value(v, c)) return true;
        return false;
    };
    for (int e = 0; e < static_cast<int>(graph_->core().edges.size()); ++e) {
        EdgeRef ref{EdgeRef::Kind::Core, 0, e, 0};
        auto [u, v] = graph_->edge_endpoints(ref);
        if (differs(u, v)) out.push_back(ref);
    }
    for (int t = 0; t < graph_->tail_count(); ++t) {
        const TailSpec& tail = graph_->tails()[static_cast<size_t>(t)];
        for (int a = 0; a < static_cast<int>(tail.attachments.size()); ++a) {
            EdgeRef ref{EdgeRef::Kind::Attach, t, a, 0};
            auto [u, v] = graph_->edge_endpoints(ref);
            if (differs(u, v)) out.push_back(ref);
        }
        int h = horizon(t);
        for (int d = 0; d < h; ++d) {
            for (int i = 0; i < static_cast<int>(tail.period.intra.size()); ++i) {
                EdgeRef ref{EdgeRef::Kind::Intra, t, i, d};
                auto [u, v] = graph_->edge_endpoints(ref);
                if (differs(u, v)) out.push_back(ref);
            }
            for (int i = 0; i < static_cast<int>(tail.period.inter.size()); ++i) {
                EdgeRef ref{EdgeRef::Kind::Inter, t, i, d};
                auto [u, v] = graph_->edge_endpoints(ref);
                if (differs(u, v)) out.push_back(ref);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> FlatFunction::range_values(int component) const {
    std::set<double> values;
    for (int i = 0; i < graph_->core_size(); ++i)
        values.insert(core_[static_cast<size_t>(i * dim_ + component)]);
    for (int t = 0; t < graph_->tail_count(); ++t) {
        int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
        for (int d = 0; d < horizon(t); ++d)
            for (int s = 0; s < slots; ++s)
                values.insert(tail_entry(t, d, s)[component]);
        values.insert(tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(component)]);
    }
    return std::vector<double>(values.begin(), values.end());
}

double FlatFunction::sup_norm() const {
    double m = 0.0;
    for (double x : core_) m = std::max(m, std::abs(x));
    for (const TailData& t : tails_) {
        for (double x : t.values) m = std::max(m, std::abs(x));
        for (double x : t.constant) m = std::max(m, std::abs(x));
    }
    return m;
}

NormValue FlatFunction::lp_norm(double p, const VertexWeights& weights) const {
    if (p == std::numeric_limits<double>::infinity())
        return NormValue{sup_norm(), true};
    if (!(p >= 1.0)) fail(ErrorKind::Validation, "lp_norm needs p in {1, 2, inf}");
    double worst = 0.0;
    for (int c = 0; c < dim_; ++c) {
        double sum = 0.0;
        for (int i = 0; i < graph_->core_size(); ++i)
            sum += std::pow(std::abs(core_[static_cast<size_t>(i * dim_ + c)]), p) *
                   weights.core[static_cast<size_t>(i)];
        for (int t = 0; t < graph_->tail_count(); ++t) {
            int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
            int h = horizon(t);
            for (int d = 0; d < h; ++d)
                for (int s = 0; s < slots; ++s)
                    sum += std::pow(std::abs(tail_entry(t, d, s)[c]), p) *
                           weights.tail[static_cast<size_t>(t)][static_cast<size_t>(s)].at(d);
            double tc = tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(c)];
            if (tc != 0.0) {
                for (int s = 0; s < slots; ++s) {
                    auto series =
                        weights.tail[static_cast<size_t>(t)][static_cast<size_t>(s)].sum_from(h);
                    if (!series) return NormValue::infinite();
                    sum += std::pow(std::abs(tc), p) * *series;
                }
            }
        }
        worst = std::max(worst, std::pow(sum, 1.0 / p));
    }
    return NormValue{worst, true};
}

std::vector<double> FlatFunction::weighted_sum(const VertexWeights& weights) const {
    std::vector<double> out(static_cast<size_t>(dim_), 0.0);
    for (int c = 0; c < dim_; ++c) {
        double sum = 0.0;
        for (int i = 0; i < graph_->core_size(); ++i)
            sum += core_[static_cast<size_t>(i * dim_ + c)] * weights.core[static_cast<size_t>(i)];
        for (int t = 0; t < graph_->tail_count(); ++t) {
            int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
            int h = horizon(t);
            for (int d = 0; d < h; ++d)
                for (int s = 0; s < slots; ++s)
                    sum += tail_entry(t, d, s)[c] *
                           weights.tail[static_cast<size_t>(t)][static_cast<size_t>(s)].at(d);
            double tc = tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(c)];
            if (tc != 0.0) {
                for (int s = 0; s < slots; ++s) {
                    auto series =
                        weights.tail[static_cast<size_t>(t)][static_cast<size_t>(s)].sum_from(h);
                    if (!series)
                        fail(ErrorKind::Inconclusive,
                             "weighted sum diverges: nonzero tail constant with divergent "
                             "weight series");
                    sum += tc * *series;
                }
            }
        }
        out[static_cast<size_t>(c)] = sum;
    }
    return out;
}

void FlatFunction::align_with(const FlatFunction& other, FlatFunction& out) const {
    if (!same_graph(other)) fail(ErrorKind::Validation, "flat functions live on different graphs");
    if (dim_ != other.dim_) fail(ErrorKind::Validation, "flat function dimension mismatch");
    out = *this;
    for (int t = 0; t < graph_->tail_count(); ++t)
        out.ensure_horizon(t, std::max(horizon(t), other.horizon(t)));
}

FlatFunction FlatFunction::add(const FlatFunction& other) const {
    FlatFunction out(graph_, dim_);
    align_with(other, out);
    return out.add_scaled_in_place(other, 1.0);
}

FlatFunction FlatFunction::sub(const FlatFunction& other) const {
    FlatFunction out(graph_, dim_);
    align_with(other, out);
    return out.add_scaled_in_place(other, -1.0);
}

FlatFunction FlatFunction::mul(const FlatFunction& other) const {
    FlatFunction out(graph_, dim_);
    align_with(other, out);
    for (size_t i = 0; i < out.core_.size(); ++i) out.core_[i] *= other.core_[i];
    for (int t = 0; t < graph_->tail_count(); ++t) {
        TailData& td = out.tails_[static_cast<size_t>(t)];
        int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
        int oh = other.horizon(t);
        int h = out.horizon(t);
        for (int d = 0; d < h; ++d)
            for (int s = 0; s < slots; ++s) {
                double* dst = out.tail_entry(t, d, s);
                if (d < oh) {
                    const double* src = other.tail_entry(t, d, s);
                    for (int c = 0; c < dim_; ++c) dst[c] *= src[c];
                } else {
                    for (int c = 0; c < dim_; ++c)
                        dst[c] *= other.tails_[static_cast<size_t>(t)]
                                      .constant[static_cast<size_t>(c)];
                }
            }
        for (int c = 0; c < dim_; ++c)
            td.constant[static_cast<size_t>(c)] *=
                other.tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(c)];
    }
    return out;
}

FlatFunction FlatFunction::scale(double c) const {
    FlatFunction out = *this;
    return out.scale_in_place(c);
}

FlatFunction& FlatFunction::add_scaled_in_place(const FlatFunction& other, double a) {
    if (!same_graph(other)) fail(ErrorKind::Validation, "flat functions live on different graphs");
    if (dim_ != other.dim_) fail(ErrorKind::Validation, "flat function dimension mismatch");
    for (size_t i = 0; i < core_.size(); ++i) core_[i] += a * other.core_[i];
    for (int t = 0; t < graph_->tail_count(); ++t) {
        ensure_horizon(t, other.horizon(t));
        int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
        int oh = other.horizon(t);
        int h = horizon(t);
        for (int d = 0; d < h; ++d)
            for (int s = 0; s < slots; ++s) {
                double* dst = tail_entry(t, d, s);
                if (d < oh) {
                    const double* src = other.tail_entry(t, d, s);
                    for (int c = 0; c < dim_; ++c) dst[c] += a * src[c];
                } else {
                    for (int c = 0; c < dim_; ++c)
                        dst[c] += a * other.tails_[static_cast<size_t>(t)]
                                          .constant[static_cast<size_t>(c)];
                }
            }
        for (int c = 0; c < dim_; ++c)
            tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(c)] +=
                a * other.tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(c)];
    }
    return *this;
}

FlatFunction& FlatFunction::scale_in_place(double c) {
    for (double& x : core_) x *= c;
    for (TailData& t : tails_) {
        for (double& x : t.values) x *= c;
        for (double& x : t.constant) x *= c;
    }
    return *this;
}

double FlatFunction::sup_diff(const FlatFunction& other) const {
    if (!same_graph(other)) fail(ErrorKind::Validation, "flat functions live on different graphs");
    if (dim_ != other.dim_) fail(ErrorKind::Validation, "flat function dimension mismatch");
    double m = 0.0;
    for (size_t i = 0; i < core_.size(); ++i)
        m = std::max(m, std::abs(core_[i] - other.core_[i]));
    for (int t = 0; t < graph_->tail_count(); ++t) {
        int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
        int h = std::max(horizon(t), other.horizon(t));
        for (int d = 0; d < h; ++d)
            for (int s = 0; s < slots; ++s)
                for (int c = 0; c < dim_; ++c)
                    m = std::max(m, std::abs(value(VertexId::in_tail(t, d, s), c) -
                                             other.value(VertexId::in_tail(t, d, s), c)));
        for (int c = 0; c < dim_; ++c)
            m = std::max(m,
                         std::abs(tails_[static_cast<size_t>(t)].constant[static_cast<size_t>(c)] -
                                  other.tails_[static_cast<size_t>(t)]
                                      .constant[static_cast<size_t>(c)]));
    }
    return m;
}

void FlatFunction::clamp_horizon(int tail, int max_depth) {
    if (max_depth < 0) max_depth = 0;
    TailData& t = tails_[static_cast<size_t>(tail)];
    int slots = graph_->tails()[static_cast<size_t>(tail)].period.slots;
    int h = horizon(tail);
    if (h <= max_depth) return;
    t.values.resize(static_cast<size_t>(max_depth) * static_cast<size_t>(slots) *
                    static_cast<size_t>(dim_));
}

void FlatFunction::compact() {
    for (int t = 0; t < graph_->tail_count(); ++t) {
        TailData& td = tails_[static_cast<size_t>(t)];
        int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
        int h = horizon(t);
        while (h > 0) {
            bool flat = true;
            for (int s = 0; s < slots && flat; ++s) {
                const double* v = tail_entry(t, h - 1, s);
                for (int c = 0; c < dim_; ++c)
                    if (v[c] != td.constant[static_cast<size_t>(c)]) {
                        flat = false;
                        break;
                    }
            }
            if (!flat) break;
            --h;
        }
        td.values.resize(static_cast<size_t>(h) * static_cast<size_t>(slots) *
                         static_cast<size_t>(dim_));
    }
}

bool FlatFunction::vanishes_on(const BoundarySet& omega) const {
    for (int t : omega.tails()) {
        if (t < 0 || t >= graph_->tail_count())
            fail(ErrorKind::Validation, "boundary set references missing tail");
        for (double x : tails_[static_cast<size_t>(t)].constant)
            if (x != 0.0) return false;
    }
    return true;
}

void FlatFunction::check_invariants() const {
    if (static_cast<int>(core_.size()) != graph_->core_size() * dim_)
        fail(ErrorKind::Validation, "core value storage inconsistent");
    for (double x : core_)
        if (!std::isfinite(x)) fail(ErrorKind::Validation, "non-finite value in core");
    for (int t = 0; t < graph_->tail_count(); ++t) {
        const TailData& td = tails_[static_cast<size_t>(t)];
        int slots = graph_->tails()[static_cast<size_t>(t)].period.slots;
        if (td.values.size() % (static_cast<size_t>(slots) * static_cast<size_t>(dim_)) != 0)
            fail(ErrorKind::Validation, "tail value storage inconsistent");
        if (static_cast<int>(td.constant.size()) != dim_)
            fail(ErrorKind::Validation, "tail constant dimension inconsistent");
        for (double x : td.values)
            if (!std::isfinite(x)) fail(ErrorKind::Validation, "non-finite value in tail");
        for (double x : td.constant)
            if (!std::isfinite(x)) fail(ErrorKind::Validation, "non-finite tail constant");
    }
    // Jump set containment is structural: candidates are confined to the
    // explicit region by construction, so finiteness needs no search here.
}

FlatFunction separation_function(std::shared_ptr<const GraphModel> graph,
                                 const BoundarySet& omega1, const BoundarySet& omega2,
                                 int guard_depth) {
    omega1.require_valid(*graph);
    omega2.require_valid(*graph);
    if (omega1.empty() || omega2.empty())
        fail(ErrorKind::Validation, "separation needs two nonempty boundary sets");
    if (!omega1.disjoint_from(omega2))
        fail(ErrorKind::Validation, "separation needs disjoint boundary sets");
    if (guard_depth < 0) fail(ErrorKind::Validation, "guard depth must be nonnegative");

    // Multi-source BFS over the whole graph from each side's tail entrances;
    // stops once every core vertex is labeled.
    auto distances = [&](const BoundarySet& omega) {
        std::unordered_map<VertexId, int, VertexIdHash> dist;
        std::deque<VertexId> frontier;
        for (int t : omega.tails()) {
            int slots = graph->tails()[static_cast<size_t>(t)].period.slots;
            for (int s = 0; s < slots; ++s) {
                VertexId v = VertexId::in_tail(t, 0, s);
                dist[v] = 0;
                frontier.push_back(v);
            }
        }
        int core_found = 0;
        while (!frontier.empty() && core_found < graph->core_size()) {
            VertexId v = frontier.front();
            frontier.pop_front();
            for (const IncidentEdge& ie : graph->incident_edges(v)) {
                if (dist.count(ie.other)) continue;
                dist[ie.other] = dist[v] + 1;
                if (ie.other.is_core()) ++core_found;
                frontier.push_back(ie.other);
            }
        }
        return dist;
    };
    auto d1 = distances(omega1);
    auto d2 = distances(omega2);

    FlatFunction f(graph, 1);
    auto core_value = [&](int i) {
        VertexId v = VertexId::core(i);
        auto i1 = d1.find(v);
        auto i2 = d2.find(v);
        int a = i1 == d1.end() ? INT32_MAX : i1->second;
        int b = i2 == d2.end() ? INT32_MAX : i2->second;
        return a < b ? 1.0 : 0.0;
    };
    for (int i = 0; i < graph->core_size(); ++i) f.set_value(VertexId::core(i), 0, core_value(i));
    for (int t = 0; t < graph->tail_count(); ++t) {
        double c;
        if (omega1.contains(t)) {
            c = 1.0;
        } else if (omega2.contains(t)) {
            c = 0.0;
        } else {
            // Neutral tail: follows its attachments when they agree, else 0.
            const TailSpec& tail = graph->tails()[static_cast<size_t>(t)];
            c = 1.0;
            for (const Attachment& a : tail.attachments)
                if (core_value(a.core_vertex) != 1.0) c = 0.0;
            if (tail.attachments.empty()) c = 0.0;
        }
        f.set_tail_constant(t, {c});
        if (omega1.contains(t) || omega2.contains(t)) {
            f.ensure_horizon(t, guard_depth);
            int slots = graph->tails()[static_cast<size_t>(t)].period.slots;
            for (int d = 0; d < guard_depth; ++d)
                for (int s = 0; s < slots; ++s)
                    f.set_value(VertexId::in_tail(t, d, s), 0, c);
        }
    }
    return f;
}

}  // namespace netflat

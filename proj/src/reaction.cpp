#include "netflat/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "netflat/errors.hpp"

namespace netflat {

ReactionMap zero_reaction() {
    ReactionMap m;
    m.name = "zero";
    m.zero = true;
    m.lipschitz = 0.0;
    m.fn = [](double, const double*, double* out) { *out = 0.0; };
    return m;
}

ReactionMap logistic_reaction(double K, StateBox box) {
    if (K == 0.0) fail(ErrorKind::Validation, "logistic carrying capacity must be nonzero");
    ReactionMap m;
    m.name = "logistic";
    m.params = {{"K", K}, {"box_lo", box.lo}, {"box_hi", box.hi}};
    m.box = box;
    // |J'(u)| = |1 - 2u/K| peaks at a box endpoint.
    m.lipschitz = std::max(std::abs(1.0 - 2.0 * box.lo / K), std::abs(1.0 - 2.0 * box.hi / K));
    m.fn = [K](double, const double* u, double* out) { *out = *u * (1.0 - *u / K); };
    return m;
}

ReactionMap linear_decay(double rate) {
    ReactionMap m;
    m.name = "decay";
    m.params = {{"rate", rate}};
    m.lipschitz = std::abs(rate);
    m.fn = [rate](double, const double* u, double* out) { *out = -rate * *u; };
    return m;
}

ReactionMap bistable_reaction(double a, StateBox box) {
    ReactionMap m;
    m.name = "bistable";
    m.params = {{"a", a}, {"box_lo", box.lo}, {"box_hi", box.hi}};
    m.box = box;
    // J'(u) = -3u^2 + 2(1+a)u - a; extrema at the box ends or u = (1+a)/3.
    auto dj = [a](double u) { return std::abs(-3.0 * u * u + 2.0 * (1.0 + a) * u - a); };
    double lip = std::max(dj(box.lo), dj(box.hi));
    double crit = (1.0 + a) / 3.0;
    if (crit > box.lo && crit < box.hi) lip = std::max(lip, dj(crit));
    m.lipschitz = lip;
    m.fn = [a](double, const double* u, double* out) {
        *out = *u * (1.0 - *u) * (*u - a);
    };
    return m;
}

ReactionField::ReactionField(int dimension, ReactionMap default_map)
    : dim_(dimension), default_map_(std::move(default_map)) {
    if (dim_ < 1) fail(ErrorKind::Validation, "reaction dimension must be >= 1");
}

void ReactionField::set_tail_map(int tail, ReactionMap map) {
    tail_maps_[tail] = std::move(map);
}

void ReactionField::add_exception(const VertexId& v, ReactionMap map) {
    exceptions_.emplace_back(v, std::move(map));
}

const ReactionMap& ReactionField::at(const VertexId& v) const {
    for (const auto& [u, map] : exceptions_)
        if (u == v) return map;
    if (!v.is_core()) {
        auto it = tail_maps_.find(v.tail);
        if (it != tail_maps_.end()) return it->second;
    }
    return default_map_;
}

const ReactionMap& ReactionField::tail_map(int tail) const {
    auto it = tail_maps_.find(tail);
    return it != tail_maps_.end() ? it->second : default_map_;
}

double ReactionField::lipschitz() const {
    double lip = default_map_.lipschitz;
    for (const auto& [t, m] : tail_maps_) lip = std::max(lip, m.lipschitz);
    for (const auto& [v, m] : exceptions_) lip = std::max(lip, m.lipschitz);
    return lip;
}

bool ReactionField::is_zero() const {
    if (!default_map_.zero) return false;
    for (const auto& [t, m] : tail_maps_)
        if (!m.zero) return false;
    for (const auto& [v, m] : exceptions_)
        if (!m.zero) return false;
    return true;
}

bool ReactionField::smooth() const {
    bool s = default_map_.smooth;
    for (const auto& [t, m] : tail_maps_) s = s && m.smooth;
    for (const auto& [v, m] : exceptions_) s = s && m.smooth;
    return s;
}

int ReactionField::exception_horizon(int tail) const {
    int h = 0;
    for (const auto& [v, m] : exceptions_)
        if (!v.is_core() && v.tail == tail) h = std::max(h, v.depth + 1);
    return h;
}

FlatFunction ReactionField::evaluate(double t, const FlatFunction& p) const {
    if (p.dimension() != dim_)
        fail(ErrorKind::Validation, "reaction field dimension mismatch");
    const GraphModel& g = p.graph();
    FlatFunction out(p.graph_ptr(), dim_);
    std::vector<double> in(static_cast<size_t>(dim_)), res(static_cast<size_t>(dim_));
    auto apply_at = [&](const VertexId& v) {
        for (int c = 0; c < dim_; ++c) in[static_cast<size_t>(c)] = p.value(v, c);
        at(v).fn(t, in.data(), res.data());
        for (int c = 0; c < dim_; ++c) out.set_value(v, c, res[static_cast<size_t>(c)]);
    };
    for (int i = 0; i < g.core_size(); ++i) apply_at(VertexId::core(i));
    for (int tl = 0; tl < g.tail_count(); ++tl) {
        int h = std::max(p.horizon(tl), exception_horizon(tl));
        out.ensure_horizon(tl, h);
        int slots = g.tails()[static_cast<size_t>(tl)].period.slots;
        for (int d = 0; d < h; ++d)
            for (int s = 0; s < slots; ++s) apply_at(VertexId::in_tail(tl, d, s));
        const std::vector<double>& tc = p.tail_constant(tl);
        tail_map(tl).fn(t, tc.data(), res.data());
        out.set_tail_constant(tl, res);
    }
    return out;
}

const FlatFunction& Trajectory::at_time(double t) const {
    for (size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return states[i];
    fail(ErrorKind::Validation, "requested time is not on the trajectory grid");
}

namespace {

// ---------------------------------------------------------------------------
// Windowed fixed-point engine, shared by the flat-function solver and the
// finite-section (vector) solver. Ops supplies the state algebra and the
// semigroup action.
// ---------------------------------------------------------------------------

template <class Ops>
struct WindowOutput {
    std::vector<typename Ops::State> nodes;  // N + 1 states on the window grid
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;  // sup-difference per sweep
};

template <class Ops>
WindowOutput<Ops> run_window(const Ops& ops, const typename Ops::State& start, double t0,
                             double width, int intervals, double stop_tol,
                             int iteration_cap) {
    using State = typename Ops::State;
    const int n = intervals;
    const double h = width / n;

    std::vector<State> sg_start;  // S(j h) applied to the window's initial state
    sg_start.reserve(static_cast<size_t>(n) + 1);
    sg_start.push_back(start);
    for (int j = 1; j <= n; ++j) sg_start.push_back(ops.sg(sg_start.back(), h));

    std::vector<State> p(static_cast<size_t>(n) + 1, start);
    std::vector<double> history;
    int iterations = 0;
    while (true) {
        std::vector<State> g;
        g.reserve(static_cast<size_t>(n) + 1);
        for (int j = 0; j <= n; ++j) g.push_back(ops.react(t0 + j * h, p[static_cast<size_t>(j)]));
        std::vector<State> g1, g2;  // S(h) G_j and S(2h) G_j
        g1.reserve(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) g1.push_back(ops.sg(g[static_cast<size_t>(j)], h));
        g2.reserve(static_cast<size_t>(n));
        for (int j = 0; j + 1 < n; ++j) g2.push_back(ops.sg(g1[static_cast<size_t>(j)], h));

        // Cumulative Simpson over pairs of intervals; the first interval is
        // a trapezoid whose h^3 defect is damped by the window length.
        std::vector<State> integral;
        integral.reserve(static_cast<size_t>(n) + 1);
        integral.push_back(ops.zero_like(start));
        if (n >= 1) {
            State a1 = ops.scaled(g1[0], h / 2.0);
            ops.add_scaled(a1, g[1], h / 2.0);
            integral.push_back(std::move(a1));
        }
        for (int j = 2; j <= n; ++j) {
            State aj = ops.sg(integral[static_cast<size_t>(j - 2)], 2.0 * h);
            ops.add_scaled(aj, g2[static_cast<size_t>(j - 2)], h / 3.0);
            ops.add_scaled(aj, g1[static_cast<size_t>(j - 1)], 4.0 * h / 3.0);
            ops.add_scaled(aj, g[static_cast<size_t>(j)], h / 3.0);
            integral.push_back(std::move(aj));
        }

        double delta = 0.0;
        std::vector<State> next;
        next.reserve(static_cast<size_t>(n) + 1);
        for (int j = 0; j <= n; ++j) {
            State v = sg_start[static_cast<size_t>(j)];
            ops.add_scaled(v, integral[static_cast<size_t>(j)], 1.0);
            delta = std::max(delta, ops.sup_diff(v, p[static_cast<size_t>(j)]));
            next.push_back(std::move(v));
        }
        p = std::move(next);
        ++iterations;
        history.push_back(delta);
        if (delta <= stop_tol) break;
        if (iterations >= iteration_cap) {
            std::ostringstream msg;
            msg << "fixed-point iteration failed to contract within " << iteration_cap
                << " sweeps; sup-differences:";
            for (double d : history) msg << " " << d;
            fail(ErrorKind::Solver, msg.str());
        }
    }
    for (int j = 0; j <= n; ++j) ops.check_box(p[static_cast<size_t>(j)]);
    return WindowOutput<Ops>{std::move(p), iterations, history.back(), std::move(history)};
}

// Window partition: segments between report times, each split into windows
// shorter than 1/(2 C1) (quarter of it, so the iteration contracts at ~1/2).
std::vector<double> window_boundaries(double t1, double lipschitz,
                                      const std::vector<double>& report_times) {
    std::vector<double> anchors{0.0};
    for (double t : report_times) {
        if (!(t > 0.0 && t <= t1 + 1e-12))
            fail(ErrorKind::Validation, "report times must lie in (0, t1]");
        anchors.push_back(std::min(t, t1));
    }
    if (std::abs(anchors.back() - t1) > 1e-12) anchors.push_back(t1);
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                  anchors.end());

    double cap = lipschitz > 0.0 ? 0.25 / lipschitz : std::numeric_limits<double>::infinity();
    std::vector<double> bounds{0.0};
    for (size_t i = 1; i < anchors.size(); ++i) {
        double seg = anchors[i] - anchors[i - 1];
        int pieces = std::max(1, static_cast<int>(std::ceil(seg / cap)));
        for (int j = 1; j <= pieces; ++j) bounds.push_back(anchors[i - 1] + seg * j / pieces);
    }
    return bounds;
}

struct FlatStateOps {
    using State = FlatFunction;

    const Laplacian* laplacian = nullptr;
    const ReactionField* field = nullptr;
    double sg_tol = 1e-9;
    long work_cap = 4000000;
    std::vector<int> caps;  // per tail, fixed for the current window

    State sg(const State& f, double dt) const {
        PropagateOptions o;
        o.tol = sg_tol;
        o.work_cap = work_cap;
        o.horizon_cap = caps.empty() ? nullptr : &caps;
        return propagate(*laplacian, f, dt, o).value;
    }
    State react(double t, const State& p) const { return field->evaluate(t, p); }
    State zero_like(const State& f) const { return State(f.graph_ptr(), f.dimension()); }
    State scaled(const State& f, double c) const { return f.scale(c); }
    void add_scaled(State& a, const State& b, double c) const { a.add_scaled_in_place(b, c); }
    double sup_diff(const State& a, const State& b) const { return a.sup_diff(b); }

    void check_box(const State& p) const {
        const GraphModel& g = p.graph();
        auto check = [&](const VertexId& v) {
            const StateBox& box = field->at(v).box;
            for (int c = 0; c < p.dimension(); ++c) {
                double x = p.value(v, c);
                if (x < box.lo || x > box.hi)
                    fail(ErrorKind::Solver,
                         "state left its certified box at " + g.label(v) + " (value " +
                             std::to_string(x) + ")");
            }
        };
        for (int i = 0; i < g.core_size(); ++i) check(VertexId::core(i));
        for (int t = 0; t < g.tail_count(); ++t) {
            int slots = g.tails()[static_cast<size_t>(t)].period.slots;
            for (int d = 0; d < p.horizon(t); ++d)
                for (int s = 0; s < slots; ++s) check(VertexId::in_tail(t, d, s));
            const StateBox& box = field->tail_map(t).box;
            for (double x : p.tail_constant(t))
                if (x < box.lo || x > box.hi)
                    fail(ErrorKind::Solver, "tail constant left its certified box");
        }
    }
};

// Chain growth budget for one window: the longest semigroup chain is either
// the direct S(width) application or the n chained S(h) steps feeding the
// memory integral.
int window_growth_budget(const Laplacian& L, double width, int intervals, double sg_tol,
                         double sup_estimate, long work_cap) {
    if (!L.bounded()) return 0;
    double norm = L.op_norm_inf();
    SeriesPlan small = plan_series(width / intervals, norm, sup_estimate, sg_tol, work_cap);
    SeriesPlan two = plan_series(2.0 * width / intervals, norm, sup_estimate, sg_tol, work_cap);
    SeriesPlan full = plan_series(width, norm, sup_estimate, sg_tol, work_cap);
    int per_step = std::max(small.substeps * small.order, two.substeps * two.order);
    return std::max(intervals * per_step, full.substeps * full.order) + 4;
}

}  // namespace

Trajectory solve_mild(const Laplacian& L, const ReactionField& field, const FlatFunction& p0,
                      double t1, const MildOptions& options) {
    if (!L.bounded()) fail(ErrorKind::Unbounded, "the mild solver needs a bounded operator");
    if (!(t1 > 0.0)) fail(ErrorKind::Validation, "t1 must be positive");
    if (!(options.tol > 0.0)) fail(ErrorKind::Validation, "tolerance must be positive");
    if (options.nodes_per_window < 17 || options.nodes_per_window % 2 == 0)
        fail(ErrorKind::Validation, "nodes_per_window must be odd and >= 17");
    p0.check_invariants();

    const int intervals = options.nodes_per_window - 1;
    double lipschitz = field.lipschitz();
    std::vector<double> bounds = window_boundaries(t1, lipschitz, options.report_times);

    FlatStateOps ops;
    ops.laplacian = &L;
    ops.field = &field;
    ops.sg_tol = options.tol / (20.0 * intervals);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(p0);

    FlatFunction state = p0;
    const GraphModel& g = L.graph();
    for (size_t w = 1; w < bounds.size(); ++w) {
        double a = bounds[w - 1];
        double width = bounds[w] - bounds[w - 1];
        int budget = window_growth_budget(L, width, intervals, ops.sg_tol,
                                          std::max(1.0, state.sup_norm()), ops.work_cap);
        ops.caps.assign(static_cast<size_t>(g.tail_count()), 0);
        for (int t = 0; t < g.tail_count(); ++t)
            ops.caps[static_cast<size_t>(t)] =
                std::max(state.horizon(t), field.exception_horizon(t)) + budget;

        WindowOutput<FlatStateOps> out = run_window(ops, state, a, width, intervals,
                                                    options.tol / 10.0, options.iteration_cap);
        for (int j = 1; j <= intervals; ++j) {
            traj.times.push_back(a + width * j / intervals);
            traj.states.push_back(out.nodes[static_cast<size_t>(j)]);
        }
        traj.window_iterations.push_back(out.iterations);
        traj.window_residuals.push_back(out.residual);
        traj.window_histories.push_back(std::move(out.history));
        state = std::move(out.nodes.back());
    }

    double residual_sum = 0.0;
    for (double r : traj.window_residuals) residual_sum += r;
    traj.error_estimate =
        2.0 * residual_sum + static_cast<double>(traj.window_residuals.size()) *
                                 options.tol / 10.0;
    traj.support_horizon.assign(static_cast<size_t>(g.tail_count()), 0);
    for (int t = 0; t < g.tail_count(); ++t)
        traj.support_horizon[static_cast<size_t>(t)] = state.horizon(t);
    return traj;
}

std::vector<std::vector<double>> solve_boundary_ode(const ReactionField& field, int tail,
                                                    const std::vector<double>& q0,
                                                    const std::vector<double>& times,
                                                    double tol) {
    if (times.empty() || times.front() != 0.0)
        fail(ErrorKind::Validation, "the time grid must start at 0");
    if (static_cast<int>(q0.size()) != field.dimension())
        fail(ErrorKind::Validation, "initial value dimension mismatch");
    const ReactionMap& map = field.tail_map(tail);
    const int d = field.dimension();

    auto rk4_step = [&](double t, const std::vector<double>& y, double h) {
        std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
            tmp(y.size());
        map.fn(t, y.data(), k1.data());
        for (size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        map.fn(t + 0.5 * h, tmp.data(), k2.data());
        for (size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        map.fn(t + 0.5 * h, tmp.data(), k3.data());
        for (size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
        map.fn(t + h, tmp.data(), k4.data());
        std::vector<double> out(y.size());
        for (size_t i = 0; i < y.size(); ++i)
            out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    };

    std::vector<std::vector<double>> samples;
    samples.push_back(q0);
    std::vector<double> y = q0;
    double t = 0.0;
    double h = times.back() > 0.0 ? times.back() / 64.0 : 1.0;
    for (size_t target_idx = 1; target_idx < times.size(); ++target_idx) {
        double target = times[target_idx];
        while (t < target - 1e-15) {
            double step = std::min(h, target - t);
            std::vector<double> full = rk4_step(t, y, step);
            std::vector<double> half = rk4_step(t, y, 0.5 * step);
            std::vector<double> two = rk4_step(t + 0.5 * step, half, 0.5 * step);
            double err = 0.0;
            for (int i = 0; i < d; ++i)
                err = std::max(err, std::abs(two[static_cast<size_t>(i)] -
                                             full[static_cast<size_t>(i)]) / 15.0);
            if (err <= tol) {
                y = std::move(two);
                t += step;
                if (err < tol / 32.0)
                    h = std::min(step * 2.0, times.back());
            } else {
                h = 0.5 * step;
                if (h < 1e-14 * std::max(1.0, times.back()))
                    fail(ErrorKind::Solver, "ODE step size underflow");
            }
        }
        samples.push_back(y);
    }
    return samples;
}

std::vector<AsymptoticsRow> spatial_asymptotics_check(const Laplacian& L,
                                                      const ReactionField& field,
                                                      const FlatFunction& p0, double t1,
                                                      int tail,
                                                      const std::vector<int>& probe_depths,
                                                      double tol) {
    if (tail < 0 || tail >= L.graph().tail_count())
        fail(ErrorKind::Validation, "probe tail does not exist");
    MildOptions options;
    options.tol = tol;
    Trajectory traj = solve_mild(L, field, p0, t1, options);

    std::vector<std::vector<double>> ode =
        solve_boundary_ode(field, tail, p0.tail_constant(tail), traj.times, tol / 10.0);

    int slots = L.graph().tails()[static_cast<size_t>(tail)].period.slots;
    std::vector<AsymptoticsRow> rows;
    for (int depth : probe_depths) {
        AsymptoticsRow row;
        row.depth = depth;
        row.structural_zero = true;
        for (size_t i = 0; i < traj.times.size(); ++i) {
            const FlatFunction& state = traj.states[i];
            if (depth < state.horizon(tail)) row.structural_zero = false;
            for (int s = 0; s < slots; ++s)
                for (int c = 0; c < p0.dimension(); ++c)
                    row.sup_diff = std::max(
                        row.sup_diff, std::abs(state.value(VertexId::in_tail(tail, depth, s), c) -
                                               ode[i][static_cast<size_t>(c)]));
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

struct VectorStateOps {
    using State = Eigen::VectorXd;

    const SpectralModel* model = nullptr;
    const ReactionField* field = nullptr;

    State sg(const State& v, double dt) const { return model->evolve(v, dt); }
    State react(double t, const State& p) const {
        State out(p.size());
        for (int i = 0; i < p.size(); ++i) {
            double u = p(i);
            double r = 0.0;
            field->at(model->kept_vertices()[static_cast<size_t>(i)]).fn(t, &u, &r);
            out(i) = r;
        }
        return out;
    }
    State zero_like(const State& v) const { return State::Zero(v.size()); }
    State scaled(const State& v, double c) const { return v * c; }
    void add_scaled(State& a, const State& b, double c) const { a += c * b; }
    double sup_diff(const State& a, const State& b) const {
        return (a - b).cwiseAbs().maxCoeff();
    }
    void check_box(const State& p) const {
        for (int i = 0; i < p.size(); ++i) {
            const StateBox& box =
                field->at(model->kept_vertices()[static_cast<size_t>(i)]).box;
            if (p(i) < box.lo || p(i) > box.hi)
                fail(ErrorKind::Solver, "section state left its certified box");
        }
    }
};

}  // namespace

std::vector<ConvergenceRow> semilinear_convergence_experiment(
    const Laplacian& base, const WeightPlan& plan, const BoundarySet& omega,
    const ReactionField& field, const FlatFunction& p0, const ConvergenceSetup& setup,
    double solver_tol) {
    if (field.is_zero())
        return linear_convergence_experiment(base, plan, omega, p0, setup);

    const GraphModel& g = base.graph();
    omega.require_valid(g);
    if (!p0.vanishes_on(omega))
        fail(ErrorKind::Validation, "initial data must vanish on the dirichlet tails");
    std::vector<VertexId> window = evaluation_window(g, setup.window_radius);

    double t1 = 0.0;
    for (double t : setup.t_grid) t1 = std::max(t1, t);
    if (!(t1 > 0.0)) fail(ErrorKind::Validation, "the time grid needs a positive entry");
    MildOptions mild;
    mild.tol = solver_tol;
    for (double t : setup.t_grid)
        if (t > 0.0) mild.report_times.push_back(t);
    Trajectory reference = solve_mild(base, field, p0, t1, mild);

    const int intervals = mild.nodes_per_window - 1;
    double lipschitz = field.lipschitz();
    std::vector<double> bounds = window_boundaries(t1, lipschitz, mild.report_times);

    std::vector<ConvergenceRow> rows;
    for (int n : setup.n_list) {
        Weighting hybrid = Weighting::hybrid(base.graph_ptr(), plan, g.root(), n);
        // Depth refinement is certified on the linear flow, then the
        // semilinear iteration runs at the accepted depth.
        double refinement_defect = 0.0;
        SpectralModel model = [&] {
            int depth = setup.initial_depth;
            SpectralModel coarse = build_spectral_model(hybrid, omega, depth);
            while (true) {
                SpectralModel fine = build_spectral_model(hybrid, omega, 2 * depth);
                double defect = 0.0;
                Eigen::VectorXd c0 = coarse.restrict(p0);
                Eigen::VectorXd f0 = fine.restrict(p0);
                for (double t : setup.t_grid) {
                    Eigen::VectorXd a = coarse.evolve(c0, t);
                    Eigen::VectorXd b = fine.evolve(f0, t);
                    for (const VertexId& v : window)
                        defect = std::max(defect, std::abs(coarse.value_at(a, v) -
                                                           fine.value_at(b, v)));
                }
                refinement_defect = defect;
                if (defect <= setup.refine_tol) return coarse;
                if (2 * depth > setup.max_depth)
                    fail(ErrorKind::Resource, "section refinement exceeded the depth cap");
                depth *= 2;
                coarse = std::move(fine);
            }
        }();

        VectorStateOps ops;
        ops.model = &model;
        ops.field = &field;

        std::vector<double> node_times{0.0};
        std::vector<Eigen::VectorXd> node_states{model.restrict(p0)};
        Eigen::VectorXd state = node_states.front();
        for (size_t w = 1; w < bounds.size(); ++w) {
            double a = bounds[w - 1];
            double width = bounds[w] - bounds[w - 1];
            WindowOutput<VectorStateOps> out = run_window(
                ops, state, a, width, intervals, solver_tol / 10.0, mild.iteration_cap);
            for (int j = 1; j <= intervals; ++j) {
                node_times.push_back(a + width * j / intervals);
                node_states.push_back(out.nodes[static_cast<size_t>(j)]);
            }
            state = std::move(out.nodes.back());
        }

        for (double t : setup.t_grid) {
            double sup = 0.0;
            const FlatFunction& ref = reference.at_time(t);
            const Eigen::VectorXd* vec = nullptr;
            for (size_t i = 0; i < node_times.size(); ++i)
                if (std::abs(node_times[i] - t) <= 1e-9 * std::max(1.0, t)) {
                    vec = &node_states[i];
                    break;
                }
            if (!vec) fail(ErrorKind::Validation, "grid time missing from the section run");
            for (const VertexId& v : window)
                sup = std::max(sup, std::abs(ref.value(v, 0) - model.value_at(*vec, v)));
            rows.push_back(ConvergenceRow{n, t, sup, model.depth(), refinement_defect});
        }
    }
    return rows;
}

GronwallReport gronwall_stability_check(const Laplacian& L, const ReactionField& field,
                                        const FlatFunction& p0, const FlatFunction& delta,
                                        double t1, const MildOptions& options) {
    Trajectory base = solve_mild(L, field, p0, t1, options);
    Trajectory shifted = solve_mild(L, field, p0.add(delta), t1, options);
    double delta_sup = delta.sup_norm();
    double lipschitz = field.lipschitz();

    GronwallReport report;
    for (size_t i = 0; i < base.times.size(); ++i) {
        double t = base.times[i];
        double diff = base.states[i].sup_diff(shifted.states[i]);
        double bound = delta_sup * std::exp(lipschitz * t) * (1.0 + 1e-3);
        report.times.push_back(t);
        report.differences.push_back(diff);
        report.bounds.push_back(bound);
        if (diff > bound) report.bound_holds = false;
        if (bound > 0.0) report.max_ratio = std::max(report.max_ratio, diff / bound);
    }
    return report;
}

}  // namespace netflat

#include "netflat/propagator.hpp"

#include <cmath>

#include "netflat/errors.hpp"

namespace netflat {

SeriesPlan plan_series(double t, double op_norm_inf, double f_sup, double tol,
                       long work_cap) {
    if (t < 0.0) fail(ErrorKind::Validation, "propagation time must be nonnegative");
    if (!(tol > 0.0)) fail(ErrorKind::Validation, "tolerance must be positive");
    SeriesPlan plan;
    plan.tolerance = tol;
    if (t == 0.0) return plan;

    double x_total = t * op_norm_inf;
    int m = std::max(1, static_cast<int>(std::ceil(x_total / 4.0)));
    double x = x_total / m;
    plan.substeps = m;
    if (f_sup == 0.0 || x == 0.0) {
        plan.order = 0;
        plan.remainder = 0.0;
        return plan;
    }
    // term = (x)^(k+1) / (k+1)!; accumulated remainder m * f_sup * e^x * term.
    double scale = m * f_sup * std::exp(x);
    double term = x;  // k = 0
    int k = 0;
    while (scale * term > tol) {
        ++k;
        term *= x / (k + 1);
        if (static_cast<long>(m) * k > work_cap)
            fail(ErrorKind::Resource,
                 "series plan exceeds the work cap; increase the tolerance or split the "
                 "time interval");
    }
    plan.order = k;
    plan.remainder = scale * term;
    return plan;
}

Propagated propagate(const Laplacian& L, const FlatFunction& f, double t,
                     const PropagateOptions& options) {
    if (!L.bounded())
        fail(ErrorKind::Unbounded, "series propagation needs a bounded operator");
    if (f.graph_ptr().get() != &L.graph())
        fail(ErrorKind::Validation, "function lives on a different graph");
    SeriesPlan plan = plan_series(t, L.op_norm_inf(), f.sup_norm(), options.tol,
                                  options.work_cap);
    if (plan.substeps == 0) return Propagated{f, 0.0, plan};

    double tau = t / plan.substeps;
    FlatFunction state = f;
    for (int step = 0; step < plan.substeps; ++step) {
        FlatFunction acc = state;
        FlatFunction term = state;
        for (int n = 1; n <= plan.order; ++n) {
            term = L.apply(term);
            term.scale_in_place(-tau / n);
            if (options.horizon_cap)
                for (int tl = 0; tl < L.graph().tail_count(); ++tl)
                    term.clamp_horizon(tl, (*options.horizon_cap)[static_cast<size_t>(tl)]);
            acc.add_scaled_in_place(term, 1.0);
        }
        acc.compact();
        state = std::move(acc);
    }
    return Propagated{std::move(state), plan.remainder, plan};
}

double heat_kernel(const Laplacian& L, const KernelQuery& query) {
    const GraphModel& g = L.graph();
    g.require_vertex(query.source);
    g.require_vertex(query.target);
    FlatFunction point =
        FlatFunction::delta(L.graph_ptr(), query.target, L.mu(query.target));
    PropagateOptions options;
    options.tol = query.tol;
    Propagated result = propagate(L, point, query.t, options);
    return result.value.value(query.source, 0);
}

double decay_bound(const Laplacian& L, double t, int k, double mu_v) {
    if (k < 0) fail(ErrorKind::Validation, "decay bound needs k >= 0");
    if (!(mu_v > 0.0)) fail(ErrorKind::Validation, "decay bound needs mu(v) > 0");
    double x = t * L.op_norm_inf();
    if (x == 0.0) return k == 0 ? 1.0 / mu_v : 0.0;
    return std::exp(k * std::log(x) - std::lgamma(k + 1.0) + x) / mu_v;
}

double decay_bound_stirling(const Laplacian& L, double t, int k, double mu_v) {
    if (k < 1) fail(ErrorKind::Validation, "the Stirling form needs k >= 1");
    if (!(mu_v > 0.0)) fail(ErrorKind::Validation, "decay bound needs mu(v) > 0");
    double x = t * L.op_norm_inf();
    if (x == 0.0) return 0.0;
    return std::exp(1.0 + k * (1.0 + std::log(x) - std::log(static_cast<double>(k))) + x) /
           mu_v;
}

std::vector<double> mass(const Laplacian& L, const FlatFunction& f) {
    return f.weighted_sum(L.weighting().vertices());
}

}  // namespace netflat

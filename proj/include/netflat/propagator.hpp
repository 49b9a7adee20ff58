#pragma once

#include <vector>

#include "netflat/flat.hpp"
#include "netflat/laplacian.hpp"

namespace netflat {

// Truncated-series realization of exp(-t L) with a certified remainder.
// Substep count m keeps tau*|L| <= 4; k is the smallest truncation order
// whose accumulated remainder m * sup|f| * e^(tau|L|) (tau|L|)^(k+1)/(k+1)!
// stays under the tolerance.
struct SeriesPlan {
    double tolerance = 0.0;
    int substeps = 0;   // m; 0 means t == 0 (identity)
    int order = 0;      // k per substep
    double remainder = 0.0;
};

SeriesPlan plan_series(double t, double op_norm_inf, double f_sup, double tol,
                       long work_cap);

struct PropagateOptions {
    double tol = 1e-8;
    long work_cap = 4000000;  // max substeps * order before a resource error
    // Optional per-tail locality cap used by the mild solver: explicit
    // layers beyond the cap fold into the tail constant. The dropped values
    // are below the series tolerance by construction.
    const std::vector<int>* horizon_cap = nullptr;
};

struct Propagated {
    FlatFunction value;
    double error_bound = 0.0;
    SeriesPlan plan;
};

// exp(-t L) f within sup error tol. t = 0 returns f exactly; the output's
// deviation from its tail constants is confined to m*k combinatorial steps
// around the jump set of f.
Propagated propagate(const Laplacian& L, const FlatFunction& f, double t,
                     const PropagateOptions& options = {});

struct KernelQuery {
    double t = 0.0;
    VertexId source;  // u in S(t, u, v)
    VertexId target;  // v
    double tol = 1e-8;
};

// Heat kernel value S(t, u, v) = exp(-t L) delta_v (u) within the query
// tolerance.
double heat_kernel(const Laplacian& L, const KernelQuery& query);

// Factorial-form spatial decay bound for |S(t, u, v)| at combinatorial
// distance k: (1/mu(v)) (t|L|)^k / k! * e^(t|L|).
double decay_bound(const Laplacian& L, double t, int k, double mu_v);
// Stirling variant (e/mu(v)) (e t |L| / k)^k e^(t|L|), valid for k >= 1.
double decay_bound_stirling(const Laplacian& L, double t, int k, double mu_v);

// Componentwise sum of f * mu over the graph (explicit part plus closed-form
// tail series). Conserved by the semigroup.
std::vector<double> mass(const Laplacian& L, const FlatFunction& f);

}  // namespace netflat

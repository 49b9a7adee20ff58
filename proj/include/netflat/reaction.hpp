#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "netflat/flat.hpp"
#include "netflat/laplacian.hpp"
#include "netflat/propagator.hpp"
#include "netflat/spectral.hpp"

namespace netflat {

struct StateBox {
    double lo = -10.0;
    double hi = 10.0;
};

// Pointwise reaction map u' = fn(t, u) with a Lipschitz constant certified
// on its box. Catalog entries carry closed-form constants; the solver aborts
// if a state leaves the box of the map governing its vertex.
struct ReactionMap {
    std::string name = "zero";
    std::function<void(double, const double*, double*)> fn;
    double lipschitz = 0.0;
    StateBox box{-1e300, 1e300};
    bool smooth = true;
    bool zero = false;
    std::map<std::string, double> params;
};

ReactionMap zero_reaction();
// u (1 - u/K)
ReactionMap logistic_reaction(double K, StateBox box = {-10.0, 10.0});
// -rate * u
ReactionMap linear_decay(double rate);
// u (1 - u)(u - a)
ReactionMap bistable_reaction(double a, StateBox box = {-10.0, 10.0});

// Reaction field determined pointwise and eventually constant: one default
// map, optional per-tail overrides, and a finite exception set.
class ReactionField {
public:
    ReactionField(int dimension, ReactionMap default_map);

    void set_tail_map(int tail, ReactionMap map);
    void add_exception(const VertexId& v, ReactionMap map);

    int dimension() const noexcept { return dim_; }
    // Map governing this vertex: exception, then tail override, then default.
    const ReactionMap& at(const VertexId& v) const;
    // Map governing a tail's far field (exceptions do not reach it).
    const ReactionMap& tail_map(int tail) const;
    double lipschitz() const;          // max over all maps in play
    bool is_zero() const;
    bool smooth() const;
    int exception_horizon(int tail) const;  // first depth past all exceptions

    // Pointwise application; the output is flat again, with tail constants
    // J_tail(t, constant).
    FlatFunction evaluate(double t, const FlatFunction& p) const;

private:
    int dim_ = 1;
    ReactionMap default_map_;
    std::map<int, ReactionMap> tail_maps_;
    std::vector<std::pair<VertexId, ReactionMap>> exceptions_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<FlatFunction> states;
    std::vector<int> window_iterations;
    std::vector<double> window_residuals;
    std::vector<std::vector<double>> window_histories;  // sup-differences per sweep
    double error_estimate = 0.0;
    std::vector<int> support_horizon;  // per tail, explicit depth of the final state

    const FlatFunction& at_time(double t) const;
};

struct MildOptions {
    double tol = 1e-7;
    int nodes_per_window = 17;  // >= 17, odd (even interval count)
    int iteration_cap = 50;
    // Times that must coincide with window boundaries (sorted, within (0, t1]).
    std::vector<double> report_times;
};

// Mild solution of dp/dt + L p = J(t, p) by windowed fixed-point iteration:
// windows short enough to contract, the memory integral discretized by
// cumulative composite Simpson on a uniform grid, the semigroup applied by
// chained substeps from cached states.
Trajectory solve_mild(const Laplacian& L, const ReactionField& J, const FlatFunction& p0,
                      double t1, const MildOptions& options = {});

// dq/dt = J_tail(t, q) by classical RK4 with step-doubling control; returns
// the solution sampled at the requested times (first entry must be 0).
std::vector<std::vector<double>> solve_boundary_ode(const ReactionField& J, int tail,
                                                    const std::vector<double>& q0,
                                                    const std::vector<double>& times,
                                                    double tol);

struct AsymptoticsRow {
    int depth = 0;
    double sup_diff = 0.0;      // sup over the grid of |p(t, probe) - q(t)|
    bool structural_zero = false;  // probe beyond the explicit support at all times
};

// Far-field check: deep tail vertices follow the reduced ODE of their tail.
std::vector<AsymptoticsRow> spatial_asymptotics_check(const Laplacian& L,
                                                      const ReactionField& J,
                                                      const FlatFunction& p0, double t1,
                                                      int tail,
                                                      const std::vector<int>& probe_depths,
                                                      double tol);

// Semilinear strong-convergence experiment; the spectral side runs the same
// windowed iteration with the eigenfunction-expansion semigroup. A zero
// reaction field delegates to the linear experiment, reproducing its rows.
std::vector<ConvergenceRow> semilinear_convergence_experiment(
    const Laplacian& base, const WeightPlan& plan, const BoundarySet& omega,
    const ReactionField& J, const FlatFunction& p0, const ConvergenceSetup& setup,
    double solver_tol);

struct GronwallReport {
    bool bound_holds = true;
    double max_ratio = 0.0;  // max over grid of |p - p~| / (|delta| e^(C1 t))
    std::vector<double> times;
    std::vector<double> differences;
    std::vector<double> bounds;
};

// Perturbation growth check: |p(t) - p~(t)| <= |delta| e^(C1 t) (1 + 1e-3).
GronwallReport gronwall_stability_check(const Laplacian& L, const ReactionField& J,
                                        const FlatFunction& p0,
                                        const FlatFunction& delta, double t1,
                                        const MildOptions& options = {});

}  // namespace netflat

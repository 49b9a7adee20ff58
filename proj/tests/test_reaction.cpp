#include <doctest.h>

#include <cmath>

#include "netflat/errors.hpp"
#include "netflat/reaction.hpp"
#include "support.hpp"

using namespace netflat;
using namespace netflat::testing;

namespace {
const double kLogisticAtOne = std::exp(1.0) / (1.0 + std::exp(1.0));  // q0 = 1/2, t = 1
}

TEST_CASE("evaluate_reaction") {
    auto ray = unit_ray();
    ReactionField zero(1, zero_reaction());
    FlatFunction p = FlatFunction::step(ray, 0, 2, 1.0, 0.0);
    CHECK(zero.evaluate(0.0, p).sup_norm() == 0.0);

    ReactionField logistic(1, logistic_reaction(1.0));
    FlatFunction half = FlatFunction::constant(ray, 0.5);
    FlatFunction out = logistic.evaluate(0.0, half);
    CHECK(out.value(ray_depth(3)) == doctest::Approx(0.25));
    CHECK(out.tail_constant(0)[0] == doctest::Approx(0.25));

    // A decay exception at one vertex, logistic elsewhere.
    ReactionField mixed(1, logistic_reaction(1.0));
    mixed.add_exception(ray_depth(1), linear_decay(1.0));
    FlatFunction m = mixed.evaluate(0.0, half);
    CHECK(m.value(ray_depth(1)) == doctest::Approx(-0.5));
    CHECK(m.value(ray_depth(2)) == doctest::Approx(0.25));
    m.check_invariants();
}

TEST_CASE("lipschitz bookkeeping") {
    ReactionField f(1, logistic_reaction(1.0, {-2.0, 2.0}));
    CHECK(f.lipschitz() == doctest::Approx(5.0));  // |1 - 2*2/1| at the box edge
    f.add_exception(VertexId::core(0), linear_decay(9.0));
    CHECK(f.lipschitz() == doctest::Approx(9.0));
    CHECK(!f.is_zero());
    CHECK(ReactionField(1, zero_reaction()).is_zero());
}

TEST_CASE("solve_boundary_ode closed forms") {
    ReactionField zero(1, zero_reaction());
    auto flat = solve_boundary_ode(zero, 0, {0.75}, {0.0, 0.5, 1.0}, 1e-10);
    CHECK(flat[2][0] == 0.75);

    ReactionField logistic(1, logistic_reaction(1.0));
    auto q = solve_boundary_ode(logistic, 0, {0.5}, {0.0, 1.0}, 1e-10);
    CHECK(q[1][0] == doctest::Approx(kLogisticAtOne).epsilon(1e-8));

    ReactionField decay(1, linear_decay(1.0));
    auto e = solve_boundary_ode(decay, 0, {1.0}, {0.0, 1.0}, 1e-10);
    CHECK(e[1][0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("solve_mild: zero reaction reduces to the linear semigroup") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    ReactionField zero(1, zero_reaction());
    FlatFunction p0(g, 1);
    p0.set_value(VertexId::core(0), 0, 1.0);
    MildOptions o;
    o.tol = 1e-9;
    o.report_times = {0.25, 0.5};
    Trajectory traj = solve_mild(L, zero, p0, 0.5, o);
    for (double t : {0.25, 0.5}) {
        FlatFunction expected = propagate(L, p0, t, {1e-12}).value;
        CHECK(traj.at_time(t).sup_diff(expected) <= 1e-9);
    }
}

TEST_CASE("solve_mild: diffusion-free logistic follows the scalar flow") {
    // Constant initial data on K2 stays spatially constant, so the mild
    // solution equals the logistic ODE solution at every vertex.
    auto g = k2();
    Laplacian L(Weighting::base(g));
    ReactionField logistic(1, logistic_reaction(1.0, {-2.0, 2.0}));
    FlatFunction p0 = FlatFunction::constant(g, 0.5);
    MildOptions o;
    o.tol = 1e-9;
    Trajectory traj = solve_mild(L, logistic, p0, 1.0, o);
    CHECK(traj.states.back().value(VertexId::core(0)) ==
          doctest::Approx(kLogisticAtOne).epsilon(1e-7));
    CHECK(traj.states.back().value(VertexId::core(1)) ==
          doctest::Approx(kLogisticAtOne).epsilon(1e-7));
}

TEST_CASE("solve_mild: equilibrium is a fixed point") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    ReactionField logistic(1, logistic_reaction(1.0, {-2.0, 2.0}));
    FlatFunction p0 = FlatFunction::constant(g, 1.0);
    MildOptions o;
    o.tol = 1e-9;
    Trajectory traj = solve_mild(L, logistic, p0, 1.0, o);
    CHECK(traj.states.back().sup_diff(p0) <= 1e-9);
}

TEST_CASE("solve_mild: box exit aborts") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    // Box that the logistic flow from 3.0 immediately violates.
    ReactionField tight(1, logistic_reaction(1.0, {-0.5, 0.5}));
    FlatFunction p0 = FlatFunction::constant(g, 3.0);
    MildOptions o;
    o.tol = 1e-6;
    CHECK_THROWS_AS((void)solve_mild(L, tight, p0, 1.0, o), Error);
}

TEST_CASE("mild oracle: method-of-lines RK4 on the 10-vertex fixture") {
    auto g = fixture10();
    Laplacian L(Weighting::base(g));
    ReactionField logistic(1, logistic_reaction(1.0, {-2.0, 2.0}));
    FlatFunction p0(g, 1);
    for (int i = 0; i < g->core_size(); ++i)
        p0.set_value(VertexId::core(i), 0, 0.1 + 0.08 * i);
    MildOptions o;
    o.tol = 1e-7;
    Trajectory traj = solve_mild(L, logistic, p0, 1.0, o);

    // Dense RK4 on dp/dt = -Lp + J(p), fixed step h = 1/4096.
    Eigen::MatrixXd lap = L.q_matrix(g->ball(g->root(), 10));
    Eigen::VectorXd y(g->core_size());
    for (int i = 0; i < g->core_size(); ++i) y(i) = p0.value(VertexId::core(i));
    auto rhs = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd r = -lap * u;
        for (int i = 0; i < r.size(); ++i) r(i) += u(i) * (1.0 - u(i));
        return r;
    };
    int steps = 4096;
    double h = 1.0 / steps;
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXd k1 = rhs(y);
        Eigen::VectorXd k2 = rhs(y + 0.5 * h * k1);
        Eigen::VectorXd k3 = rhs(y + 0.5 * h * k2);
        Eigen::VectorXd k4 = rhs(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    double worst = 0.0;
    const FlatFunction& last = traj.states.back();
    for (int i = 0; i < g->core_size(); ++i)
        worst = std::max(worst, std::abs(last.value(VertexId::core(i)) - y(i)));
    CHECK(worst <= 1e-6);
}

TEST_CASE("spatial asymptotics on the ray") {
    auto ray = unit_ray();
    Laplacian L(Weighting::base(ray));
    ReactionField logistic(1, logistic_reaction(1.0, {-2.0, 2.0}));
    FlatFunction p0 = FlatFunction::step(ray, 0, 2, 1.0, 0.0);
    auto rows = spatial_asymptotics_check(L, logistic, p0, 0.5, 0, {1, 20, 4000}, 1e-6);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].sup_diff > 1e-3);   // inside the diffusion range
    CHECK(rows[1].sup_diff <= 1e-6);  // far field follows the ODE
    CHECK(rows[2].structural_zero);   // beyond the explicit support entirely
    CHECK(rows[2].sup_diff <= 1e-9);
}

TEST_CASE("gronwall stability") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    ReactionField logistic(1, logistic_reaction(1.0, {-2.0, 2.0}));
    FlatFunction p0 = FlatFunction::constant(g, 0.5);
    MildOptions o;
    o.tol = 1e-8;

    FlatFunction zero_delta(g, 1);
    GronwallReport same = gronwall_stability_check(L, logistic, p0, zero_delta, 0.5, o);
    CHECK(same.bound_holds);
    for (double d : same.differences) CHECK(d == 0.0);

    FlatFunction delta(g, 1);
    delta.set_value(VertexId::core(0), 0, 1e-3);
    GronwallReport report = gronwall_stability_check(L, logistic, p0, delta, 1.0, o);
    CHECK(report.bound_holds);
    CHECK(report.max_ratio <= 1.0);

    ReactionField zero(1, zero_reaction());
    GronwallReport linear = gronwall_stability_check(L, zero, p0, delta, 1.0, o);
    CHECK(linear.bound_holds);
    for (size_t i = 0; i < linear.differences.size(); ++i)
        CHECK(linear.differences[i] <= 1e-3 * (1.0 + 1e-3) + 1e-12);
}

TEST_CASE("semilinear experiment: zero reaction reproduces the linear rows") {
    auto ray = unit_ray();
    Laplacian base(Weighting::base(ray));
    WeightPlan plan = finite_volume_weights(*ray, 0.5, 0.5);
    FlatFunction f = FlatFunction::step(ray, 0, 2, 1.0, 0.0);
    ConvergenceSetup setup;
    setup.t_grid = {0.0, 0.5};
    setup.n_list = {4};
    setup.window_radius = 6;
    setup.tol = 1e-8;

    auto linear = linear_convergence_experiment(base, plan, BoundarySet{0}, f, setup);
    ReactionField zero(1, zero_reaction());
    auto semi = semilinear_convergence_experiment(base, plan, BoundarySet{0}, zero, f,
                                                  setup, 1e-8);
    REQUIRE(linear.size() == semi.size());
    for (size_t i = 0; i < linear.size(); ++i) {
        CHECK(semi[i].n == linear[i].n);
        CHECK(semi[i].sup_diff == linear[i].sup_diff);  // delegated, bit-identical
    }
}

#include <doctest.h>

#include <cmath>

#include "netflat/errors.hpp"
#include "netflat/propagator.hpp"
#include "support.hpp"

using namespace netflat;
using namespace netflat::testing;

namespace {
const double kHalfLife = (1.0 - std::exp(-1.0)) / 2.0;  // K2 kernel at t = 0.5
}

TEST_CASE("propagate: identity, constants, K2 closed form") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    FlatFunction f(g, 1);
    f.set_value(VertexId::core(0), 0, 1.0);

    Propagated id = propagate(L, f, 0.0, {1e-10});
    CHECK(id.value.sup_diff(f) == 0.0);
    CHECK(id.error_bound == 0.0);

    auto ray = unit_ray();
    Laplacian Lr(Weighting::base(ray));
    FlatFunction one = FlatFunction::constant(ray, 1.0);
    for (double t : {0.1, 1.0, 10.0}) {
        Propagated out = propagate(Lr, one, t, {1e-8});
        CHECK(out.value.sup_diff(one) <= 1e-8);
    }

    // Eigenvalues {0, 2}: S(t)(1,0) = ((1+e^{-2t})/2, (1-e^{-2t})/2).
    Propagated out = propagate(L, f, 0.5, {1e-10});
    CHECK(out.value.value(VertexId::core(0)) ==
          doctest::Approx((1.0 + std::exp(-1.0)) / 2.0).epsilon(1e-9));
    CHECK(out.value.value(VertexId::core(1)) == doctest::Approx(kHalfLife).epsilon(1e-9));
}

TEST_CASE("series plan explosion raises a resource error") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    FlatFunction f = FlatFunction::constant(g, 1.0);
    PropagateOptions o;
    o.tol = 1e-12;
    o.work_cap = 3;
    CHECK_THROWS_AS((void)propagate(L, f, 50.0, o), Error);
}

TEST_CASE("heat kernel") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    CHECK(heat_kernel(L, {0.0, VertexId::core(0), VertexId::core(0), 1e-10}) == 1.0);
    CHECK(heat_kernel(L, {0.0, VertexId::core(0), VertexId::core(1), 1e-10}) == 0.0);
    CHECK(heat_kernel(L, {0.5, VertexId::core(0), VertexId::core(1), 1e-10}) ==
          doctest::Approx(kHalfLife).epsilon(1e-9));

    // Self-adjointness under the mu pairing makes the kernel symmetric.
    auto fx = fixture10();
    Laplacian Lf(Weighting::base(fx));
    VertexId u = VertexId::core(1), v = VertexId::core(4);
    double suv = heat_kernel(Lf, {0.7, u, v, 1e-10});
    double svu = heat_kernel(Lf, {0.7, v, u, 1e-10});
    CHECK(suv == doctest::Approx(svu).epsilon(1e-8));

    // Distant values sit below the decay bound.
    auto ray = unit_ray();
    Laplacian Lr(Weighting::base(ray));
    double far = heat_kernel(Lr, {0.1, ray_depth(10), ray_depth(0), 1e-12});
    CHECK(std::abs(far) <= decay_bound(Lr, 0.1, 10, 1.0) + 1e-12);
}

TEST_CASE("decay bounds: frozen arithmetic") {
    auto g = k2();
    Laplacian L(Weighting::base(g));  // norm 2
    CHECK(decay_bound(L, 1.0, 0, 1.0) == doctest::Approx(std::exp(2.0)));
    CHECK(decay_bound(L, 1.0, 1, 1.0) == doctest::Approx(2.0 * std::exp(2.0)));

    auto ray = unit_ray();
    Laplacian Lr(Weighting::base(ray));  // norm 4
    CHECK(decay_bound(Lr, 0.1, 10, 1.0) == doctest::Approx(4.311e-11).epsilon(1e-3));
    CHECK(decay_bound(Lr, 0.1, 10, 1.0) <=
          decay_bound_stirling(Lr, 0.1, 10, 1.0) * (1.0 + 1e-12));
}

TEST_CASE("mass") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    FlatFunction d = FlatFunction::delta(g, VertexId::core(1), L.mu(VertexId::core(1)));
    CHECK(mass(L, d)[0] == doctest::Approx(1.0));

    FlatFunction f(g, 1);
    f.set_value(VertexId::core(0), 0, 1.0);
    CHECK(mass(L, f)[0] == doctest::Approx(1.0));
    FlatFunction out = propagate(L, f, 0.8, {1e-10}).value;
    CHECK(mass(L, out)[0] == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(mass(L, FlatFunction(g, 1))[0] == 0.0);
}

TEST_CASE("locality: no deviation beyond the certified reach") {
    auto ray = unit_ray();
    Laplacian L(Weighting::base(ray));
    FlatFunction f = FlatFunction::step(ray, 0, 2, 1.0, 0.25);
    Propagated out = propagate(L, f, 0.5, {1e-8});
    int reach = out.plan.substeps * out.plan.order;
    CHECK(out.value.horizon(0) <= f.horizon(0) + reach);
    CHECK(out.value.value(ray_depth(f.horizon(0) + reach + 5)) == 0.25);
}

#include <doctest.h>

#include <cmath>
#include <limits>

#include "netflat/errors.hpp"
#include "netflat/flat.hpp"
#include "support.hpp"

using namespace netflat;
using namespace netflat::testing;

TEST_CASE("evaluate: constants, deltas, horizon rule") {
    auto ray = unit_ray();
    FlatFunction one = FlatFunction::constant(ray, 1.0);
    CHECK(one.value(ray_depth(123)) == 1.0);

    auto g = k2();
    FlatFunction d = FlatFunction::delta(g, VertexId::core(0), 1.0);
    CHECK(d.value(VertexId::core(0)) == 1.0);
    CHECK(d.value(VertexId::core(1)) == 0.0);

    FlatFunction f(ray, 1);
    f.set_value(ray_depth(0), 0, 2.0);
    f.set_value(ray_depth(1), 0, 3.0);
    f.set_tail_constant(0, {5.0});
    CHECK(f.value(ray_depth(9)) == 5.0);
    CHECK(f.value(ray_depth(1)) == 3.0);
}

TEST_CASE("jump edges: frozen cases and an enumeration oracle") {
    auto ray = unit_ray();
    CHECK(FlatFunction::constant(ray, 3.14).jump_edges().empty());

    auto g = k2();
    FlatFunction d = FlatFunction::delta(g, VertexId::core(0), 1.0);
    auto jumps = d.jump_edges();
    REQUIRE(jumps.size() == 1);
    CHECK(jumps[0].kind == EdgeRef::Kind::Core);

    FlatFunction step = FlatFunction::step(ray, 0, 2, 1.0, 0.0);
    auto sj = step.jump_edges();
    REQUIRE(sj.size() == 1);
    auto [u, v] = ray->edge_endpoints(sj[0]);
    CHECK(u == ray_depth(2));
    CHECK(v == ray_depth(3));

    // Oracle: scan every edge incident to a radius-10 ball.
    std::set<EdgeRef> expected;
    FiniteSubgraph scan = ray->ball(ray->root(), 10);
    for (const VertexId& w : scan.vertices())
        for (const IncidentEdge& ie : ray->incident_edges(w))
            if (step.value(w) != step.value(ie.other)) expected.insert(ie.edge);
    CHECK(expected == std::set<EdgeRef>(sj.begin(), sj.end()));
}

TEST_CASE("lp norms") {
    auto ray = unit_ray();
    VertexWeights mu = VertexWeights::base(*ray);
    double inf = std::numeric_limits<double>::infinity();

    FlatFunction one = FlatFunction::constant(ray, 1.0);
    CHECK(one.lp_norm(inf, mu).value == 1.0);
    CHECK(!one.lp_norm(1.0, mu).finite);  // divergent mu series

    auto g = k2();
    FlatFunction d = FlatFunction::delta(g, VertexId::core(0), 1.0);
    CHECK(d.lp_norm(1.0, VertexWeights::base(*g)).value == doctest::Approx(1.0));

    FlatFunction step = FlatFunction::step(ray, 0, 2, 1.0, 0.0);
    CHECK(step.lp_norm(2.0, mu).value == doctest::Approx(std::sqrt(3.0)));

    // Summable weights make constants integrable.
    auto geo = geometric_ray();
    WeightPlan plan = finite_volume_weights(*geo, 0.5, 0.5);
    FlatFunction c = FlatFunction::constant(geo, 1.0);
    NormValue n1 = c.lp_norm(1.0, plan.mu);
    CHECK(n1.finite);
    CHECK(n1.value == doctest::Approx(plan.volume));
}

TEST_CASE("algebra: identities and a pointwise oracle") {
    auto ray = unit_ray();
    FlatFunction f = FlatFunction::step(ray, 0, 2, 1.0, 0.0);
    FlatFunction zero(ray, 1);
    CHECK(f.add(zero).sup_diff(f) == 0.0);
    CHECK(FlatFunction::constant(ray, 1.0).mul(f).sup_diff(f) == 0.0);

    FlatFunction g = FlatFunction::step(ray, 0, 4, 1.0, 0.0);
    FlatFunction sum = f.add(g);
    for (int d = 0; d <= 2; ++d) CHECK(sum.value(ray_depth(d)) == 2.0);
    CHECK(sum.value(ray_depth(3)) == 1.0);
    CHECK(sum.value(ray_depth(4)) == 1.0);
    CHECK(sum.value(ray_depth(5)) == 0.0);
    sum.check_invariants();

    auto h = k2();
    FlatFunction a = FlatFunction::constant(ray, 2.0);
    FlatFunction b = FlatFunction::constant(h, 2.0);
    CHECK_THROWS_AS((void)a.add(b), Error);
}

TEST_CASE("separation functions") {
    auto g2 = spider(2);
    FlatFunction s = separation_function(g2, BoundarySet{0}, BoundarySet{1}, 1);
    CHECK(s.value(VertexId::in_tail(0, 1, 0)) == 1.0);
    CHECK(s.value(VertexId::in_tail(0, 5, 0)) == 1.0);
    CHECK(s.value(VertexId::in_tail(1, 1, 0)) == 0.0);
    for (double x : s.range_values()) CHECK((x == 0.0 || x == 1.0));
    CHECK(s.jump_edges().size() < 8);
    CHECK(s.vanishes_on(BoundarySet{1}));

    CHECK_THROWS_AS(
        (void)separation_function(g2, BoundarySet::all_tails(*g2), BoundarySet{}, 1),
        Error);

    auto g3 = spider(3);
    FlatFunction t = separation_function(g3, BoundarySet{0, 2}, BoundarySet{1}, 2);
    CHECK(t.value(VertexId::in_tail(0, 3, 0)) == 1.0);
    CHECK(t.value(VertexId::in_tail(2, 3, 0)) == 1.0);
    CHECK(t.value(VertexId::in_tail(1, 3, 0)) == 0.0);
    CHECK(t.vanishes_on(BoundarySet{1}));
    CHECK(!t.jump_edges().empty());
    CHECK(t.jump_edges().size() < 12);
}

TEST_CASE("vanishes_on") {
    auto g = spider(2);
    FlatFunction zero(g, 1);
    CHECK(zero.vanishes_on(BoundarySet::all_tails(*g)));
    CHECK(!FlatFunction::constant(g, 1.0).vanishes_on(BoundarySet{0}));
}

TEST_CASE("compact trims exactly-constant layers only") {
    auto ray = unit_ray();
    FlatFunction f(ray, 1);
    f.set_tail_constant(0, {2.0});
    f.ensure_horizon(0, 6);
    f.set_value(ray_depth(1), 0, 7.0);
    CHECK(f.horizon(0) == 6);
    f.compact();
    CHECK(f.horizon(0) == 2);
    CHECK(f.value(ray_depth(1)) == 7.0);
    CHECK(f.value(ray_depth(2)) == 2.0);
}

TEST_CASE("clamp_horizon folds deep layers into the constant") {
    auto ray = unit_ray();
    FlatFunction f = FlatFunction::step(ray, 0, 5, 1.0, 0.0);
    f.clamp_horizon(0, 3);
    CHECK(f.horizon(0) == 3);
    CHECK(f.value(ray_depth(2)) == 1.0);
    CHECK(f.value(ray_depth(4)) == 0.0);  // folded
}

#include <doctest.h>

#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "netflat/errors.hpp"
#include "netflat/weights.hpp"
#include "support.hpp"

using namespace netflat;
using namespace netflat::testing;

TEST_CASE("neighbors with exact conductances") {
    auto g = k2();
    auto n = g->incident_edges(VertexId::core(0));
    REQUIRE(n.size() == 1);
    CHECK(n[0].other == VertexId::core(1));
    CHECK(n[0].R == 1.0);
    CHECK(n[0].C == 1.0);

    auto ray = unit_ray();
    auto n3 = ray->incident_edges(ray_depth(3));
    REQUIRE(n3.size() == 2);
    CHECK(n3[0].other == ray_depth(2));
    CHECK(n3[1].other == ray_depth(4));
    CHECK(n3[0].R == 1.0);

    auto geo = geometric_ray();
    auto n1 = geo->incident_edges(ray_depth(1));
    REQUIRE(n1.size() == 2);
    CHECK(n1[0].other == ray_depth(0));
    CHECK(n1[0].R == doctest::Approx(0.5));
    CHECK(n1[0].C == doctest::Approx(2.0));
    CHECK(n1[1].other == ray_depth(2));
    CHECK(n1[1].R == doctest::Approx(0.25));
    CHECK(n1[1].C == doctest::Approx(4.0));
}

TEST_CASE("unresolvable vertex raises the invalid-vertex error") {
    auto g = k2();
    CHECK_THROWS_AS((void)g->incident_edges(VertexId::core(5)), Error);
    try {
        (void)g->incident_edges(VertexId::in_tail(0, 1, 0));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidVertex);
    }
}

TEST_CASE("geodesic distances") {
    auto ray = unit_ray();
    EdgeWeights w = EdgeWeights::base(*ray);
    CHECK(geodesic_distance(*ray, ray_depth(2), ray_depth(2), w) == 0.0);
    CHECK(geodesic_distance(*ray, ray_depth(0), ray_depth(5), w) == doctest::Approx(5.0));

    auto geo = geometric_ray();
    EdgeWeights wg = EdgeWeights::base(*geo);
    CHECK(geodesic_distance(*geo, ray_depth(0), ray_depth(3), wg) ==
          doctest::Approx(0.875));
}

TEST_CASE("distance search respects the radius cap") {
    auto ray = unit_ray();
    EdgeWeights w = EdgeWeights::base(*ray);
    try {
        (void)geodesic_distance(*ray, ray_depth(0), ray_depth(50), w, 10);
        FAIL("expected inconclusive");
    } catch (const InconclusiveDistance& e) {
        CHECK(e.lower_bound() >= 9.0);
    }
}

TEST_CASE("combinatorial distance") {
    auto g = path3();
    CHECK(g->combinatorial_distance(VertexId::core(0), VertexId::core(0)) == 0);
    CHECK(g->combinatorial_distance(VertexId::core(0), VertexId::core(2)) == 2);
    CHECK(k2()->combinatorial_distance(VertexId::core(0), VertexId::core(1)) == 1);
}

TEST_CASE("balls and cut markers") {
    auto ray = unit_ray();
    FiniteSubgraph b0 = ray->ball(ray_depth(0), 0);
    REQUIRE(b0.vertices().size() == 1);
    CHECK(b0.is_cut(0));

    FiniteSubgraph b2 = ray->ball(ray_depth(0), 2);
    REQUIRE(b2.vertices().size() == 3);
    CHECK(b2.vertices()[0] == ray_depth(0));
    CHECK(b2.vertices()[2] == ray_depth(2));
    CHECK(!b2.is_cut(0));
    CHECK(!b2.is_cut(1));
    CHECK(b2.is_cut(2));

    FiniteSubgraph full = k2()->ball(VertexId::core(0), 1);
    CHECK(full.vertices().size() == 2);
    CHECK(!full.is_cut(0));
    CHECK(!full.is_cut(1));
    CHECK(full.edges().size() == 1);
}

TEST_CASE("ball vertices match a brute-force breadth-first enumeration") {
    auto g = spider(3);
    // Independent BFS oracle.
    std::unordered_map<VertexId, int, VertexIdHash> dist;
    std::deque<VertexId> q{g->root()};
    dist[g->root()] = 0;
    int radius = 4;
    while (!q.empty()) {
        VertexId v = q.front();
        q.pop_front();
        if (dist[v] == radius) continue;
        for (const IncidentEdge& ie : g->incident_edges(v))
            if (!dist.count(ie.other)) {
                dist[ie.other] = dist[v] + 1;
                q.push_back(ie.other);
            }
    }
    FiniteSubgraph ball = g->ball(g->root(), radius);
    CHECK(ball.vertices().size() == dist.size());
    for (const auto& [v, d] : dist) CHECK(ball.contains(v));
}

TEST_CASE("volumes") {
    auto ray = unit_ray();
    CHECK(!EdgeWeights::base(*ray).total(*ray).has_value());

    auto geo = geometric_ray();
    auto vol = EdgeWeights::base(*geo).total(*geo);
    REQUIRE(vol.has_value());
    CHECK(*vol == doctest::Approx(1.0));

    auto heavy = k2_weighted(3.0);
    CHECK(*EdgeWeights::base(*heavy).total(*heavy) == doctest::Approx(3.0));
}

TEST_CASE("tail_of") {
    auto g = spider(2);
    CHECK(!g->tail_of(VertexId::core(0)).has_value());
    CHECK(*g->tail_of(VertexId::in_tail(0, 7, 0)) == 0);
    CHECK(*g->tail_of(VertexId::in_tail(1, 2, 0)) == 1);
}

TEST_CASE("graph validation rejects bad input") {
    CoreGraph bad;
    bad.labels = {"a", "b"};
    bad.mu = {1.0, -1.0};
    bad.edges = {CoreEdge{0, 1, 1.0}};
    CHECK_THROWS_AS(GraphModel::make(std::move(bad), {}, VertexId::core(0)), Error);

    CoreGraph loop;
    loop.labels = {"a"};
    loop.mu = {1.0};
    loop.edges = {CoreEdge{0, 0, 1.0}};
    CHECK_THROWS_AS(GraphModel::make(std::move(loop), {}, VertexId::core(0)), Error);

    CoreGraph disconnected;
    disconnected.labels = {"a", "b", "c", "d"};
    disconnected.mu = {1.0, 1.0, 1.0, 1.0};
    disconnected.edges = {CoreEdge{0, 1, 1.0}, CoreEdge{2, 3, 1.0}};
    CHECK_THROWS_AS(GraphModel::make(std::move(disconnected), {}, VertexId::core(0)), Error);
}

TEST_CASE("sup certificate is spot-checked") {
    TailSpec tail;
    tail.period.slots = 1;
    tail.period.inter = {TailEdgeTemplate{0, 0, 1.0}};
    tail.r_schedule = Schedule::constant(1.0);
    tail.mu_schedule = Schedule::constant(1.0);
    tail.sup_certificate = 1.0;  // true sup of 2/mu sum C is 4
    CHECK_THROWS_AS(GraphModel::make(CoreGraph{}, {tail}, VertexId::in_tail(0, 0, 0)),
                    Error);
    tail.sup_certificate = 4.0;
    CHECK_NOTHROW(GraphModel::make(CoreGraph{}, {tail}, VertexId::in_tail(0, 0, 0)));
}

TEST_CASE("labels round-trip") {
    auto g = spider(2);
    CHECK(g->label(VertexId::core(0)) == "c");
    CHECK(g->label(VertexId::in_tail(1, 3, 0)) == "t1:d3");
    CHECK(*g->find_label("t1:d3") == VertexId::in_tail(1, 3, 0));
    CHECK(*g->find_label("c") == VertexId::core(0));
    CHECK(!g->find_label("zz").has_value());
}

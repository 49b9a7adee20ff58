#include <doctest.h>

#include <cmath>

#include "netflat/errors.hpp"
#include "netflat/laplacian.hpp"
#include "support.hpp"

using namespace netflat;
using namespace netflat::testing;

TEST_CASE("apply: frozen stencils") {
    auto ray = unit_ray();
    Laplacian L(Weighting::base(ray));
    FlatFunction one = FlatFunction::constant(ray, 1.0);
    FlatFunction lone = L.apply(one);
    CHECK(lone.sup_norm() == 0.0);  // annihilates constants, exactly

    auto g = k2();
    Laplacian L2(Weighting::base(g));
    FlatFunction f(g, 1);
    f.set_value(VertexId::core(0), 0, 1.0);
    FlatFunction lf = L2.apply(f);
    CHECK(lf.value(VertexId::core(0)) == doctest::Approx(1.0));
    CHECK(lf.value(VertexId::core(1)) == doctest::Approx(-1.0));

    auto p = path3();
    Laplacian L3(Weighting::base(p));
    FlatFunction h(p, 1);
    h.set_value(VertexId::core(1), 0, 1.0);
    FlatFunction lh = L3.apply(h);
    CHECK(lh.value(VertexId::core(0)) == doctest::Approx(-1.0));
    CHECK(lh.value(VertexId::core(1)) == doctest::Approx(2.0));
    CHECK(lh.value(VertexId::core(2)) == doctest::Approx(-1.0));
}

TEST_CASE("bilinear form values") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    FlatFunction one = FlatFunction::constant(g, 1.0);
    FlatFunction d = FlatFunction::delta(g, VertexId::core(0), 1.0);
    CHECK(L.bilinear_form(one, d) == 0.0);
    CHECK(L.bilinear_form(d, d) == doctest::Approx(1.0));

    auto p = path3();
    Laplacian L3(Weighting::base(p));
    FlatFunction f(p, 1);
    f.set_value(VertexId::core(1), 0, 1.0);
    CHECK(L3.bilinear_form(f, f) == doctest::Approx(2.0));
}

TEST_CASE("operator norms") {
    CHECK(Laplacian(Weighting::base(k2())).op_norm_inf() == doctest::Approx(2.0));
    CHECK(Laplacian(Weighting::base(path3())).op_norm_inf() == doctest::Approx(4.0));
    CHECK(Laplacian(Weighting::base(unit_ray())).op_norm_inf() == doctest::Approx(4.0));
}

TEST_CASE("plan conductances grow, so the operator is unbounded") {
    auto geo = geometric_ray();
    WeightPlan plan = finite_volume_weights(*geo, 0.5, 0.5);
    Laplacian L(Weighting::plan(geo, plan));
    CHECK(!L.bounded());
    CHECK_THROWS_AS((void)L.op_norm_inf(), Error);
    CHECK_THROWS_AS((void)L.apply(FlatFunction::constant(geo, 1.0)), Error);
}

TEST_CASE("q-matrix sections") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    Eigen::MatrixXd q = L.q_matrix(g->ball(VertexId::core(0), 1));
    CHECK(q(0, 0) == 1.0);
    CHECK(q(0, 1) == -1.0);
    CHECK(q(1, 0) == -1.0);
    CHECK(q(1, 1) == 1.0);
    CHECK(q.row(0).sum() == 0.0);
    CHECK(q.row(1).sum() == 0.0);

    auto p = path3();
    Laplacian L3(Weighting::base(p));
    Eigen::MatrixXd q3 = L3.q_matrix(p->ball(VertexId::core(0), 2));
    CHECK(q3(1, 0) == -1.0);
    CHECK(q3(1, 1) == 2.0);
    CHECK(q3(1, 2) == -1.0);
    CHECK(q3.row(1).sum() == 0.0);

    // A cut vertex keeps its full diagonal, so its row does not sum to zero.
    auto ray = unit_ray();
    Laplacian Lr(Weighting::base(ray));
    FiniteSubgraph region = ray->ball(ray_depth(0), 2);
    Eigen::MatrixXd qr = Lr.q_matrix(region);
    int cut_row = region.index_of(ray_depth(2));
    CHECK(region.is_cut(cut_row));
    CHECK(qr.row(cut_row).sum() > 0.5);
    int interior = region.index_of(ray_depth(1));
    CHECK(qr.row(interior).sum() == 0.0);
}

TEST_CASE("sobolev values") {
    auto g = k2();
    Laplacian L(Weighting::base(g));
    FlatFunction zero(g, 1);
    CHECK(L.sobolev_norm(zero).value == 0.0);
    FlatFunction d = FlatFunction::delta(g, VertexId::core(0), 1.0);
    NormValue s = L.sobolev_norm(d);
    CHECK(s.finite);
    CHECK(s.value == doctest::Approx(2.0));

    auto ray = unit_ray();
    Laplacian Lr(Weighting::base(ray));
    CHECK(!Lr.sobolev_norm(FlatFunction::constant(ray, 1.0)).finite);
}

TEST_CASE("default vertex weights mu0") {
    auto g = k2();
    VertexWeights mu0 = derive_mu0(*g, EdgeWeights::base(*g));
    CHECK(mu0.core[0] == doctest::Approx(0.5));
    CHECK(mu0.core[1] == doctest::Approx(0.5));
    CHECK(*mu0.total(*g) == doctest::Approx(*EdgeWeights::base(*g).total(*g)));

    auto p = path3();
    VertexWeights mp = derive_mu0(*p, EdgeWeights::base(*p));
    CHECK(mp.core[0] == doctest::Approx(0.5));
    CHECK(mp.core[1] == doctest::Approx(1.0));
    CHECK(mp.core[2] == doctest::Approx(0.5));
    CHECK(*mp.total(*p) == doctest::Approx(2.0));

    auto geo = geometric_ray();
    VertexWeights mg = derive_mu0(*geo, EdgeWeights::base(*geo));
    CHECK(mg.tail[0][0].at(0) == doctest::Approx(0.25));
    CHECK(*mg.total(*geo) == doctest::Approx(1.0));
}

TEST_CASE("hybrid weights switch at the radius") {
    auto ray = unit_ray();
    WeightPlan plan = finite_volume_weights(*ray, 0.5, 0.5);
    Weighting h = Weighting::hybrid(ray, plan, ray->root(), 3);
    auto edge_between = [&](int d) {
        for (const IncidentEdge& ie : ray->incident_edges(ray_depth(d)))
            if (ie.other == ray_depth(d + 1)) return ie.edge;
        FAIL("edge not found");
        return EdgeRef{};
    };
    CHECK(h.edge_R(edge_between(0)) == 1.0);
    CHECK(h.edge_R(edge_between(2)) == 1.0);
    CHECK(h.edge_R(edge_between(3)) == doctest::Approx(0.5 * 0.125));
    CHECK(h.mu(ray_depth(2)) == 1.0);
    CHECK(h.mu(ray_depth(5)) == doctest::Approx(plan.mu.tail[0][0].at(5)));

    // n = 0: every tail edge leaves the radius-0 ball, so the assignment is
    // the compressed one throughout.
    Weighting h0 = Weighting::hybrid(ray, plan, ray->root(), 0);
    CHECK(h0.edge_R(edge_between(0)) == doctest::Approx(0.5));
    CHECK(h0.edge_R(edge_between(1)) == doctest::Approx(0.25));
    CHECK(h0.mu(ray_depth(0)) == 1.0);  // the root itself keeps its base weight
    CHECK(h0.mu(ray_depth(1)) == doctest::Approx(plan.mu.tail[0][0].at(1)));

    // n beyond the diameter of a finite graph keeps the base weights.
    auto g = k2();
    WeightPlan pk = finite_volume_weights(*g, 0.5, 0.25);
    Weighting hk = Weighting::hybrid(g, pk, g->root(), 5);
    CHECK(hk.edge_R(EdgeRef{EdgeRef::Kind::Core, 0, 0, 0}) == 1.0);
}

TEST_CASE("finite volume plans") {
    auto ray = unit_ray();
    WeightPlan plan = finite_volume_weights(*ray, 0.5, 0.5);
    CHECK(plan.volume == doctest::Approx(1.0));

    auto g = fixture10();
    WeightPlan copy = finite_volume_weights(*g, 0.5, 1.0, false);
    CHECK(copy.volume == doctest::Approx(*EdgeWeights::base(*g).total(*g)));

    auto s = spider(2);
    WeightPlan ps = finite_volume_weights(*s, 0.5, 1.0);
    CHECK(ps.volume == doctest::Approx(2.0 + 2.0 * 2.0));
}

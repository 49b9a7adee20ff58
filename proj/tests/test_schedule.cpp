#include <doctest.h>

#include "netflat/schedule.hpp"

using namespace netflat;

TEST_CASE("constant schedule diverges, geometric sums in closed form") {
    Schedule c = Schedule::constant(2.0);
    CHECK(c.at(7) == 2.0);
    CHECK(!c.sum_from(0).has_value());

    Schedule g = Schedule::geometric(0.5, 0.5);
    CHECK(g.at(0) == 0.5);
    CHECK(g.at(2) == doctest::Approx(0.125));
    CHECK(*g.sum_from(0) == doctest::Approx(1.0));
    CHECK(*g.sum_from(3) == doctest::Approx(0.125));

    Schedule growing = Schedule::geometric(1.0, 2.0);
    CHECK(!growing.sum_from(0).has_value());
}

TEST_CASE("table schedule repeats periodically") {
    Schedule t = Schedule::table({1.0, 2.0, 3.0});
    CHECK(t.at(0) == 1.0);
    CHECK(t.at(4) == 2.0);
    CHECK(t.period() == 3);
    CHECK(!t.sum_from(0).has_value());
}

TEST_CASE("depth rule head overrides the schedule") {
    DepthRule r({0.25}, Schedule::geometric(0.75, 0.5));
    CHECK(r.at(0) == 0.25);
    CHECK(r.at(1) == doctest::Approx(0.375));
    // sum = 0.25 + sum_{k>=1} 0.75 * 0.5^k = 0.25 + 0.75
    CHECK(*r.sum_from(0) == doctest::Approx(1.0));
    CHECK(*r.sum_from(1) == doctest::Approx(0.75));
}

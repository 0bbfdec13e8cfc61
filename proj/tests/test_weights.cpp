#include <doctest.h>

#include <cmath>
#include <numbers>

#include "indefbvp/errors.hpp"
#include "indefbvp/weights.hpp"

using namespace indefbvp;
using doctest::Approx;

TEST_CASE("sin(3 pi t) has two positivity intervals around one negativity interval") {
  const auto h = WeightFamily::sinusoid(3);
  const auto& s = h.structure();
  REQUIRE(s.m == 2);
  CHECK(s.plus_interval(1).lo == Approx(0.0));
  CHECK(s.plus_interval(1).hi == Approx(1.0 / 3).epsilon(1e-12));
  CHECK(s.plus_interval(2).lo == Approx(2.0 / 3).epsilon(1e-12));
  CHECK(s.plus_interval(2).hi == Approx(1.0));
  CHECK(s.minus_interval(1).length() == Approx(1.0 / 3).epsilon(1e-12));
  CHECK(s.minus_interval(0).length() == Approx(0.0));
  CHECK(s.minus_interval(2).length() == Approx(0.0));
}

TEST_CASE("sin(4 pi t) ends on a negativity interval") {
  const auto h = WeightFamily::sinusoid(4);
  const auto& s = h.structure();
  REQUIRE(s.m == 2);
  CHECK(s.plus_interval(2).lo == Approx(0.5).epsilon(1e-12));
  CHECK(s.plus_interval(2).hi == Approx(0.75).epsilon(1e-12));
  CHECK(s.minus_interval(2).length() == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("h3sols: parabola then negative sine arch") {
  const auto h = WeightFamily::h3sols();
  const auto& s = h.structure();
  REQUIRE(s.m == 2);
  CHECK(s.plus_interval(1).hi == Approx(0.5));
  CHECK(s.plus_interval(2).lo == Approx(0.75).epsilon(1e-12));
  CHECK(h(0.1) == Approx(0.0225));
  CHECK(h(0.6) == Approx(-std::sin(4 * std::numbers::pi * 0.6)));
  // mu only scales the negative part
  const double t = 0.6;
  CHECK(h.eval_mu(2.0, t) == Approx(-2.0 * h.minus(t)));
  CHECK(h.eval_mu(2.0, 0.1) == Approx(h.plus(0.1)));

  const auto rep = check_exactness_hypotheses(h);
  REQUIRE(rep.intervals.size() == 2);
  CHECK(rep.intervals[0].symmetric);
  CHECK_FALSE(rep.intervals[0].monotone_half);
  CHECK(rep.intervals[0].monotonicity_violation == Approx(1.0 / 16).epsilon(1e-3));
  CHECK(rep.intervals[1].symmetric);
  CHECK(rep.intervals[1].monotone_half);
  CHECK_FALSE(rep.verdict);
}

TEST_CASE("sine arches satisfy the exactness hypotheses") {
  for (int k : {2, 3, 4, 5}) {
    const auto rep = check_exactness_hypotheses(WeightFamily::sinusoid(k));
    CHECK(rep.verdict);
    CHECK(WeightFamily::sinusoid(k).properties().is_symmetric_per_plus_interval);
  }
}

TEST_CASE("reflection symmetry of the whole weight") {
  CHECK(WeightFamily::sinusoid(3).reflection_defect() < 1e-12);
  CHECK(WeightFamily::sinusoid(5).reflection_defect() < 1e-12);
  CHECK(WeightFamily::sinusoid(4).reflection_defect() > 1.0);  // antisymmetric
  CHECK(WeightFamily::moore_nehari().reflection_defect() < 1e-12);
}

TEST_CASE("nonnegative weights have one positivity interval") {
  const auto h = WeightFamily::moore_nehari();
  const auto& s = h.structure();
  CHECK(s.m == 1);
  CHECK(s.plus_interval(1).lo == 0.0);
  CHECK(s.plus_interval(1).hi == 1.0);
  CHECK_THROWS_AS(WeightFamily::constant(-1.0).structure(), NoSignChange);
}

TEST_CASE("descriptor parsing") {
  CHECK(WeightFamily::parse("sin:5").structure().m == 3);
  CHECK(WeightFamily::parse("h3sols").structure().m == 2);
  CHECK(WeightFamily::parse("moore-nehari")(0.0) == Approx(1.0));
  const auto eps = WeightFamily::parse("sin3-eps:0.1");
  CHECK(eps.structure().m == 2);
  CHECK(eps.structure().plus_interval(1).hi == Approx(0.3).epsilon(1e-10));
  CHECK(eps(0.95) == 0.0);
  const auto poly = WeightFamily::parse("poly:[(0,0.5,1),(0.5,1,-1,2)]");
  CHECK(poly(0.25) == Approx(1.0));
  CHECK(poly(0.75) == Approx(-1.0 + 2 * 0.75));
  CHECK_THROWS(WeightFamily::parse("nope"));
  CHECK_THROWS(WeightFamily::parse("sin:x"));
}

TEST_CASE("step points include breakpoints and sign changes") {
  const auto pts = WeightFamily::h3sols().step_points();
  const auto has = [&](double x) {
    for (double p : pts)
      if (std::abs(p - x) < 1e-12) return true;
    return false;
  };
  CHECK(has(0.5));
  CHECK(has(0.75));
}

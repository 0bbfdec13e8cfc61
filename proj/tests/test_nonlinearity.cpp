#include <doctest.h>

#include <cmath>

#include "indefbvp/errors.hpp"
#include "indefbvp/nonlinearity.hpp"

using namespace indefbvp;
using doctest::Approx;

TEST_CASE("power nonlinearity and its extension by zero") {
  const auto g = Nonlinearity::power(3.0);
  CHECK(g.g(2.0) == Approx(8.0));
  CHECK(g.dg(2.0) == Approx(12.0));
  CHECK(g.primitive(2.0) == Approx(4.0));
  CHECK(g.g(-1.0) == 0.0);
  CHECK(g.dg(-1.0) == 0.0);
  CHECK(g.primitive(-1.0) == 0.0);
  CHECK(g.exponent() == 3.0);
  const auto h = Nonlinearity::power(1.5);
  CHECK(h.primitive(4.0) == Approx(std::pow(4.0, 2.5) / 2.5));
}

TEST_CASE("exponents at or below one are rejected") {
  CHECK_THROWS_AS(Nonlinearity::power(1.0), InvalidExponent);
  CHECK_THROWS_AS(Nonlinearity::power(0.5), InvalidExponent);
  CHECK_THROWS(Nonlinearity::parse("power:x"));
  CHECK(Nonlinearity::parse("power:2.5").exponent() == 2.5);
}

TEST_CASE("derivative matches central differences") {
  const auto g = Nonlinearity::power(2.5);
  for (double s : {0.1, 1.0, 7.0}) {
    const double d = 1e-6 * s;
    CHECK(g.dg(s) == Approx((g.g(s + d) - g.g(s - d)) / (2 * d)).epsilon(1e-7));
  }
}

TEST_CASE("hypothesis audit") {
  const auto grid = log_grid(1e-6, 1e6, 121);
  CHECK(grid.size() == 121);
  CHECK(grid.front() == Approx(1e-6));
  CHECK(grid.back() == Approx(1e6));
  CHECK(audit_hypotheses(Nonlinearity::power(3.0), grid).all_pass());
  CHECK(audit_hypotheses(Nonlinearity::power(1.5), grid).all_pass());

  // s + s^3 is star-shaped and superlinear at infinity, but g(s)/s -> 1 at zero
  const auto lin = Nonlinearity::custom([](double s) { return s + s * s * s; },
                                        [](double s) { return 1 + 3 * s * s; },
                                        [](double s) { return s * s / 2 + s * s * s * s / 4; },
                                        "s+s^3");
  const auto a = audit_hypotheses(lin, grid);
  CHECK(a.star_shaped);
  CHECK(a.superlinear_at_infinity);
  CHECK_FALSE(a.superlinear_at_zero);
  CHECK_FALSE(a.all_pass());
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "indefbvp/ivp.hpp"

using namespace indefbvp;
using doctest::Approx;

namespace {

// g(s) = s for s > 0: the linear oscillator while u stays positive.
Nonlinearity linear() {
  return Nonlinearity::custom([](double s) { return s; }, [](double) { return 1.0; },
                              [](double s) { return s * s / 2; }, "linear");
}

const Coefficient one = [](double) { return 1.0; };

}  // namespace

TEST_CASE("sine arch of the linear oscillator") {
  IntegrateOptions opt;
  const auto tr = integrate(one, linear(), State4{0.0, 1.0, 0.0, 1.0}, 0.0, std::numbers::pi / 2, opt);
  const auto y = tr.solution.y.back();
  CHECK(y[0] == Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(y[1]) < 1e-9);
  CHECK(y[2] == Approx(1.0).epsilon(1e-9));  // w = du/dalpha = sin t
  const auto mid = tr(std::numbers::pi / 6);
  CHECK(mid[0] == Approx(0.5).epsilon(1e-8));  // dense output
}

TEST_CASE("first zero is located") {
  IntegrateOptions opt;
  opt.stop_at_zero = true;
  const auto tr = integrate(one, linear(), State4{0.0, 2.0, 0.0, 1.0}, 0.0, 10.0, opt);
  REQUIRE(tr.first_zero);
  CHECK(*tr.first_zero == Approx(std::numbers::pi).epsilon(1e-10));
  CHECK(tr.t_end() == Approx(std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("blow-up under a negative weight") {
  IntegrateOptions opt;
  const Coefficient neg = [](double) { return -100.0; };
  const auto tr = integrate(neg, Nonlinearity::power(3.0), State4{0.0, 100.0, 0.0, 1.0}, 0.0, 1.0, opt);
  CHECK(tr.blown_up);
  CHECK(tr.t_end() < 1.0);
}

TEST_CASE("step points on a jump are honoured") {
  // q jumps from 1 to 4 at t = 1/3; a sampled step point must not break integration
  IntegrateOptions opt;
  opt.step_points = {1.0 / 3, 1.0 / 3, 0.5};
  const Coefficient q = [](double t) { return t < 1.0 / 3 ? 1.0 : 4.0; };
  const auto tr = integrate(q, linear(), State4{0.0, 1.0, 0.0, 1.0}, 0.0, 0.5, opt);
  // exact: sin t up to 1/3, then continued with frequency 2
  const double t0 = 1.0 / 3;
  const double u0 = std::sin(t0), v0 = std::cos(t0);
  const double dt = 0.5 - t0;
  CHECK(tr.solution.y.back()[0] == Approx(u0 * std::cos(2 * dt) + v0 / 2 * std::sin(2 * dt)).epsilon(1e-9));
}

TEST_CASE("linearized solutions superpose") {
  IntegrateOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  const Coefficient q = [](double t) { return 10 * std::sin(3 * std::numbers::pi * t); };
  const auto g = Nonlinearity::power(3.0);
  const auto base = integrate(q, g, State4{0.0, 3.0, 0.0, 1.0}, 0.0, 1.0, opt);
  const auto z1 = solve_linearized(q, g, base, 1.0, 0.0, opt);
  const auto z2 = solve_linearized(q, g, base, 0.0, 1.0, opt);
  const auto w = solve_linearized(q, g, base, 0.7, -1.3, opt);
  for (int k = 0; k < 2; ++k)
    CHECK(w.y.back()[k] ==
          Approx(0.7 * z1.y.back()[k] - 1.3 * z2.y.back()[k]).epsilon(1e-10).scale(1.0));
  // w with w(0) = 0, w'(0) = 1 is the alpha-derivative carried by the augmented state
  CHECK(z2.y.back()[0] == Approx(base.solution.y.back()[2]).epsilon(1e-8));
}

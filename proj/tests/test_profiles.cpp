#include <doctest.h>

#include <cmath>

#include "indefbvp/errors.hpp"
#include "indefbvp/profiles.hpp"

using namespace indefbvp;
using doctest::Approx;

namespace {
const auto cubic = Nonlinearity::power(3.0);
}

TEST_CASE("sin(3 pi t): congruent arches give translated pieces") {
  const auto h = WeightFamily::sinusoid(3);
  const auto ivs = solve_limit_intervals(h, cubic);
  REQUIRE(ivs.size() == 2);
  for (const auto& iv : ivs) {
    CHECK(iv.unique);
    CHECK(iv.hypotheses_hold);
    REQUIRE(iv.pieces.size() == 1);
    CHECK(iv.pieces.front().w_end < 0.0);
  }
  const auto& p1 = ivs[0].pieces.front();
  const auto& p2 = ivs[1].pieces.front();
  CHECK(p1.alpha == Approx(p2.alpha).epsilon(1e-8));
  for (double t : {0.05, 0.1, 0.2, 0.3})
    CHECK(p1(t) == Approx(p2(t + 2.0 / 3)).epsilon(1e-7).scale(p1.sup_norm));
  // each piece is symmetric about its midpoint
  for (double t : {0.02, 0.07, 0.11})
    CHECK(p1(t) == Approx(p1(1.0 / 3 - t)).epsilon(1e-8).scale(p1.sup_norm));
}

TEST_CASE("profile enumeration counts prod(1 + k_i) - 1") {
  const auto h3 = WeightFamily::sinusoid(3);
  const auto profs3 = enumerate_profiles(h3, cubic);
  CHECK(profs3.size() == 3);
  const auto profs5 = enumerate_profiles(WeightFamily::sinusoid(5), cubic);
  CHECK(profs5.size() == 7);

  const auto h = WeightFamily::h3sols();
  const auto ivs = solve_limit_intervals(h, cubic);
  REQUIRE(ivs.size() == 2);
  CHECK(ivs[0].pieces.size() == 3);
  CHECK_FALSE(ivs[0].unique);
  CHECK(ivs[1].pieces.size() == 1);
  CHECK(expected_profile_count(ivs) == 7);
  const auto profs = enumerate_profiles(h, ivs);
  CHECK(profs.size() == 7);
  // the parabola interval is the Moore-Nehari problem rescaled: u(t) = 8 V(2t)
  CHECK(ivs[0].pieces[0].alpha == Approx(355.8086).epsilon(1e-6));
  CHECK(ivs[0].pieces[1].alpha == Approx(679.8786).epsilon(1e-6));
  CHECK(ivs[0].pieces[2].alpha == Approx(869.6103).epsilon(1e-6));
}

TEST_CASE("Moore-Nehari scaling of the h3sols first interval") {
  const auto mn = find_all_solutions(WeightFamily::moore_nehari(), cubic, 0.0);
  const auto ivs = solve_limit_intervals(WeightFamily::h3sols(), cubic);
  REQUIRE(mn.solutions.size() == 3);
  REQUIRE(ivs[0].pieces.size() == 3);
  // V'(0) = alpha_V; u'(0) = 8 * 2 * V'(0) = 16 alpha_V
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(ivs[0].pieces[k].alpha == Approx(16 * mn.solutions[k].alpha).epsilon(1e-7));
}

TEST_CASE("profiles vanish off their active pieces") {
  const auto h = WeightFamily::sinusoid(3);
  const auto profs = enumerate_profiles(h, cubic);
  for (const auto& p : profs) {
    CHECK(p(0.5) == 0.0);  // negativity interval
    CHECK(p(0.0) == 0.0);
    for (int i : {1, 2}) {
      const bool active = std::find(p.lambda_set.begin(), p.lambda_set.end(), i) != p.lambda_set.end();
      const double mid = i == 1 ? 1.0 / 6 : 5.0 / 6;
      CHECK((p(mid) > 0.0) == active);
    }
  }
  CHECK(profs.front().label(2).size() == 2);
}

TEST_CASE("solutions approach their profile as mu grows") {
  const auto h = WeightFamily::sinusoid(3);
  const auto profs = enumerate_profiles(h, cubic);
  FindOptions fo;
  fo.classify.r = profile_radius(profs);
  const auto lo = find_all_solutions(h, cubic, 1e2, fo);
  const auto hi = find_all_solutions(h, cubic, 1e3, fo);
  REQUIRE(lo.solutions.size() == 3);
  REQUIRE(hi.solutions.size() == 3);
  for (const auto& s : hi.solutions) {
    const auto [j, d_hi] = nearest_profile(s, profs);
    CHECK(profs[j].lambda_set == s.lambda_set);
    for (const auto& t : lo.solutions)
      if (t.lambda_set == s.lambda_set) CHECK(profile_distance(t, profs[j]) > d_hi);
  }
}

TEST_CASE("no positivity interval, no profile") {
  CHECK_THROWS_AS(enumerate_profiles(WeightFamily::constant(-1.0), cubic), NoSignChange);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "indefbvp/continuation.hpp"

using namespace indefbvp;
using doctest::Approx;

namespace {

const auto cubic = Nonlinearity::power(3.0);

TraceOptions stop_at(double mu_stop, double mu_start) {
  TraceOptions o;
  o.mu_stop = mu_stop;
  o.mu_max = mu_start * (1 + 1e-7) + 1e-7;
  return o;
}

double interpolate_branch(const Branch& br, double mu) {
  for (std::size_t k = 0; k + 1 < br.points.size(); ++k) {
    const auto& p = br.points[k];
    const auto& q = br.points[k + 1];
    if ((p.mu - mu) * (q.mu - mu) <= 0.0 && p.mu != q.mu)
      return p.l2_grad_norm + (mu - p.mu) / (q.mu - p.mu) * (q.l2_grad_norm - p.l2_grad_norm);
  }
  return NAN;
}

}  // namespace

TEST_CASE("mesh contains every sign change and is graded") {
  const auto h = WeightFamily::h3sols();
  const auto t = make_mesh(h, 400);
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1.0);
  for (double s : {0.5, 0.75})
    CHECK(std::any_of(t.begin(), t.end(), [s](double x) { return std::abs(x - s) < 1e-12; }));
  const auto mesh = make_mesh(WeightFamily::constant(1.0), 399);
  const double end_spacing = mesh[1] - mesh[0];
  const double mid_spacing = mesh[mesh.size() / 2 + 1] - mesh[mesh.size() / 2];
  CHECK(mid_spacing / end_spacing == Approx(4.0).epsilon(0.02));
}

TEST_CASE("branch coordinates of sin(pi t) converge at second order") {
  const auto h = WeightFamily::constant(1.0);
  std::vector<double> err_slope, err_l2;
  for (int n : {200, 400, 800}) {
    const DiscreteModel model(h, cubic, n);
    const auto d = sample_on_mesh(model, [](double t) { return std::sin(std::numbers::pi * t); }, 0.0);
    const auto c = branch_coordinates(d);
    err_slope.push_back(std::abs(c.uprime0 - std::numbers::pi));
    err_l2.push_back(std::abs(c.l2_grad_norm - std::numbers::pi / std::sqrt(2.0)));
  }
  CHECK(err_slope.back() < 1e-4);
  CHECK(err_l2.back() < 1e-4);
  CHECK(std::log2(err_slope[1] / err_slope[2]) > 1.8);
  CHECK(std::log2(err_l2[1] / err_l2[2]) > 1.8);
}

TEST_CASE("action of zero vanishes; Newton converges from the shooting solution") {
  const auto h = WeightFamily::sinusoid(3);
  const DiscreteModel model(h, cubic, 800);
  const auto zero = sample_on_mesh(model, [](double) { return 0.0; }, 8.0);
  CHECK(action(model, zero) == 0.0);

  const auto set = find_all_solutions(h, cubic, 8.0);
  REQUIRE(set.solutions.size() == 3);
  for (const auto& s : set.solutions) {
    NewtonReport rep;
    const auto d = newton_correct(model, sample_on_mesh(model, [&](double t) { return std::max(0.0, s(t)); }, 8.0),
                                  {}, nullptr, &rep);
    CHECK(rep.converged);
    const auto r = residual(model, d);
    double rmax = 0.0;
    for (double x : r) rmax = std::max(rmax, std::abs(x));
    // rounding in the second difference sets the floor: eps ||u|| / h_min^2
    double hmin = 1.0;
    for (std::size_t j = 0; j + 1 < d.nodes().size(); ++j) hmin = std::min(hmin, d.nodes()[j + 1] - d.nodes()[j]);
    CHECK(rmax <= std::max(1e-10 * (1 + d.sup_norm()), 16 * 2.2e-16 * d.sup_norm() / (hmin * hmin)));
    // discrete and shooting certificates agree in sign and roughly in size
    const double wd = discrete_w_b(model, d);
    const double ws = shooting_w_b(model, d);
    CHECK(wd * ws > 0.0);
    CHECK(wd == Approx(ws).epsilon(0.02));
    CHECK(ws == Approx(s.w_b).epsilon(0.02));
    CHECK(action(model, d) == Approx(s.action).epsilon(1e-4));
  }
}

TEST_CASE("symmetric solution: slopes at both ends are opposite") {
  const auto h = WeightFamily::sinusoid(3);
  const DiscreteModel model(h, cubic, 800);
  const auto set = find_all_solutions(h, cubic, -1.0);
  REQUIRE(set.solutions.size() == 1);
  const auto d = newton_correct(model, sample_on_mesh(model, [&](double t) { return std::max(0.0, set.solutions[0](t)); }, -1.0));
  auto rev = d;
  std::reverse(rev.values.begin(), rev.values.end());
  CHECK(branch_coordinates(d).uprime0 == Approx(branch_coordinates(rev).uprime0).epsilon(1e-8));
}

TEST_CASE("sin(3 pi t): asymmetric branches fold onto the symmetric one near mu = -0.21") {
  const auto h = WeightFamily::sinusoid(3);
  const DiscreteModel model(h, cubic, 800);
  const auto profs = enumerate_profiles(h, cubic);
  const auto brs = trace_all(model, profs, 10.0, stop_at(-3.0, 10.0));
  REQUIRE(brs.size() == 3);
  int folded = 0;
  for (const auto& br : brs) {
    CHECK(br.warnings.empty());
    if (br.folds.empty()) {
      CHECK(br.termination == "mu-stop");
      CHECK(br.end().mu == Approx(-3.0));
      continue;
    }
    ++folded;
    CHECK(br.folds.front().mu == Approx(-0.21).epsilon(0.05 / 0.21));
  }
  CHECK(folded == 2);
  const auto clusters = cluster_endpoints(brs);
  CHECK(std::any_of(clusters.begin(), clusters.end(), [](const auto& c) { return c.size() == 2; }));
  // the fold point lies on the symmetric branch
  const auto& sym = *std::find_if(brs.begin(), brs.end(), [](const Branch& b) { return b.folds.empty(); });
  for (const auto& br : brs)
    for (const auto& f : br.folds)
      CHECK(branch_coordinates(f.solution).l2_grad_norm ==
            Approx(interpolate_branch(sym, f.mu)).epsilon(1e-3));
}

TEST_CASE("sin(4 pi t): the ground-state branch has no fold down to mu = -5") {
  const auto h = WeightFamily::sinusoid(4);
  const DiscreteModel model(h, cubic, 800);
  const auto profs = enumerate_profiles(h, cubic);
  const auto brs = trace_all(model, profs, 1e6, stop_at(-5.0, 1e6));
  REQUIRE(brs.size() == 3);
  int through = 0;
  for (const auto& br : brs) {
    if (br.termination == "mu-stop") {
      ++through;
      CHECK(br.folds.empty());
      CHECK(br.end().mu == Approx(-5.0));
    } else {
      REQUIRE(br.folds.size() == 1);
      CHECK(br.folds.front().mu == Approx(1.37).epsilon(0.01));
      CHECK(br.folds.front().w_b_sign_change);  // a saddle-node: the determinant changes sign
    }
  }
  CHECK(through == 1);
}

TEST_CASE("sin(5 pi t): mirror-image branches fold at the same mu") {
  const auto h = WeightFamily::sinusoid(5);
  const DiscreteModel model(h, cubic, 800);
  const auto profs = enumerate_profiles(h, cubic);
  const auto brs = trace_all(model, profs, 1e6, stop_at(-3.0, 1e6));
  REQUIRE(brs.size() == 7);
  const auto find = [&](const std::string& label) -> const Branch& {
    return *std::find_if(brs.begin(), brs.end(), [&](const Branch& b) { return b.origin == label; });
  };
  for (auto [a, b] : {std::pair{"100", "001"}, std::pair{"110", "011"}}) {
    const auto& ba = find(a);
    const auto& bb = find(b);
    REQUIRE(ba.folds.size() == 1);
    REQUIRE(bb.folds.size() == 1);
    CHECK(std::abs(ba.folds[0].mu - bb.folds[0].mu) <=
          ba.folds[0].resolution + bb.folds[0].resolution + 1e-3 * std::abs(ba.folds[0].mu));
  }
  CHECK(find("010").termination == "mu-stop");
}

TEST_CASE("tracing is deterministic and the fold is stable under mesh doubling") {
  const auto h = WeightFamily::sinusoid(4);
  const auto profs = enumerate_profiles(h, cubic);
  const auto& prof = profs.front();
  const auto opt = stop_at(-5.0, 1e6);
  const DiscreteModel coarse(h, cubic, 800);
  const auto a = trace_from_profile(coarse, prof, 1e6, opt);
  const auto b = trace_from_profile(coarse, prof, 1e6, opt);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].mu == b.points[k].mu);
    CHECK(a.points[k].l2_grad_norm == b.points[k].l2_grad_norm);
  }
  const DiscreteModel fine(h, cubic, 1600);
  const auto c = trace_from_profile(fine, prof, 1e6, opt);
  REQUIRE(a.folds.size() == 1);
  REQUIRE(c.folds.size() == 1);
  CHECK(std::abs(a.folds[0].mu - c.folds[0].mu) <= 2 * opt.fold_tol * std::max(1.0, std::abs(c.folds[0].mu)));
}

TEST_CASE("branch points agree with shooting solutions to discretization accuracy") {
  const auto h = WeightFamily::sinusoid(3);
  const auto profs = enumerate_profiles(h, cubic);
  const DiscreteModel model(h, cubic, 1600);
  const auto br = trace_from_profile(model, profs.back(), 10.0, stop_at(-3.0, 10.0));
  REQUIRE(br.points.size() > 20);
  for (std::size_t k = 0; k < br.points.size(); k += 10) {
    const auto& pt = br.points[k];
    // refine alpha from the discrete slope by Newton on the shooting residual
    const auto p = make_problem(h, cubic, pt.mu);
    double alpha = pt.uprime0;
    for (int it = 0; it < 30; ++it) {
      const auto s = shoot(p, alpha);
      REQUIRE(s.finite());
      const double step = s.residual() / s.dudalpha_b;
      alpha -= step;
      if (std::abs(step) <= 1e-13 * alpha) break;
    }
    const auto sol = make_solution(p, nullptr, pt.mu, alpha);
    double err = 0.0;
    const auto& t = pt.solution.nodes();
    for (std::size_t j = 0; j < t.size(); ++j)
      err = std::max(err, std::abs(pt.solution.values[j] - std::max(0.0, sol(t[j]))));
    CHECK_MESSAGE(err <= 1e-5 * sol.sup_norm, "mu=" << pt.mu << " err=" << err);
  }
}

// Acceptance checks: one PASS/FAIL line per criterion with the measured values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "indefbvp/continuation.hpp"
#include "indefbvp/profiles.hpp"
#include "indefbvp/shooting.hpp"
#include "indefbvp/verify.hpp"

using namespace indefbvp;

namespace {

const auto cubic = Nonlinearity::power(3.0);

struct Outcome {
  bool passed = false;
  std::string detail;
};

TraceOptions stop_at(double mu_stop, double mu_start) {
  TraceOptions o;
  o.mu_stop = mu_stop;
  o.mu_max = mu_start * (1 + 1e-7) + 1e-7;
  return o;
}

Outcome suite_outcome(const SuiteReport& rep) {
  double worst_ratio = 0.0;
  for (const auto& c : rep.checks)
    if (c.limit > 0) worst_ratio = std::max(worst_ratio, c.measured / c.limit);
  std::ostringstream s;
  s << rep.checks.size() << " checks";
  if (const auto* f = rep.first_failure())
    s << ", first failure: " << f->name << " measured " << f->measured << " limit " << f->limit;
  else
    s << ", worst measured/limit " << worst_ratio;
  return {rep.passed(), s.str()};
}

// 1. exact counts, stable under a finer scan and a tighter integrator
Outcome exact_counts() {
  struct Case {
    const char* w;
    double mu;
    std::size_t expected;
  };
  const Case cases[] = {{"sin:3", 8, 3}, {"sin:3", 20, 3}, {"sin:3", 50, 3}, {"sin:5", 8, 7},
                        {"sin:5", 20, 7}, {"sin:4", 8, 3},  {"sin:4", 20, 3}};
  std::ostringstream s;
  bool ok = true;
  double worst_seconds = 0.0;
  for (const auto& c : cases) {
    const auto h = WeightFamily::parse(c.w);
    FindOptions base;
    FindOptions fine = base;
    fine.n_scan *= 4;
    FindOptions tight = base;
    tight.shooting.rtol /= 10;
    s << c.w << "@" << c.mu << ":";
    for (const auto* o : {&base, &fine, &tight}) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto n = find_all_solutions(h, cubic, c.mu, *o).solutions.size();
      worst_seconds = std::max(
          worst_seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      ok = ok && n == c.expected;
      s << n;
    }
    s << " ";
  }
  ok = ok && worst_seconds < 60.0;
  s << "(base/4x scan/rtol/10; slowest " << worst_seconds << " s)";
  return {ok, s.str()};
}

// 2. sin(3 pi t): branch end points cluster at mu = -0.21 +- 0.05
Outcome sin3_clustering() {
  const auto h = WeightFamily::sinusoid(3);
  const DiscreteModel model(h, cubic);
  const auto brs = trace_all(model, enumerate_profiles(h, cubic), 1e6, stop_at(-3.0, 1e6));
  std::ostringstream s;
  bool ok = false;
  for (const auto& group : cluster_endpoints(brs)) {
    if (group.size() < 2) continue;
    const double mu = brs[group.front()].end().mu;
    s << "cluster of " << group.size() << " at mu=" << mu << " ";
    // the end points of a group agree to the clustering tolerance; each must sit in the window
    bool in = true;
    for (auto i : group) in = in && std::abs(brs[i].end().mu + 0.21) <= 0.05;
    ok = ok || in;
  }
  for (const auto& b : brs)
    if (!b.folds.empty()) s << "[" << b.origin << " fold " << b.folds.front().mu << "] ";
  return {ok, s.str()};
}

// 3. Moore-Nehari weight: exactly three non-degenerate solutions
Outcome moore_nehari() {
  const auto set = find_all_solutions(WeightFamily::moore_nehari(), cubic, 0.0);
  std::ostringstream s;
  bool ok = set.solutions.size() == 3;
  s << set.solutions.size() << " solutions;";
  for (const auto& sol : set.solutions) {
    ok = ok && std::abs(sol.w_b) > sol.nondeg_tol;
    s << " |w(1)|=" << std::abs(sol.w_b) << ">" << sol.nondeg_tol;
  }
  return {ok, s.str()};
}

// 4. h3sols: seven profiles and branches; four late folds, two early, one through
Outcome seven_branches() {
  const auto h = WeightFamily::h3sols();
  const auto profs = enumerate_profiles(h, cubic);
  const DiscreteModel model(h, cubic);
  const auto brs = trace_all(model, profs, 1e6, stop_at(-1.0, 1e6));
  int late = 0, early = 0, through = 0;
  std::ostringstream s;
  for (const auto& b : brs) {
    s << b.origin << ":";
    if (!b.folds.empty()) {
      const double mu = b.folds.front().mu;
      s << "fold@" << mu << " ";
      late += mu >= 2.4e4 && mu <= 2.8e4;
      early += mu >= 0.4 && mu <= 0.8;
    } else {
      s << b.termination << "@" << b.end().mu << " ";
      through += b.termination == "mu-stop" && std::abs(b.end().mu + 1.0) < 1e-9;
    }
  }
  const bool ok = profs.size() == 7 && brs.size() == 7 && late == 4 && early == 2 && through == 1;
  std::ostringstream head;
  head << profs.size() << " profiles, " << brs.size() << " branches, late " << late << ", early "
       << early << ", through " << through << " | " << s.str();
  return {ok, head.str()};
}

// 5. distance to the matching profile decreases from mu = 1e3 to 1e4
Outcome profile_convergence() {
  const auto h = WeightFamily::sinusoid(3);
  const auto profs = enumerate_profiles(h, cubic);
  FindOptions fo;
  fo.classify.r = profile_radius(profs);
  std::map<LambdaSet, double> d3, d4;
  bool ok = true;
  std::ostringstream s;
  for (double mu : {1e3, 1e4}) {
    const auto set = find_all_solutions(h, cubic, mu, fo);
    ok = ok && set.solutions.size() == 3;
    for (const auto& sol : set.solutions) {
      const auto [j, d] = nearest_profile(sol, profs);
      ok = ok && !sol.classification_ambiguous && profs[j].lambda_set == sol.lambda_set;
      (mu == 1e3 ? d3 : d4)[sol.lambda_set] = d;
    }
  }
  ok = ok && d3.size() == 3 && d4.size() == 3;
  for (const auto& [set, d] : d3) {
    const auto it = d4.find(set);
    ok = ok && it != d4.end() && it->second < d;
    s << lambda_string(set) << ": " << d << " -> " << (it != d4.end() ? it->second : NAN) << "  ";
  }
  return {ok, s.str()};
}

// 10. action ordering at mu = 8
Outcome action_ordering() {
  const auto set = find_all_solutions(WeightFamily::sinusoid(3), cubic, 8.0);
  std::ostringstream s;
  if (set.solutions.size() != 3) return {false, "expected 3 solutions"};
  std::vector<const PositiveSolution*> asym, sym;
  for (const auto& sol : set.solutions)
    (check_symmetry(sol) <= 1e-6 * sol.sup_norm ? sym : asym).push_back(&sol);
  if (asym.size() != 2 || sym.size() != 1) return {false, "expected one symmetric solution"};
  const double a0 = asym[0]->action, a1 = asym[1]->action, as = sym[0]->action;
  const double rel = std::abs(a0 - a1) / std::abs(a0);
  s << "asymmetric " << a0 << ", " << a1 << " (rel diff " << rel << "), symmetric " << as;
  return {rel <= 1e-8 && a0 < as && a1 < as, s.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "exact counts", 7 * 3 * 60.0, exact_counts},
      {2, "sin(3 pi t) end-point clustering at mu = -0.21 +- 0.05", 300.0, sin3_clustering},
      {3, "Moore-Nehari: three non-degenerate solutions", 30.0, moore_nehari},
      {4, "h3sols: 7 profiles, 7 branches, folds 4 + 2, 1 through", 1800.0, seven_branches},
      {5, "limit-profile convergence from mu = 1e3 to 1e4", 120.0, profile_convergence},
      {6, "variational derivative vs central differences (20 cases)", 60.0,
       [] { return suite_outcome(verify_derivative(20)); }},
      {7, "sign certificates on 10 arch weights, g = u^3 and u^1.5", 60.0,
       [] { return suite_outcome(verify_moroney()); }},
      {8, "symmetry of unique solutions at mu = -5, -1", 30.0,
       [] { return suite_outcome(verify_symmetry()); }},
      {9, "first-zero scaling of the autonomous cubic", 10.0,
       [] { return suite_outcome(verify_scaling()); }},
      {10, "action ordering for sin(3 pi t) at mu = 8", 30.0, action_ordering},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.passed && secs <= c.limit_seconds;
    failures += !ok;
    std::printf("criterion %2d %s  %s  [%.2f s, limit %.0f s]  %s\n", c.id, ok ? "PASS" : "FAIL",
                c.title, secs, c.limit_seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}

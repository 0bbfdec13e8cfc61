#include "indefbvp/ivp.hpp"

#include <cmath>

namespace indefbvp {

namespace {

// Zero of the dense output of `step` in [t0, t0 + h], given u(t0) >= 0 > u(t0 + h).
double dense_root(const DenseStep<4>& step) {
  double lo = step.t0;
  double hi = step.t0 + step.h;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (step.eval(mid)[0] >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Trajectory integrate(const Coefficient& q_eff, const Nonlinearity& g, const State4& init,
                     double t0, double t1, const IntegrateOptions& opt) {
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) {
    throw std::invalid_argument("integrate needs rtol > 0 and atol > 0");
  }
  Trajectory tr;
  tr.tolerance_used = {opt.rtol, opt.atol};
  IvpOptions io;
  io.rtol = opt.rtol;
  io.atol = opt.atol;

  auto rhs = [&](double t, const State4& y, State4& dy) {
    const double q = q_eff(t);
    dy[0] = y[1];
    dy[1] = -q * g.g(y[0]);
    dy[2] = y[3];
    dy[3] = -q * g.dg(y[0]) * y[2];
  };
  auto check = [&](const State4& prev, const State4& now) {
    if (opt.stop_at_zero && prev[0] >= 0.0 && now[0] < 0.0) return StepVerdict::event;
    if (now[0] > opt.blowup_cap) return StepVerdict::stop;
    return StepVerdict::keep_going;
  };

  const auto [verdict, stats] =
      dopri5<4>(rhs, t0, init, t1, opt.step_points, io, tr.solution, check);
  tr.stats = stats;
  if (verdict == StepVerdict::stop) {
    tr.blown_up = true;
    return tr;
  }
  if (verdict != StepVerdict::event) return tr;

  // Re-step exactly onto the crossing from the last node and polish it with Newton on u(B).
  auto& sol = tr.solution;
  const std::size_t k = sol.steps.size() - 1;
  const double ts = sol.t[k];
  const State4 ys = sol.y[k];
  State4 k1;
  rhs(std::nextafter(ts, t1), ys, k1);
  double B = dense_root(sol.steps[k]);
  State4 yB{}, k7{}, err{};
  DenseStep<4> dense;
  for (int it = 0; it < 4; ++it) {
    if (B <= ts) {
      yB = ys;
      dense = DenseStep<4>{ts, 0.0, {ys, State4{}, State4{}, State4{}, State4{}}};
      break;
    }
    detail::dp5_step<4>(rhs, ts, B - ts, ys, k1, yB, k7, err, dense);
    if (std::abs(yB[0]) <= 1e-3 * opt.atol || yB[1] >= 0.0) break;
    B = std::clamp(B - yB[0] / yB[1], ts, sol.t[k + 1]);
  }
  sol.t[k + 1] = B;
  sol.y[k + 1] = yB;
  if (B > ts) {
    sol.steps[k] = dense;
  } else {
    sol.t.pop_back();
    sol.y.pop_back();
    sol.steps.pop_back();
  }
  tr.first_zero = B;
  return tr;
}

DenseSolution<2> solve_linearized(const Coefficient& q_eff, const Nonlinearity& g,
                                  const std::function<double(double)>& base, double t0, double t1,
                                  double w0, double w0p, const IntegrateOptions& opt) {
  IvpOptions io;
  io.rtol = opt.rtol;
  io.atol = opt.atol;
  auto rhs = [&](double t, const Vec<2>& y, Vec<2>& dy) {
    dy[0] = y[1];
    dy[1] = -q_eff(t) * g.dg(base(t)) * y[0];
  };
  DenseSolution<2> out;
  dopri5<2>(rhs, t0, Vec<2>{w0, w0p}, t1, opt.step_points, io, out,
            [](const Vec<2>&, const Vec<2>&) { return StepVerdict::keep_going; });
  return out;
}

DenseSolution<2> solve_linearized(const Coefficient& q_eff, const Nonlinearity& g,
                                  const Trajectory& base, double w0, double w0p,
                                  const IntegrateOptions& opt) {
  IntegrateOptions frozen = opt;
  // Each step sees a single polynomial piece of the base interpolant.
  frozen.step_points.insert(frozen.step_points.end(), base.t_nodes().begin(),
                            base.t_nodes().end());
  const auto& sol = base.solution;
  return solve_linearized(
      q_eff, g, [&sol](double t) { return sol(t)[0]; }, base.solution.t_begin(),
      base.solution.t_end(), w0, w0p, frozen);
}

}  // namespace indefbvp

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "indefbvp/errors.hpp"
#include "indefbvp/nonlinearity.hpp"

namespace indefbvp {

template <std::size_t N>
using Vec = std::array<double, N>;

/// One accepted Dormand-Prince step with its continuous extension (order 4).
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> c{};

  Vec<N> eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
    }
    return y;
  }
};

/// Node values plus piecewise dense output. Exact at nodes.
template <std::size_t N>
struct DenseSolution {
  std::vector<double> t;
  std::vector<Vec<N>> y;
  std::vector<DenseStep<N>> steps;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }

  Vec<N> operator()(double s) const {
    if (steps.empty()) return y.front();
    if (s <= t.front()) return y.front();
    if (s >= t.back()) return y.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const auto k = static_cast<std::size_t>(std::distance(t.begin(), it)) - 1;
    if (s == t[k]) return y[k];
    return steps[k].eval(s);
  }
};

struct IvpOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
};

struct IvpStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

enum class StepVerdict { keep_going, event, stop };

namespace detail {

// Dormand-Prince 5(4) tableau and Hairer's dense output weights.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Single DP5 step from (t, y) with derivative k1 already evaluated. Stage times are pulled one
// ulp inside (t, t + h) so a weight with a jump at either end is sampled on the correct side.
template <std::size_t N, class Rhs>
void dp5_step(Rhs& f, double t, double h, const Vec<N>& y, const Vec<N>& k1, Vec<N>& y_new,
              Vec<N>& k7, Vec<N>& err, DenseStep<N>& dense) {
  const double t_end = t + h;
  const double lo = std::nextafter(t, t_end);
  const double hi = std::nextafter(t_end, t);
  auto at = [&](double c) { return std::clamp(t + c * h, std::min(lo, hi), std::max(lo, hi)); };

  Vec<N> k2, k3, k4, k5, k6, tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  f(at(c2), tmp, k2);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  f(at(c3), tmp, k3);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  f(at(c4), tmp, k4);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  f(at(c5), tmp, k5);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  f(at(1.0), tmp, k6);
  for (std::size_t i = 0; i < N; ++i)
    y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  f(at(1.0), y_new, k7);
  for (std::size_t i = 0; i < N; ++i) {
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }
  dense.t0 = t;
  dense.h = h;
  for (std::size_t i = 0; i < N; ++i) {
    const double ydiff = y_new[i] - y[i];
    const double bspl = h * k1[i] - ydiff;
    dense.c[0][i] = y[i];
    dense.c[1][i] = ydiff;
    dense.c[2][i] = bspl;
    dense.c[3][i] = ydiff - h * k7[i] - bspl;
    dense.c[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
  }
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t1 (t1 > t0).
/// Every point of `step_points` inside (t0, t1) is hit exactly as a step endpoint. After each
/// accepted step `check(y_prev, y_new)` may request termination; the step is kept either way.
/// Throws StepSizeUnderflow or NonFiniteState.
template <std::size_t N, class Rhs, class Check>
std::pair<StepVerdict, IvpStats> dopri5(Rhs&& f, double t0, const Vec<N>& y0, double t1,
                                        std::span<const double> step_points,
                                        const IvpOptions& opt, DenseSolution<N>& out,
                                        Check&& check) {
  out.t.assign(1, t0);
  out.y.assign(1, y0);
  out.steps.clear();
  IvpStats stats;
  if (!(t1 > t0)) return {StepVerdict::keep_going, stats};

  std::vector<double> stops;
  for (double p : step_points)
    if (p > t0 && p < t1) stops.push_back(p);
  std::sort(stops.begin(), stops.end());
  stops.push_back(t1);
  // Coincident stops (a breakpoint that is also a sign change) would force a zero-length step.
  {
    const double gap = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max({1.0, std::abs(t0), std::abs(t1)});
    std::vector<double> kept;
    double prev = t0;
    for (double s : stops) {
      if (s - prev <= gap) {
        if (s == t1 && !kept.empty()) kept.back() = t1;
        continue;
      }
      kept.push_back(s);
      prev = s;
    }
    if (kept.empty()) kept.push_back(t1);
    stops = std::move(kept);
  }
  std::size_t next_stop = 0;

  auto scale = [&](const Vec<N>& a, const Vec<N>& b, std::size_t i) {
    return opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
  };

  double t = t0;
  Vec<N> y = y0;
  Vec<N> k1;
  auto eval_right = [&](double s, const Vec<N>& v, Vec<N>& dv) {
    f(std::nextafter(s, t1), v, dv);
  };
  eval_right(t, y, k1);
  if (!detail::all_finite(k1) || !detail::all_finite(y)) {
    throw NonFiniteState("non-finite initial state", t);
  }

  // Initial step guess (Hairer & Wanner, II.4).
  double h = 0.0;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += (y[i] / sk) * (y[i] / sk);
      d1 += (k1[i] / sk) * (k1[i] / sk);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, t1 - t0, opt.h_max});
    Vec<N> y1, k2;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * k1[i];
    f(std::nextafter(t + h, t0), y1, k2);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * std::abs(y[i]);
      d2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    d2 = std::sqrt(d2 / N) / h;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h, h1, t1 - t0, opt.h_max});
  }

  Vec<N> y_new, k7, err;
  DenseStep<N> dense;
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t iterations = 0;
  while (true) {
    if (++iterations > opt.max_steps) {
      std::ostringstream msg;
      msg << "step budget exhausted at t=" << t;
      throw StepSizeUnderflow(msg.str(), t);
    }
    const double target = stops[next_stop];
    bool hits_stop = false;
    if (t + 1.01 * h >= target) {
      h = target - t;
      hits_stop = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "step size underflow at t=" << t << " (h=" << h << ")";
      throw StepSizeUnderflow(msg.str(), t);
    }

    detail::dp5_step<N>(f, t, h, y, k1, y_new, k7, err, dense);

    double e = 0.0;
    bool finite = detail::all_finite(y_new);
    for (std::size_t i = 0; i < N && finite; ++i) {
      const double r = err[i] / scale(y, y_new, i);
      e += r * r;
    }
    e = finite ? std::sqrt(e / N) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(e)) {
      h *= 0.1;
      last_rejected = true;
      ++stats.rejected;
      continue;
    }

    if (e <= 1.0) {
      ++stats.accepted;
      const double t_new = hits_stop ? target : t + h;
      out.t.push_back(t_new);
      out.y.push_back(y_new);
      out.steps.push_back(dense);
      const StepVerdict verdict = check(y, y_new);
      // PI controller (Hairer's DOPRI5 constants).
      const double beta = 0.04;
      double fac = std::pow(e, 0.2 - 0.75 * beta) / std::pow(err_old, beta) / 0.9;
      fac = std::clamp(fac, 1.0 / 10.0, 5.0);
      double h_next = h / fac;
      if (last_rejected) h_next = std::min(h_next, h);
      err_old = std::max(e, 1e-4);
      last_rejected = false;

      const bool at_stop = hits_stop;
      t = t_new;
      y = y_new;
      if (verdict != StepVerdict::keep_going) return {verdict, stats};
      if (at_stop) {
        if (next_stop + 1 == stops.size()) return {StepVerdict::keep_going, stats};
        ++next_stop;
        eval_right(t, y, k1);  // the weight may jump here: no FSAL reuse
      } else {
        k1 = k7;
      }
      h = std::min(h_next, opt.h_max);
    } else {
      const double fac = std::clamp(std::pow(e, 0.2) / 0.9, 1.0, 10.0);
      h /= fac;
      last_rejected = true;
      ++stats.rejected;
    }
  }
}

/// Augmented state (u, u', w, w') with w = d u / d alpha.
using State4 = Vec<4>;
using Coefficient = std::function<double(double)>;

/// Dense numerical solution of the augmented shooting system.
struct Trajectory {
  DenseSolution<4> solution;
  std::optional<double> first_zero;  // B, when integration stopped at u = 0
  bool blown_up = false;             // u exceeded the blow-up cap before the end of the span
  IvpStats stats;
  std::pair<double, double> tolerance_used{0.0, 0.0};

  const std::vector<double>& t_nodes() const { return solution.t; }
  const std::vector<State4>& states() const { return solution.y; }
  State4 operator()(double t) const { return solution(t); }
  double t_end() const { return solution.t_end(); }
};

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  bool stop_at_zero = false;
  /// u above this value counts as blow-up and ends the integration.
  double blowup_cap = 1e8;
  std::vector<double> step_points;
};

/// Solve u'' = -q g(u), w'' = -q g'(u) w on [t0, t1] from `init`. When stop_at_zero is set and
/// u crosses 0 from above, the crossing is located to |u| <= atol and the trajectory ends there.
Trajectory integrate(const Coefficient& q_eff, const Nonlinearity& g, const State4& init,
                     double t0, double t1, const IntegrateOptions& opt);

/// Solve w'' + q g'(u) w = 0 along the frozen base trajectory with w(t0) = w0, w'(t0) = w0p.
DenseSolution<2> solve_linearized(const Coefficient& q_eff, const Nonlinearity& g,
                                  const Trajectory& base, double w0, double w0p,
                                  const IntegrateOptions& opt);

/// Same as above for a base solution given as an arbitrary callable t -> u(t).
DenseSolution<2> solve_linearized(const Coefficient& q_eff, const Nonlinearity& g,
                                  const std::function<double(double)>& base, double t0, double t1,
                                  double w0, double w0p, const IntegrateOptions& opt);

}  // namespace indefbvp

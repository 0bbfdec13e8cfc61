#include "indefbvp/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <exception>
#include <sstream>

#include "indefbvp/errors.hpp"

namespace indefbvp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IntegrateOptions integrate_options(const ShootingProblem& p, const ShootingOptions& opt,
                                   bool stop_at_zero) {
  IntegrateOptions io;
  io.rtol = opt.rtol;
  io.atol = opt.atol;
  io.stop_at_zero = stop_at_zero;
  io.blowup_cap = opt.blowup_cap;
  io.step_points = p.step_points;
  return io;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Max of the dense output of u on [lo, hi]: sample, then golden-section around the best sample.
double max_on(const Trajectory& u, double lo, double hi, int n = 400) {
  double best_t = lo;
  double best = u(lo)[0];
  const double dt = (hi - lo) / n;
  for (int j = 1; j <= n; ++j) {
    const double t = lo + dt * j;
    const double v = u(t)[0];
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  double x0 = std::max(lo, best_t - dt);
  double x1 = std::min(hi, best_t + dt);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = x1 - phi * (x1 - x0);
  double d = x0 + phi * (x1 - x0);
  double fc = u(c)[0];
  double fd = u(d)[0];
  for (int it = 0; it < 80 && x1 - x0 > 1e-14; ++it) {
    if (fc > fd) {
      x1 = d;
      d = c;
      fd = fc;
      c = x1 - phi * (x1 - x0);
      fc = u(c)[0];
    } else {
      x0 = c;
      c = d;
      fc = fd;
      d = x0 + phi * (x1 - x0);
      fd = u(d)[0];
    }
  }
  return std::max({best, fc, fd});
}

struct Cell {
  double lo;
  double hi;
  ShootingOutcome f_lo;
  ShootingOutcome f_hi;
  int depth;
};

// Cubic Hermite model of the residual over a cell in x = log(alpha), at x in [0, 1].
double hermite_at(const Cell& c, double x) {
  const double dx = std::log(c.hi / c.lo);
  const double d0 = c.f_lo.dudalpha_b * c.f_lo.alpha * dx;
  const double d1 = c.f_hi.dudalpha_b * c.f_hi.alpha * dx;
  const double x2 = x * x;
  const double x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * c.f_lo.u_b + (x3 - 2 * x2 + x) * d0 +
         (-2 * x3 + 3 * x2) * c.f_hi.u_b + (x3 - x2) * d1;
}

// Cubic Hermite of the residual over a cell in the variable x = log(alpha); returns the extreme
// value of the interpolant on the cell interior, signed like the endpoint residuals.
double hermite_extremum(const Cell& c) {
  const int s = sign_of(c.f_lo.u_b);
  double extreme = s * std::min(std::abs(c.f_lo.u_b), std::abs(c.f_hi.u_b));
  for (int j = 1; j < 64; ++j) {
    const double v = hermite_at(c, j / 64.0);
    if (s * v < s * extreme) extreme = v;
  }
  return extreme;
}

// True when |residual| decreases into the cell from both ends, so an unresolved root pair may
// hide inside.
bool dips_inside(const Cell& c) {
  if (!c.f_lo.finite() || !c.f_hi.finite()) return false;
  const int s = sign_of(c.f_lo.u_b);
  if (s == 0) return false;
  return s * c.f_lo.dudalpha_b < 0.0 && s * c.f_hi.dudalpha_b > 0.0;
}

// True when a Newton step from either end of a same-sign cell lands strictly inside it.
bool newton_lands_inside(const Cell& c) {
  const double width = c.hi - c.lo;
  const auto step = [](const ShootingOutcome& f) {
    return (std::isfinite(f.dudalpha_b) && f.dudalpha_b != 0.0) ? -f.u_b / f.dudalpha_b
                                                                 : std::numeric_limits<double>::quiet_NaN();
  };
  const double s0 = step(c.f_lo);
  const double s1 = step(c.f_hi);
  return (s0 > 0.0 && s0 < width) || (s1 < 0.0 && s1 > -width);
}

}  // namespace

ShootingProblem make_problem(const WeightFamily& h, const Nonlinearity& g, double mu) {
  ShootingProblem p;
  p.q = [h, mu](double t) { return h.eval_mu(mu, t); };
  p.g = g;
  p.a = h.a();
  p.b = h.b();
  p.step_points = h.step_points();
  return p;
}

ShootingProblem make_limit_problem(const WeightFamily& h, const Nonlinearity& g, double c,
                                   double d) {
  ShootingProblem p;
  p.q = [h](double t) { return h.plus(t); };
  p.g = g;
  p.a = c;
  p.b = d;
  for (double s : h.step_points())
    if (s > c && s < d) p.step_points.push_back(s);
  return p;
}

double ShootingOutcome::residual() const { return finite() ? u_b : kInf; }

ShootingOutcome shoot(const ShootingProblem& p, double alpha, const ShootingOptions& opt) {
  if (!(alpha > 0.0)) throw std::invalid_argument("shoot needs alpha > 0");
  ShootingOutcome o;
  o.alpha = alpha;
  Trajectory tr;
  try {
    tr = integrate(p.q, p.g, State4{0.0, alpha, 0.0, 1.0}, p.a, p.b,
                   integrate_options(p, opt, true));
  } catch (const Error& e) {
    o.failed = true;
    o.failure = e.what();
    if (const auto* u = dynamic_cast<const StepSizeUnderflow*>(&e)) o.t_stop = u->t_last;
    o.u_b = kInf;
    o.dudalpha_b = std::numeric_limits<double>::quiet_NaN();
    return o;
  }
  o.t_stop = tr.t_end();
  if (tr.blown_up) {
    o.blown_up = true;
    o.u_b = kInf;
    o.dudalpha_b = std::numeric_limits<double>::quiet_NaN();
    return o;
  }
  const State4 y = tr.states().back();
  if (tr.first_zero) {
    // g vanishes below zero: u and w continue as straight lines past B.
    const double B = *tr.first_zero;
    o.B = B;
    o.u_b = y[0] + y[1] * (p.b - B);
    o.dudalpha_b = y[2] + y[3] * (p.b - B);
    o.dBdalpha = -y[2] / y[1];
  } else {
    o.u_b = y[0];
    o.dudalpha_b = y[2];
  }
  return o;
}

ShootingOutcome shoot(const WeightFamily& h, const Nonlinearity& g, double mu, double alpha,
                      const ShootingOptions& opt) {
  return shoot(make_problem(h, g, mu), alpha, opt);
}

Trajectory shoot_trajectory(const ShootingProblem& p, double alpha, const ShootingOptions& opt) {
  return integrate(p.q, p.g, State4{0.0, alpha, 0.0, 1.0}, p.a, p.b,
                   integrate_options(p, opt, false));
}

std::string lambda_bits(const LambdaSet& set, int m) {
  std::string bits(static_cast<std::size_t>(m), '0');
  for (int i : set) bits[static_cast<std::size_t>(i - 1)] = '1';
  return bits;
}

std::string lambda_string(const LambdaSet& set) {
  std::ostringstream s;
  s << '{';
  for (std::size_t k = 0; k < set.size(); ++k) s << (k ? "," : "") << set[k];
  s << '}';
  return s.str();
}

RootSearch find_roots(const ShootingProblem& p, const FindOptions& opt) {
  if (opt.n_scan < 256) throw std::invalid_argument("find_roots needs n_scan >= 256");
  RootSearch out;
  auto eval = [&](double alpha) { return shoot(p, alpha, opt.shooting); };

  // Double alpha_max until the large-alpha regime is reached: u vanishes before b and the
  // residual is negative and still decreasing at two consecutive doublings. A crossing alone is
  // not enough (weights that vanish inside a positivity interval have roots beyond the first
  // crossing). Persistent blow-up also ends the expansion.
  double alpha_max = opt.alpha_max;
  int settled = 0;
  int blown = 0;
  for (int k = 0; k < opt.max_expansions; ++k) {
    const auto o = eval(alpha_max);
    if (!o.finite()) {
      settled = 0;
      if (++blown >= 6) break;
    } else {
      blown = 0;
      const bool asymptotic = o.B && *o.B < p.b && o.u_b < 0.0 && o.dudalpha_b < 0.0;
      settled = asymptotic ? settled + 1 : 0;
      if (settled >= 2) break;
    }
    alpha_max *= 2.0;
  }
  out.alpha_max_used = alpha_max;
  out.scan_alphas = log_grid(opt.alpha_max * opt.alpha_min_ratio, alpha_max, opt.n_scan);
  out.scan = opt.parallel ? sweep_parallel(p, out.scan_alphas, opt.shooting)
                          : sweep_serial(p, out.scan_alphas, opt.shooting);

  const double span = p.b - p.a;
  auto resolved = [](const Cell& c) { return c.hi - c.lo <= 1e-12 * c.hi; };

  // Safeguarded Newton inside a finite sign-change bracket; nullopt when it closes on a pole.
  auto refine = [&](const Cell& c0) -> std::optional<ShootingRoot> {
    double lo = c0.lo, hi = c0.hi;
    const int s_lo = sign_of(c0.f_lo.residual());
    ShootingOutcome best = std::abs(c0.f_lo.u_b) <= std::abs(c0.f_hi.u_b) ? c0.f_lo : c0.f_hi;
    ShootingOutcome f_lo = c0.f_lo, f_hi = c0.f_hi;
    int it = 0;
    for (; it < 200; ++it) {
      if (std::abs(best.residual()) <= opt.event_tol) break;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
      double next = 0.5 * (lo + hi);
      if (best.finite() && std::isfinite(best.dudalpha_b) && best.dudalpha_b != 0.0 && it % 4 != 3) {
        const double newton = best.alpha - best.u_b / best.dudalpha_b;
        if (newton > lo && newton < hi) next = newton;
      }
      const auto f = eval(next);
      if (sign_of(f.residual()) == s_lo) {
        lo = next;
        f_lo = f;
      } else {
        hi = next;
        f_hi = f;
      }
      const ShootingOutcome& cand = std::abs(f_lo.residual()) <= std::abs(f_hi.residual()) ? f_lo : f_hi;
      best = cand;
    }
    if (best.finite() && std::abs(best.u_b) <= opt.accept_tol) return ShootingRoot{best.alpha, best.u_b, it};
    return std::nullopt;
  };

  // Breadth-first rounds over cells. A finite cell is trusted only once the cubic Hermite model
  // of the residual predicts its midpoint; until then it is split. Midpoints of a round and the
  // bracket refinements are independent, so both go through the sweep kernels.
  auto sweep = [&](const std::vector<double>& alphas) {
    return opt.parallel ? sweep_parallel(p, alphas, opt.shooting)
                        : sweep_serial(p, alphas, opt.shooting);
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k + 1 < out.scan.size(); ++k) {
    cells.push_back({out.scan_alphas[k], out.scan_alphas[k + 1], out.scan[k], out.scan[k + 1], 0});
  }
  std::vector<Cell> brackets;
  while (!cells.empty()) {
    std::vector<Cell> probe;
    for (const Cell& c : cells) {
      const double r0 = c.f_lo.residual();
      const double r1 = c.f_hi.residual();
      if (r0 == 0.0) {
        out.roots.push_back({c.lo, 0.0, 0});
        continue;
      }
      if (r1 == 0.0) continue;  // the left end of the next cell
      const bool deep = resolved(c) || c.depth >= opt.max_subdivision_depth;
      if (c.f_lo.finite() != c.f_hi.finite()) {
        // Edge of a blow-up region: localize it so that adjacent finite windows are seen.
        if (!resolved(c)) probe.push_back(c);
      } else if (!c.f_lo.finite()) {
        if (c.depth < 12 && !resolved(c) && std::abs(c.f_lo.t_stop - c.f_hi.t_stop) > 0.02 * span)
          probe.push_back(c);
      } else if (deep) {
        if (sign_of(r0) != sign_of(r1)) brackets.push_back(c);
      } else {
        probe.push_back(c);
      }
    }
    std::vector<double> mids(probe.size());
    for (std::size_t k = 0; k < probe.size(); ++k) mids[k] = std::sqrt(probe[k].lo * probe[k].hi);
    const auto f_mids = sweep(mids);

    std::vector<Cell> next;
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const Cell& c = probe[k];
      const ShootingOutcome& fm = f_mids[k];
      bool split = true;
      if (c.f_lo.finite() && c.f_hi.finite() && fm.finite()) {
        const double r0 = c.f_lo.u_b;
        const double r1 = c.f_hi.u_b;
        const double scale = std::max({std::abs(r0), std::abs(r1), std::abs(fm.u_b)});
        const bool consistent = std::abs(fm.u_b - hermite_at(c, 0.5)) <= 0.05 * scale &&
                                (sign_of(fm.u_b) == sign_of(r0) || sign_of(fm.u_b) == sign_of(r1));
        if (consistent) {
          if (sign_of(r0) != sign_of(r1)) {
            brackets.push_back(c);
            split = false;
          } else {
            bool suspicious = newton_lands_inside(c);
            if (dips_inside(c)) {
              const double extreme = hermite_extremum(c);
              suspicious = suspicious ||
                           std::abs(extreme) < 0.5 * std::min(std::abs(r0), std::abs(r1)) ||
                           sign_of(extreme) != sign_of(r0);
            }
            split = suspicious;
          }
        }
      }
      if (!split) continue;
      next.push_back({c.lo, mids[k], c.f_lo, fm, c.depth + 1});
      next.push_back({mids[k], c.hi, fm, c.f_hi, c.depth + 1});
    }
    cells = std::move(next);
  }

  std::vector<std::optional<ShootingRoot>> refined(brackets.size());
  if (opt.parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < static_cast<long>(brackets.size()); ++k) {
      try {
        refined[static_cast<std::size_t>(k)] = refine(brackets[static_cast<std::size_t>(k)]);
      } catch (...) {
#pragma omp critical(indefbvp_refine_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::size_t k = 0; k < brackets.size(); ++k) refined[k] = refine(brackets[k]);
  }
  for (const auto& r : refined)
    if (r) out.roots.push_back(*r);

  std::sort(out.roots.begin(), out.roots.end(),
            [](const ShootingRoot& x, const ShootingRoot& y) { return x.alpha < y.alpha; });
  std::vector<ShootingRoot> unique;
  for (const auto& r : out.roots) {
    if (!unique.empty() && r.alpha - unique.back().alpha <= opt.dedup_tol * r.alpha) {
      std::ostringstream msg;
      msg << "ScanTooCoarse: brackets near alpha=" << r.alpha << " refined to the same root";
      out.warnings.push_back(msg.str());
      if (std::abs(r.residual) < std::abs(unique.back().residual)) unique.back() = r;
      continue;
    }
    unique.push_back(r);
  }
  out.roots = std::move(unique);
  return out;
}

std::vector<double> interval_maxima(const Trajectory& u, const SignStructure& s) {
  std::vector<double> maxima;
  for (int i = 1; i <= s.m; ++i) {
    const auto iv = s.plus_interval(i);
    maxima.push_back(max_on(u, iv.lo, iv.hi));
  }
  return maxima;
}

double trajectory_action(const ShootingProblem& p, const Trajectory& u) {
  static constexpr std::array<double, 5> x{-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};
  const auto& sol = u.solution;
  double total = 0.0;
  for (std::size_t k = 0; k < sol.steps.size(); ++k) {
    const double t0 = sol.t[k];
    const double t1 = sol.t[k + 1];
    const double half = 0.5 * (t1 - t0);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double t = t0 + half * (1.0 + x[j]);
      const auto y = sol.steps[k].eval(t);
      total += half * w[j] * (0.5 * y[1] * y[1] - p.q(t) * p.g.primitive(y[0]));
    }
  }
  return total;
}

std::pair<double, double> nondegeneracy_certificate(const ShootingProblem& p,
                                                    const PositiveSolution& sol,
                                                    const ShootingOptions& opt) {
  const auto w = solve_linearized(p.q, p.g, sol.trajectory, 0.0, 1.0,
                                  integrate_options(p, opt, false));
  return {w.y.back()[0], w.y.back()[1]};
}

PositiveSolution make_solution(const ShootingProblem& p, const SignStructure* structure, double mu,
                               double alpha, const ShootingOptions& opt) {
  PositiveSolution sol;
  sol.mu = mu;
  sol.alpha = alpha;
  sol.a = p.a;
  sol.b = p.b;
  sol.trajectory = shoot_trajectory(p, alpha, opt);

  double sup = 0.0;
  double min_inner = kInf;
  const int n = 4000;
  for (int j = 0; j <= n; ++j) {
    const double t = p.a + (p.b - p.a) * j / n;
    const double v = sol(t);
    sup = std::max(sup, std::abs(v));
    if (j > 0 && j < n) min_inner = std::min(min_inner, v);
  }
  for (const auto& y : sol.trajectory.states()) sup = std::max(sup, std::abs(y[0]));
  sol.sup_norm = sup;
  sol.min_interior = min_inner;
  if (structure) sol.interval_maxima = interval_maxima(sol.trajectory, *structure);

  const auto [wb, wpb] = nondegeneracy_certificate(p, sol, opt);
  sol.w_b = wb;
  sol.w_b_prime = wpb;
  sol.nondeg_tol = 1e-6 * (1.0 + std::abs(wpb) * (p.b - p.a));
  sol.action = trajectory_action(p, sol.trajectory);
  return sol;
}

LambdaSet classify(const PositiveSolution& sol, double r, double R, double margin) {
  if (!(r < R)) throw std::invalid_argument("classify needs r < R");
  LambdaSet set;
  for (std::size_t i = 0; i < sol.interval_maxima.size(); ++i) {
    const double mx = sol.interval_maxima[i];
    if (std::abs(mx - r) <= margin) {
      std::ostringstream msg;
      msg << "interval " << i + 1 << " maximum " << mx << " lies within " << margin << " of r=" << r
          << " (alpha=" << sol.alpha << ")";
      throw AmbiguousClassification(msg.str());
    }
    if (mx >= R) {
      std::ostringstream msg;
      msg << "interval " << i + 1 << " maximum " << mx << " reaches R=" << R;
      throw AmbiguousClassification(msg.str());
    }
    if (mx > r) set.push_back(static_cast<int>(i) + 1);
  }
  if (set.empty()) {
    throw AmbiguousClassification("all interval maxima are below r: only the zero solution is "
                                  "small on every positivity interval");
  }
  return set;
}

void classify_all(std::vector<PositiveSolution>& sols, double r, double R, double margin) {
  for (auto& s : sols) {
    try {
      s.lambda_set = classify(s, r, R, margin);
      s.classification_ambiguous = false;
    } catch (const AmbiguousClassification&) {
      s.lambda_set.clear();
      s.classification_ambiguous = true;
    }
  }
}

std::vector<PositiveSolution> find_all_solutions(const ShootingProblem& p, const FindOptions& opt) {
  const auto search = find_roots(p, opt);
  std::vector<PositiveSolution> sols;
  for (const auto& r : search.roots) sols.push_back(make_solution(p, nullptr, 0.0, r.alpha, opt.shooting));
  return sols;
}

SolutionSet find_all_solutions(const WeightFamily& h, const Nonlinearity& g, double mu,
                               const FindOptions& opt) {
  const auto p = make_problem(h, g, mu);
  const auto search = find_roots(p, opt);
  SolutionSet out;
  out.warnings = search.warnings;
  const SignStructure* s = h.has_structure() ? &h.structure() : nullptr;
  for (const auto& r : search.roots) {
    out.solutions.push_back(make_solution(p, s, mu, r.alpha, opt.shooting));
  }
  double max_sup = 0.0;
  for (const auto& sol : out.solutions) max_sup = std::max(max_sup, sol.sup_norm);
  out.r = opt.classify.r;
  out.R = opt.classify.R > 0.0 ? opt.classify.R : 2.0 * (1.0 + max_sup);
  if (s) classify_all(out.solutions, out.r, out.R, opt.classify.margin_factor * out.r);
  return out;
}

MoroneyCertificate moroney_sign_certificate(const ShootingProblem& p, const Trajectory& sol,
                                            double w0, double w0p, const ShootingOptions& opt) {
  if (w0 < 0.0 || w0p < 0.0 || (w0 == 0.0 && w0p == 0.0)) {
    throw std::invalid_argument("moroney certificate needs w0, w0p >= 0, not both zero");
  }
  MoroneyCertificate c;
  const auto hyp = check_arch_hypotheses(p.q, p.a, p.b);
  c.hypotheses_verified = hyp.symmetric && hyp.monotone_half;
  const auto w = solve_linearized(p.q, p.g, sol, w0, w0p, integrate_options(p, opt, false));
  c.w_end = w.y.back()[0];
  c.wp_end = w.y.back()[1];
  c.margin = -std::max(c.w_end, c.wp_end) / (w0 + w0p);
  c.passes = c.hypotheses_verified && c.w_end < 0.0 && c.wp_end < 0.0;
  return c;
}

double check_symmetry(const std::function<double(double)>& u, double a, double b, int n) {
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = a + (b - a) * j / (n - 1);
    worst = std::max(worst, std::abs(u(t) - u(a + b - t)));
  }
  return worst;
}

double check_symmetry(const PositiveSolution& sol, int n) {
  return check_symmetry([&sol](double t) { return sol(t); }, sol.a, sol.b, n);
}

std::vector<std::pair<double, double>> ratio_trace(const DenseSolution<2>& w, double floor, int n) {
  std::vector<std::pair<double, double>> out;
  const double t0 = w.t_begin();
  const double t1 = w.t_end();
  for (int j = 0; j < n; ++j) {
    const double t = t0 + (t1 - t0) * j / (n - 1);
    const auto y = w(t);
    if (std::abs(y[1]) > floor) out.emplace_back(t, y[0] / y[1]);
  }
  return out;
}

}  // namespace indefbvp

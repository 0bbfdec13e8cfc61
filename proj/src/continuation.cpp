#include "indefbvp/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include "indefbvp/errors.hpp"

namespace indefbvp {

namespace {

// LU with partial pivoting of a tridiagonal matrix (the LAPACK gttrf/gttrs scheme).
class TridiagonalLU {
 public:
  TridiagonalLU(std::vector<double> dl, std::vector<double> d, std::vector<double> du)
      : dl_(std::move(dl)), d_(std::move(d)), du_(std::move(du)) {
    const std::size_t n = d_.size();
    du2_.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped_.assign(n, false);
    double scale = 0.0;
    for (double v : d_) scale = std::max(scale, std::abs(v));
    for (double v : dl_) scale = std::max(scale, std::abs(v));
    for (double v : du_) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double fact = dl_[i] / d_[i];
          dl_[i] = fact;
          d_[i + 1] -= fact * du_[i];
        }
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    const double floor = 1e-300 + 1e-15 * scale;
    for (double v : d_) {
      if (std::abs(v) <= floor) throw SingularJacobian("tridiagonal Jacobian is singular");
    }
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped_[i]) std::swap(b[i], b[i + 1]);
      b[i + 1] -= dl_[i] * b[i];
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (std::size_t k = n - 2; k-- > 0;) {
      b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
    }
  }

 private:
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
};

// Interior Jacobian (unknowns u_1 .. u_{n-2}).
TridiagonalLU jacobian(const DiscreteModel& model, const DiscreteSolution& x) {
  const auto& t = model.mesh();
  const auto& g = model.nonlinearity();
  const std::size_t n = t.size();
  const std::size_t m = n - 2;
  std::vector<double> dl(m - 1), d(m), du(m - 1);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hl = t[j] - t[j - 1];
    const double hr = t[j + 1] - t[j];
    const double lower = 2.0 / ((hl + hr) * hl);
    const double upper = 2.0 / ((hl + hr) * hr);
    d[j - 1] = -lower - upper + model.q(j, x.mu) * g.dg(x.values[j]);
    if (j > 1) dl[j - 2] = lower;
    if (j + 2 < n) du[j - 1] = upper;
  }
  return TridiagonalLU(std::move(dl), std::move(d), std::move(du));
}

// d residual / d nu at interior nodes, mu = sinh(nu).
std::vector<double> nu_derivative(const DiscreteModel& model, const DiscreteSolution& x) {
  const auto& g = model.nonlinearity();
  const std::size_t n = model.size();
  const double dmu_dnu = std::cosh(std::asinh(x.mu));
  std::vector<double> r(n - 2);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    r[j - 1] = -model.minus_weight(j) * g.g(x.values[j]) * dmu_dnu;
  }
  return r;
}

// Trapezoidal L2 weights at interior nodes.
std::vector<double> l2_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size() - 2);
  for (std::size_t j = 1; j + 1 < t.size(); ++j) w[j - 1] = 0.5 * (t[j + 1] - t[j - 1]);
  return w;
}

double interior_inf_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t j = 1; j + 1 < r.size(); ++j) s = std::max(s, std::abs(r[j]));
  return s;
}

double interior_two_norm_sq(const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t j = 1; j + 1 < r.size(); ++j) s += r[j] * r[j];
  return s;
}

// A point of the continuation in (u, nu) with its arclength geometry.
struct Direction {
  std::vector<double> u;  // full-length, zero at the ends
  double nu = 0.0;
};

double arc_dot(const std::vector<double>& w, const std::vector<double>& x,
               const std::vector<double>& y, double scale) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j + 1] * y[j + 1];
  return s / (scale * scale);
}

double constraint_value(const std::vector<double>& w, const ArclengthConstraint& c,
                        const DiscreteSolution& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * c.tu[j + 1] * (x.values[j + 1] - c.u0[j + 1]);
  return s / (c.scale * c.scale) + c.tnu * (std::asinh(x.mu) - c.nu0) - c.ds;
}

// Unit tangent at x, oriented so that its arclength product with `border` is positive.
Direction tangent(const DiscreteModel& model, const DiscreteSolution& x, const Direction& border,
                  const std::vector<double>& w, double scale) {
  const auto lu = jacobian(model, x);
  std::vector<double> y = nu_derivative(model, x);
  lu.solve(y);
  double cy = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) cy += w[j] * border.u[j + 1] * y[j];
  cy /= scale * scale;
  const double denom = border.nu - cy;
  if (denom == 0.0 || !std::isfinite(denom)) throw SingularJacobian("degenerate bordered tangent");
  Direction out;
  out.nu = 1.0 / denom;
  out.u.assign(model.size(), 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) out.u[j + 1] = -y[j] * out.nu;
  const double norm = std::sqrt(arc_dot(w, out.u, out.u, scale) + out.nu * out.nu);
  for (double& v : out.u) v /= norm;
  out.nu /= norm;
  return out;
}

double arc_distance(const std::vector<double>& w, const DiscreteSolution& x,
                    const DiscreteSolution& y, double scale) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double d = x.values[j + 1] - y.values[j + 1];
    s += w[j] * d * d;
  }
  const double dnu = std::asinh(x.mu) - std::asinh(y.mu);
  return std::sqrt(s / (scale * scale) + dnu * dnu);
}

DiscreteSolution advance(const DiscreteSolution& x, const Direction& dir, double ds) {
  DiscreteSolution p = x;
  for (std::size_t j = 1; j + 1 < p.values.size(); ++j) p.values[j] += ds * dir.u[j];
  p.mu = std::sinh(std::asinh(x.mu) + ds * dir.nu);
  return p;
}

BranchPoint make_point(const DiscreteModel& model, const DiscreteSolution& x, double tangent_nu) {
  BranchPoint p;
  p.mu = x.mu;
  p.solution = x;
  const auto c = branch_coordinates(x);
  p.uprime0 = c.uprime0;
  p.l2_grad_norm = c.l2_grad_norm;
  p.action = action(model, x);
  p.w_b = shooting_w_b(model, x);
  p.w_b_discrete = discrete_w_b(model, x);
  p.tangent_nu = tangent_nu;
  return p;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

DiscreteSolution newton_correct(const DiscreteModel& model, const DiscreteSolution& d,
                                const NewtonOptions& opt, const ArclengthConstraint* constraint,
                                NewtonReport* report) {
  const auto& t = model.mesh();
  const std::size_t n = t.size();
  if (d.values.size() != n) throw std::invalid_argument("solution does not match the model mesh");
  const auto w = l2_weights(t);
  DiscreteSolution x = d;
  x.mesh = model.shared_mesh();
  x.values.front() = 0.0;
  x.values.back() = 0.0;

  auto merit = [&](const DiscreteSolution& y, std::vector<double>& r) {
    r = residual(model, y);
    double m = interior_two_norm_sq(r);
    if (constraint) {
      const double c = constraint_value(w, *constraint, y);
      m += c * c;
    }
    return std::sqrt(m);
  };

  NewtonReport rep;
  std::vector<double> r;
  double m0 = merit(x, r);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    rep.iterations = it;
    rep.residual_norm = interior_inf_norm(r);
    const double tol = opt.tol * (1.0 + x.sup_norm());
    const double cval = constraint ? constraint_value(w, *constraint, x) : 0.0;
    if (!std::isfinite(m0)) throw NewtonDiverged("non-finite residual");
    if (rep.residual_norm <= tol && std::abs(cval) <= 1e-12) {
      rep.converged = true;
      break;
    }
    if (it == opt.max_iterations) break;

    const auto lu = jacobian(model, x);
    std::vector<double> du(n - 2);
    for (std::size_t j = 0; j < n - 2; ++j) du[j] = -r[j + 1];
    lu.solve(du);
    double dnu = 0.0;
    if (constraint) {
      // Bordering: J du + R_nu dnu = -R, c.du + tnu dnu = -N.
      std::vector<double> y = nu_derivative(model, x);
      lu.solve(y);
      double ca = 0.0, cy = 0.0;
      for (std::size_t j = 0; j < n - 2; ++j) {
        const double cj = w[j] * constraint->tu[j + 1] / (constraint->scale * constraint->scale);
        ca += cj * du[j];
        cy += cj * y[j];
      }
      dnu = (-cval - ca) / (constraint->tnu - cy);
      if (!std::isfinite(dnu)) throw SingularJacobian("singular bordered system");
      for (std::size_t j = 0; j < n - 2; ++j) du[j] -= y[j] * dnu;
    }

    double step_norm = 0.0;
    for (double v : du) step_norm = std::max(step_norm, std::abs(v));
    const double nu = std::asinh(x.mu);
    double lambda = 1.0;
    bool accepted = false;
    DiscreteSolution trial = x;
    std::vector<double> r_trial;
    for (int k = 0; k <= opt.max_halvings; ++k) {
      for (std::size_t j = 0; j < n - 2; ++j) trial.values[j + 1] = x.values[j + 1] + lambda * du[j];
      trial.mu = constraint ? std::sinh(nu + lambda * dnu) : x.mu;
      const double m1 = merit(trial, r_trial);
      if (std::isfinite(m1) && m1 <= (1.0 - 1e-4 * lambda) * m0) {
        accepted = true;
        m0 = m1;
        break;
      }
      lambda *= 0.5;
    }
    const double roundoff = 1e-10 * (1.0 + x.sup_norm());
    if (!accepted) {
      // At the rounding floor of the difference quotients no step decreases the residual.
      if (step_norm <= roundoff && std::abs(dnu) <= 1e-10) {
        rep.converged = true;
        break;
      }
      std::ostringstream msg;
      msg << "no damping factor reduces the residual (iteration " << it
          << ", |R|=" << rep.residual_norm << ")";
      throw NewtonDiverged(msg.str());
    }
    x = trial;
    r = std::move(r_trial);
    if (lambda == 1.0 && step_norm <= roundoff && std::abs(dnu) <= 1e-10) {
      rep.iterations = it + 1;
      rep.residual_norm = interior_inf_norm(r);
      rep.converged = true;
      break;
    }
  }
  if (report) *report = rep;
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "Newton did not converge in " << opt.max_iterations << " iterations (|R|="
        << rep.residual_norm << ")";
    throw NewtonDiverged(msg.str());
  }
  return x;
}

Branch trace_branch(const DiscreteModel& model, const DiscreteSolution& start,
                    const TraceOptions& opt) {
  const auto& t = model.mesh();
  const auto w = l2_weights(t);
  Branch br;
  DiscreteSolution x = newton_correct(model, start, opt.newton);
  const double scale = std::max(1.0, std::sqrt(arc_dot(w, x.values, x.values, 1.0)));

  Direction border;
  border.u.assign(t.size(), 0.0);
  border.nu = -1.0;
  Direction dir = tangent(model, x, border, w, scale);
  Direction tan_dir = dir;  // exact tangent at x, the fallback predictor
  int failures_here = 0;
  br.points.push_back(make_point(model, x, dir.nu));

  double ds = opt.ds_initial;
  int easy = 0;
  bool fold_seen = false;
  int after_fold = 0;
  NewtonOptions corrector = opt.newton;
  corrector.max_iterations = opt.max_corrector_iterations;
  br.termination = "max-steps";

  for (int step = 0; step < opt.max_steps; ++step) {
    // Secant predictor; after a failure at this point, the exact tangent (the secant can be far
    // off just past a sharp turn).
    const Direction& pred = failures_here == 0 ? dir : tan_dir;
    ArclengthConstraint c{pred.u, pred.nu, x.values, std::asinh(x.mu), ds, scale};
    const DiscreteSolution predicted = advance(x, pred, ds);
    NewtonReport rep;
    DiscreteSolution y;
    bool ok = true;
    bool positivity_failed = false;
    try {
      y = newton_correct(model, predicted, corrector, &c, &rep);
      ok = arc_distance(w, y, predicted, scale) <= 0.5 * ds && std::isfinite(y.mu);
      if (ok && y.min_value() < -opt.pos_tol * y.sup_norm()) {
        ok = false;
        positivity_failed = true;
      }
      if (ok && y.sup_norm() <= 1e-12) ok = false;  // collapsed onto the trivial branch
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      ds *= 0.5;
      easy = 0;
      ++failures_here;
      if (ds < opt.ds_min) {
        br.termination = positivity_failed ? "positivity" : "step-underflow";
        std::ostringstream msg;
        msg << "StepUnderflow: arclength step below " << opt.ds_min << " at mu=" << x.mu;
        if (!positivity_failed) br.warnings.push_back(msg.str());
        break;
      }
      continue;
    }

    // Secant direction for the next predictor; exact tangent for fold bookkeeping.
    const double dist = arc_distance(w, y, x, scale);
    Direction secant;
    secant.u.assign(t.size(), 0.0);
    for (std::size_t j = 1; j + 1 < t.size(); ++j) secant.u[j] = (y.values[j] - x.values[j]) / dist;
    secant.nu = (std::asinh(y.mu) - std::asinh(x.mu)) / dist;
    Direction tan_new = secant;
    try {
      tan_new = tangent(model, y, secant, w, scale);
    } catch (const Error&) {
    }
    const double tan_nu = tan_new.nu;

    if (y.mu < opt.mu_stop) {
      // Land exactly on mu_stop from the chord between the last two points.
      const double s = (x.mu - opt.mu_stop) / (x.mu - y.mu);
      DiscreteSolution guess = x;
      for (std::size_t j = 0; j < guess.values.size(); ++j)
        guess.values[j] = (1.0 - s) * x.values[j] + s * y.values[j];
      guess.mu = opt.mu_stop;
      try {
        br.points.push_back(make_point(model, newton_correct(model, guess, opt.newton), tan_nu));
      } catch (const Error&) {
        br.points.push_back(make_point(model, y, tan_nu));
      }
      br.termination = "mu-stop";
      break;
    }
    if (y.mu > opt.mu_max) {
      br.termination = "mu-max";
      break;
    }
    br.points.push_back(make_point(model, y, tan_nu));
    if (sign_of(tan_nu) != sign_of(br.points[br.points.size() - 2].tangent_nu)) fold_seen = true;
    x = std::move(y);
    dir = std::move(secant);
    tan_dir = std::move(tan_new);
    failures_here = 0;
    if (fold_seen && opt.stop_after_fold && ++after_fold >= opt.steps_after_fold) {
      br.termination = "fold";
      break;
    }
    if (rep.iterations <= 3) {
      if (++easy >= opt.easy_before_grow) {
        ds = std::min(ds * opt.grow, opt.ds_max);
        easy = 0;
      }
    } else {
      easy = 0;
    }
  }
  br.folds = detect_folds(model, br, opt);
  if (br.termination == "fold" && !br.folds.empty()) {
    // The points past the fold retrace a partner branch; close the branch at the fold itself.
    const auto& f = br.folds.front();
    br.points.resize(f.index + 1);
    br.points.push_back(make_point(model, f.solution, 0.0));
    br.folds.resize(1);
  }
  return br;
}

std::vector<FoldPoint> detect_folds(const DiscreteModel& model, const Branch& branch,
                                    const TraceOptions& opt) {
  std::vector<FoldPoint> folds;
  const auto& pts = branch.points;
  if (pts.size() < 3) return folds;
  const auto& t = model.mesh();
  const auto w = l2_weights(t);
  const double scale =
      std::max(1.0, std::sqrt(arc_dot(w, pts.front().solution.values, pts.front().solution.values, 1.0)));
  NewtonOptions corrector = opt.newton;
  corrector.max_iterations = 30;

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const int s0 = sign_of(pts[i].tangent_nu);
    if (s0 == sign_of(pts[i + 1].tangent_nu) || s0 == 0) continue;
    const DiscreteSolution& x0 = pts[i].solution;
    const DiscreteSolution& x1 = pts[i + 1].solution;
    const double dist = arc_distance(w, x1, x0, scale);
    Direction sec;
    sec.u.assign(t.size(), 0.0);
    for (std::size_t j = 1; j + 1 < t.size(); ++j) sec.u[j] = (x1.values[j] - x0.values[j]) / dist;
    sec.nu = (std::asinh(x1.mu) - std::asinh(x0.mu)) / dist;

    double lo = 0.0, hi = dist;
    DiscreteSolution sol_lo = x0, sol_hi = x1;
    for (int it = 0; it < 60; ++it) {
      const double width = std::abs(sol_hi.mu - sol_lo.mu);
      if (width <= opt.fold_tol * std::max(1.0, std::abs(sol_lo.mu))) break;
      const double s = 0.5 * (lo + hi);
      ArclengthConstraint c{sec.u, sec.nu, x0.values, std::asinh(x0.mu), s, scale};
      DiscreteSolution y;
      double tan_nu = 0.0;
      try {
        y = newton_correct(model, advance(x0, sec, s), corrector, &c);
        tan_nu = tangent(model, y, sec, w, scale).nu;
      } catch (const Error&) {
        break;
      }
      if (sign_of(tan_nu) == s0) {
        lo = s;
        sol_lo = std::move(y);
      } else {
        hi = s;
        sol_hi = std::move(y);
      }
    }
    FoldPoint f;
    // The extreme mu of the bracket is the best estimate of the turning value.
    const bool lo_extreme = (s0 > 0) == (sol_lo.mu > sol_hi.mu);
    f.solution = lo_extreme ? sol_lo : sol_hi;
    f.mu = f.solution.mu;
    f.resolution = std::abs(sol_hi.mu - sol_lo.mu);
    f.index = i;
    f.w_b_sign_change = sign_of(discrete_w_b(model, sol_lo)) != sign_of(discrete_w_b(model, sol_hi));
    folds.push_back(std::move(f));
  }
  return folds;
}

Branch trace_from_profile(const DiscreteModel& model, const LimitProfile& prof, double mu_start,
                          const TraceOptions& opt) {
  auto start = sample_on_mesh(model, [&prof](double t) { return prof(t); }, mu_start);
  NewtonOptions first = opt.newton;
  first.max_iterations = std::max(first.max_iterations, 100);
  start = newton_correct(model, start, first);
  Branch br = trace_branch(model, start, opt);
  br.origin = prof.label(model.weight().structure().m);
  return br;
}

std::vector<Branch> trace_all(const DiscreteModel& model, const std::vector<LimitProfile>& profiles,
                              double mu_start, const TraceOptions& opt) {
  std::vector<Branch> out(profiles.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < static_cast<long>(profiles.size()); ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      out[i] = trace_from_profile(model, profiles[i], mu_start, opt);
    } catch (const std::exception& e) {
      out[i].origin = profiles[i].label(model.weight().structure().m);
      out[i].termination = "failed";
      out[i].warnings.push_back(e.what());
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> cluster_endpoints(const std::vector<Branch>& branches,
                                                        double tol) {
  struct Terminal {
    double mu;
    double norm;
    double resolution;
  };
  std::vector<Terminal> ends;
  for (const auto& b : branches) {
    if (!b.folds.empty()) {
      const auto& f = b.folds.back();
      ends.push_back({f.mu, branch_coordinates(f.solution).l2_grad_norm, f.resolution});
    } else if (!b.points.empty()) {
      ends.push_back({b.end().mu, b.end().l2_grad_norm, 0.0});
    } else {
      ends.push_back({std::nan(""), std::nan(""), 0.0});
    }
  }
  std::vector<std::size_t> parent(ends.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < ends.size(); ++i) {
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      const auto& p = ends[i];
      const auto& q = ends[j];
      const double mu_tol =
          std::max(tol * std::max({1.0, std::abs(p.mu), std::abs(q.mu)}), p.resolution + q.resolution);
      const double norm_tol = tol * std::max({1.0, p.norm, q.norm}) +
                              (p.resolution + q.resolution > 0.0 ? 1e-3 * std::max(p.norm, q.norm) : 0.0);
      if (std::abs(p.mu - q.mu) <= mu_tol && std::abs(p.norm - q.norm) <= norm_tol) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> slot(ends.size(), -1);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return groups;
}

}  // namespace indefbvp

#include <algorithm>
#include <cmath>
#include <numbers>

#include "indefbvp/continuation.hpp"
#include "indefbvp/ivp.hpp"

namespace indefbvp {

namespace {

constexpr double kGrading = 0.6;  // spacing ratio (1 + c) / (1 - c) = 4 between middle and ends

double left_of(double t) { return std::nextafter(t, -std::numeric_limits<double>::infinity()); }
double right_of(double t) { return std::nextafter(t, std::numeric_limits<double>::infinity()); }

}  // namespace

std::vector<double> make_mesh(const WeightFamily& h, int n_interior) {
  if (n_interior < 8) throw std::invalid_argument("mesh needs at least 8 interior nodes");
  const double a = h.a();
  const double b = h.b();
  std::vector<double> knots{a, b};
  for (double s : h.step_points())
    if (s > a && s < b) knots.push_back(s);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [&](double x, double y) { return y - x <= 1e-12 * (b - a); }),
              knots.end());
  if (knots.back() != b) knots.back() = b;

  const int cells_total = n_interior + 1;
  std::vector<double> mesh{a};
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double lo = knots[k];
    const double hi = knots[k + 1];
    const double len = hi - lo;
    const int cells = std::max(4, static_cast<int>(std::lround(cells_total * len / (b - a))));
    for (int i = 1; i < cells; ++i) {
      const double s = static_cast<double>(i) / cells;
      mesh.push_back(lo + len * (s - kGrading * std::sin(2.0 * std::numbers::pi * s) /
                                         (2.0 * std::numbers::pi)));
    }
    mesh.push_back(hi);
  }
  return mesh;
}

DiscreteModel::DiscreteModel(WeightFamily h, Nonlinearity g, std::vector<double> mesh)
    : h_(std::move(h)),
      g_(std::move(g)),
      t_(std::make_shared<const std::vector<double>>(std::move(mesh))) {
  const auto& t = *t_;
  const std::size_t n = t.size();
  if (n < 4) throw std::invalid_argument("mesh too small");
  P_.assign(n, 0.0);
  M_.assign(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hl = t[j] - t[j - 1];
    const double hr = t[j + 1] - t[j];
    const double tl = left_of(t[j]);
    const double tr = right_of(t[j]);
    P_[j] = (hl * h_.plus(tl) + hr * h_.plus(tr)) / (hl + hr);
    M_[j] = (hl * h_.minus(tl) + hr * h_.minus(tr)) / (hl + hr);
  }
}

DiscreteModel::DiscreteModel(const WeightFamily& h, const Nonlinearity& g, int n_interior)
    : DiscreteModel(h, g, make_mesh(h, n_interior)) {}

double DiscreteSolution::operator()(double t) const {
  const auto& x = *mesh;
  if (t <= x.front()) return values.front();
  if (t >= x.back()) return values.back();
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(x.begin(), it)) - 1;
  const double s = (t - x[k]) / (x[k + 1] - x[k]);
  return (1.0 - s) * values[k] + s * values[k + 1];
}

double DiscreteSolution::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

double DiscreteSolution::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

DiscreteSolution sample_on_mesh(const DiscreteModel& model, const std::function<double(double)>& u,
                                double mu) {
  DiscreteSolution d;
  d.mesh = model.shared_mesh();
  d.mu = mu;
  const auto& x = model.mesh();
  d.values.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) d.values[j] = u(x[j]);
  d.values.front() = 0.0;
  d.values.back() = 0.0;
  return d;
}

std::vector<double> residual(const DiscreteModel& model, const DiscreteSolution& d) {
  const auto& t = model.mesh();
  const auto& u = d.values;
  const auto& g = model.nonlinearity();
  const std::size_t n = t.size();
  std::vector<double> r(n);
  r[0] = u[0];
  r[n - 1] = u[n - 1];
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hl = t[j] - t[j - 1];
    const double hr = t[j + 1] - t[j];
    r[j] = 2.0 / (hl + hr) * ((u[j + 1] - u[j]) / hr - (u[j] - u[j - 1]) / hl) +
           model.q(j, d.mu) * g.g(u[j]);
  }
  return r;
}

double discrete_w_b(const DiscreteModel& model, const DiscreteSolution& d) {
  const auto& t = model.mesh();
  const auto& g = model.nonlinearity();
  const std::size_t n = t.size();
  double w_prev = 0.0;
  double w = t[1] - t[0];
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hl = t[j] - t[j - 1];
    const double hr = t[j + 1] - t[j];
    const double slope = (w - w_prev) / hl - 0.5 * (hl + hr) * model.q(j, d.mu) * g.dg(d.values[j]) * w;
    w_prev = w;
    w += hr * slope;
  }
  return w;
}

double shooting_w_b(const DiscreteModel& model, const DiscreteSolution& d) {
  const auto& h = model.weight();
  const double mu = d.mu;
  IntegrateOptions io;
  io.rtol = 1e-9;
  io.atol = 1e-12;
  io.step_points = h.step_points();
  const auto w = solve_linearized([&h, mu](double t) { return h.eval_mu(mu, t); },
                                  model.nonlinearity(), [&d](double t) { return d(t); },
                                  h.a(), h.b(), 0.0, 1.0, io);
  return w.y.back()[0];
}

double action(const DiscreteModel& model, const DiscreteSolution& d) {
  const auto& t = d.nodes();
  const auto& u = d.values;
  const auto& h = model.weight();
  const auto& g = model.nonlinearity();
  double kinetic = 0.0;
  double potential = 0.0;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double dt = t[j + 1] - t[j];
    const double du = u[j + 1] - u[j];
    kinetic += du * du / dt;
    potential += 0.5 * dt *
                 (h.eval_mu(d.mu, right_of(t[j])) * g.primitive(u[j]) +
                  h.eval_mu(d.mu, left_of(t[j + 1])) * g.primitive(u[j + 1]));
  }
  return 0.5 * kinetic - potential;
}

BranchCoordinates branch_coordinates(const DiscreteSolution& d) {
  const auto& t = d.nodes();
  const auto& u = d.values;
  BranchCoordinates c;
  const double h0 = t[1] - t[0];
  const double h1 = t[2] - t[1];
  c.uprime0 = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * u[0] + (h0 + h1) / (h0 * h1) * u[1] -
              h0 / (h1 * (h0 + h1)) * u[2];
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double du = u[j + 1] - u[j];
    s += du * du / (t[j + 1] - t[j]);
  }
  c.l2_grad_norm = std::sqrt(s);
  return c;
}

}  // namespace indefbvp

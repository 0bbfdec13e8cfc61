#include "indefbvp/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "indefbvp/errors.hpp"

namespace indefbvp {

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 1.0)) {
    std::ostringstream msg;
    msg << "power nonlinearity needs p > 1, got " << p;
    throw InvalidExponent(msg.str());
  }
  Nonlinearity n;
  if (p == 3.0) {
    n.g_ = [](double s) { return s * s * s; };
    n.dg_ = [](double s) { return 3.0 * s * s; };
    n.primitive_ = [](double s) { return 0.25 * s * s * s * s; };
  } else {
    n.g_ = [p](double s) { return std::pow(s, p); };
    n.dg_ = [p](double s) { return p * std::pow(s, p - 1.0); };
    n.primitive_ = [p](double s) { return std::pow(s, p + 1.0) / (p + 1.0); };
  }
  std::ostringstream d;
  d << "power:" << p;
  n.descriptor_ = d.str();
  n.exponent_ = p;
  return n;
}

Nonlinearity Nonlinearity::custom(std::function<double(double)> g, std::function<double(double)> dg,
                                  std::function<double(double)> primitive,
                                  std::string descriptor) {
  Nonlinearity n;
  n.g_ = std::move(g);
  n.dg_ = std::move(dg);
  n.primitive_ = std::move(primitive);
  n.descriptor_ = std::move(descriptor);
  return n;
}

Nonlinearity Nonlinearity::parse(const std::string& descriptor) {
  const auto sep = descriptor.find_first_of(": ");
  const std::string head = descriptor.substr(0, sep);
  if (head != "power" || sep == std::string::npos) {
    throw std::invalid_argument("unknown nonlinearity descriptor: '" + descriptor + "'");
  }
  std::size_t used = 0;
  const std::string arg = descriptor.substr(sep + 1);
  double p = 0.0;
  try {
    p = std::stod(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != arg.size()) {
    throw std::invalid_argument("bad exponent in nonlinearity descriptor: '" + descriptor + "'");
  }
  return power(p);
}

NonlinearityAudit audit_hypotheses(const Nonlinearity& g, const std::vector<double>& s_grid) {
  if (s_grid.size() < 2) throw std::invalid_argument("audit grid needs at least two points");
  if (!std::is_sorted(s_grid.begin(), s_grid.end()) || !(s_grid.front() > 0.0)) {
    throw std::invalid_argument("audit grid must be sorted and positive");
  }
  NonlinearityAudit r;
  r.star_margin = std::numeric_limits<double>::infinity();
  r.min_value = std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    const double margin = g.dg(s) - g.g(s) / s;
    if (margin < r.star_margin) {
      r.star_margin = margin;
      r.star_margin_at = s;
    }
    r.min_value = std::min(r.min_value, g.g(s));
  }
  const std::size_t n = s_grid.size();
  auto ratio = [&](std::size_t k) { return g.g(s_grid[k]) / s_grid[k]; };
  r.ratio_at_min = ratio(0);
  r.ratio_next_to_min = ratio(1);
  r.ratio_next_to_max = ratio(n - 2);
  r.ratio_at_max = ratio(n - 1);

  r.positive = r.min_value > 0.0 && g.g(0.0) == 0.0;
  r.star_shaped = r.star_margin > 0.0;
  // g(s)/s must be decreasing towards 0 and already well below 1 at the smallest sample.
  r.superlinear_at_zero = r.ratio_at_min < r.ratio_next_to_min && r.ratio_at_min < 0.5;
  r.superlinear_at_infinity = r.ratio_at_max > r.ratio_next_to_max && r.ratio_at_max > 2.0;
  return r;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("bad log grid");
  std::vector<double> v(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = lo * std::exp(step * k);
  v.front() = lo;
  v.back() = hi;
  return v;
}

}  // namespace indefbvp

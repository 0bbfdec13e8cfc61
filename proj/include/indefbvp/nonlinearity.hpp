#pragma once

#include <functional>
#include <string>
#include <vector>

namespace indefbvp {

/// g and g' extended by zero on (-inf, 0]. G is the primitive with G(0) = 0, used by the action.
class Nonlinearity {
 public:
  /// g(s) = s^p for s > 0. Throws InvalidExponent when p <= 1.
  static Nonlinearity power(double p);
  /// A user-supplied g. The functions are only called for s > 0.
  static Nonlinearity custom(std::function<double(double)> g, std::function<double(double)> dg,
                             std::function<double(double)> primitive, std::string descriptor);
  /// "power:<p>" (or "power <p>").
  static Nonlinearity parse(const std::string& descriptor);

  double g(double s) const { return s > 0.0 ? g_(s) : 0.0; }
  double dg(double s) const { return s > 0.0 ? dg_(s) : 0.0; }
  double primitive(double s) const { return s > 0.0 ? primitive_(s) : 0.0; }

  const std::string& descriptor() const { return descriptor_; }
  /// Exponent for power nonlinearities, 0 for custom ones.
  double exponent() const { return exponent_; }

 private:
  std::function<double(double)> g_;
  std::function<double(double)> dg_;
  std::function<double(double)> primitive_;
  std::string descriptor_;
  double exponent_ = 0.0;
};

struct NonlinearityAudit {
  // (g_s): min over the grid of g'(s) - g(s)/s, and where it is attained.
  double star_margin = 0.0;
  double star_margin_at = 0.0;
  // (g_0): g(s)/s at the two smallest grid points.
  double ratio_at_min = 0.0;
  double ratio_next_to_min = 0.0;
  // (g_inf): g(s)/s at the two largest grid points.
  double ratio_next_to_max = 0.0;
  double ratio_at_max = 0.0;
  double min_value = 0.0;  // min g(s) over the grid, for (g_+)

  bool positive = false;
  bool star_shaped = false;
  bool superlinear_at_zero = false;
  bool superlinear_at_infinity = false;
  bool all_pass() const {
    return positive && star_shaped && superlinear_at_zero && superlinear_at_infinity;
  }
};

/// Falsification-strength audit of the structural hypotheses on a sorted grid in (0, inf).
NonlinearityAudit audit_hypotheses(const Nonlinearity& g, const std::vector<double>& s_grid);

/// Log-spaced grid {lo, ..., hi} with n points.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace indefbvp

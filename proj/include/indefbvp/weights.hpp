#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace indefbvp {

/// Interleaved positivity/negativity points of a sign-changing weight on [a, b]:
///   a = tau[0] <= sigma[0] < tau[1] < ... < sigma[m-1] < tau[m] <= sigma[m] = b.
/// Positivity interval i (1-based) is [sigma[i-1], tau[i]], negativity interval i (0-based)
/// is [tau[i], sigma[i]]. Degenerate negativity intervals have zero length.
struct SignStructure {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> sigma;  // sigma_1 .. sigma_{m+1}
  std::vector<double> tau;    // tau_0 .. tau_m
  int m = 0;

  struct Interval {
    double lo;
    double hi;
    double length() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
  };

  Interval plus_interval(int i) const;   // 1 <= i <= m
  Interval minus_interval(int i) const;  // 0 <= i <= m

  /// All sigma/tau points strictly inside (a, b), sorted and deduplicated.
  std::vector<double> interior_points() const;
};

/// Result of check_exactness_hypotheses for a single positivity interval.
struct IntervalHypotheses {
  int index = 0;
  bool symmetric = false;
  bool monotone_half = false;
  double symmetry_defect = 0.0;         // max |h+(t) - h+(sigma+tau-t)|
  double monotonicity_violation = 0.0;  // largest drop of h+ below its running max on [sigma, midpoint]
};

struct ExactnessReport {
  std::vector<IntervalHypotheses> intervals;
  bool verdict = false;
};

struct WeightProperties {
  bool is_symmetric_per_plus_interval = false;
  bool is_monotone_half_per_plus_interval = false;
};

/// A piece of a piecewise weight, valid on [t0, t1). The last piece is closed on the right.
struct WeightPiece {
  double t0;
  double t1;
  std::function<double(double)> f;
};

inline constexpr double kDefaultSignTol = 1e-12;
inline constexpr int kDefaultSignSamples = 4096;

/// Detect the sign structure of `h` on [a, b]. `breakpoints` are declared jump/kink points;
/// the detector never samples across them. Throws NoSignChange when `h` has no positive part,
/// AmbiguousStructure when the sampled sign pattern cannot be resolved at `n_samples`.
/// A nonnegative weight yields m = 1 with [a, b] as its single positivity interval.
SignStructure detect_sign_structure(const std::function<double(double)>& h, double a, double b,
                                    const std::vector<double>& breakpoints,
                                    int n_samples = kDefaultSignSamples,
                                    double tol = kDefaultSignTol);

/// An evaluatable weight h on [a, b] with cached sign structure.
class WeightFamily {
 public:
  static WeightFamily sinusoid(int k, double a = 0.0, double b = 1.0);
  static WeightFamily constant(double c, double a = 0.0, double b = 1.0);
  /// Polynomial pieces; coefficients in ascending powers of t.
  static WeightFamily piecewise_polynomial(const std::vector<double>& knots,
                                           const std::vector<std::vector<double>>& coeffs);
  /// q(t) = (2t - 1)^2 on [0, 1].
  static WeightFamily moore_nehari();
  /// (t - 1/4)^2 on [0, 1/2), -sin(4 pi t) on [1/2, 1].
  static WeightFamily h3sols();
  /// sin(3 pi t / (1 - eps)) on [0, 1 - eps], 0 on [1 - eps, 1].
  static WeightFamily sin3_eps(double eps);
  static WeightFamily from_pieces(std::vector<WeightPiece> pieces, std::string descriptor);

  /// Parse a descriptor string (see README for the grammar).
  static WeightFamily parse(const std::string& descriptor);

  double operator()(double t) const;
  double plus(double t) const;
  double minus(double t) const;
  /// h+(t) - mu h-(t).
  double eval_mu(double mu, double t) const;

  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::string& descriptor() const { return descriptor_; }

  bool has_structure() const { return structure_.has_value(); }
  /// Throws NoSignChange when the weight has no positivity interval.
  const SignStructure& structure() const;
  const WeightProperties& properties() const { return properties_; }

  /// Max over a midpoint grid of |h(t) - h(a + b - t)|.
  double reflection_defect(int n = 4000) const;

  /// Breakpoints together with the sigma/tau points: mandatory integrator step endpoints.
  std::vector<double> step_points() const;

 private:
  WeightFamily(std::vector<WeightPiece> pieces, std::string descriptor);
  static WeightFamily build(std::vector<WeightPiece> pieces, std::string descriptor,
                            const std::vector<double>& sign_points);

  std::vector<WeightPiece> pieces_;
  double a_ = 0.0;
  double b_ = 1.0;
  std::vector<double> breakpoints_;
  std::string descriptor_;
  std::optional<SignStructure> structure_;
  WeightProperties properties_;
};

/// Symmetry about the midpoint and monotone growth on the left half, for h+ on every
/// positivity interval, sampled on a symmetric midpoint grid.
ExactnessReport check_exactness_hypotheses(const WeightFamily& h, double tol = 1e-10,
                                           int n_grid = 2000);

/// Same test for an arbitrary weight q on [c, d] (used for limit-problem intervals).
IntervalHypotheses check_arch_hypotheses(const std::function<double(double)>& q, double c,
                                         double d, double tol = 1e-10, int n_grid = 2000);

}  // namespace indefbvp

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "indefbvp/ivp.hpp"
#include "indefbvp/nonlinearity.hpp"
#include "indefbvp/weights.hpp"

namespace indefbvp {

/// u'' + q(t) g(u) = 0 on [a, b] with u(a) = 0, u'(a) = alpha.
struct ShootingProblem {
  Coefficient q;
  Nonlinearity g;
  double a = 0.0;
  double b = 1.0;
  std::vector<double> step_points;
};

/// q = h+ - mu h- on the weight's own domain.
ShootingProblem make_problem(const WeightFamily& h, const Nonlinearity& g, double mu);
/// q = h+ restricted to [c, d] (the limit problem on a positivity interval).
ShootingProblem make_limit_problem(const WeightFamily& h, const Nonlinearity& g, double c,
                                   double d);

struct ShootingOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double blowup_cap = 1e8;
};

struct ShootingOutcome {
  double alpha = 0.0;
  std::optional<double> B;  // first zero in (a, b]
  double u_b = 0.0;         // u(b; alpha), affine past B; +inf after blow-up
  double dudalpha_b = 0.0;  // d u(b; alpha) / d alpha
  std::optional<double> dBdalpha;
  double t_stop = 0.0;  // where the integration ended (B, b, or the blow-up time)
  bool blown_up = false;
  bool failed = false;  // integrator gave up (step size underflow)
  std::string failure;

  /// Signed shooting residual; its zeros are the positive Dirichlet solutions.
  double residual() const;
  bool finite() const { return !blown_up && !failed; }
};

ShootingOutcome shoot(const ShootingProblem& p, double alpha, const ShootingOptions& opt = {});
ShootingOutcome shoot(const WeightFamily& h, const Nonlinearity& g, double mu, double alpha,
                      const ShootingOptions& opt = {});

/// Full trajectory on [a, b] (no stop at the first zero).
Trajectory shoot_trajectory(const ShootingProblem& p, double alpha,
                            const ShootingOptions& opt = {});

/// Evaluate the shooting map on every alpha. The serial kernel is the reference; the parallel
/// kernel distributes alphas over OpenMP threads and returns identical results.
std::vector<ShootingOutcome> sweep_serial(const ShootingProblem& p, std::span<const double> alphas,
                                          const ShootingOptions& opt);
std::vector<ShootingOutcome> sweep_parallel(const ShootingProblem& p,
                                            std::span<const double> alphas,
                                            const ShootingOptions& opt);

using LambdaSet = std::vector<int>;  // 1-based positivity interval indices, sorted

std::string lambda_bits(const LambdaSet& set, int m);
std::string lambda_string(const LambdaSet& set);

struct PositiveSolution {
  double mu = 0.0;
  double alpha = 0.0;
  Trajectory trajectory;
  std::vector<double> interval_maxima;
  LambdaSet lambda_set;
  bool classification_ambiguous = false;
  double w_b = 0.0;        // w(b) for w(a) = 0, w'(a) = 1
  double w_b_prime = 0.0;  // w'(b)
  double nondeg_tol = 0.0;
  double action = 0.0;
  double sup_norm = 0.0;
  double min_interior = 0.0;  // min of u over the interior sample grid
  double a = 0.0;
  double b = 1.0;

  double operator()(double t) const { return trajectory(t)[0]; }
  bool nondegenerate() const { return std::abs(w_b) > nondeg_tol; }
};

struct ClassifyOptions {
  double r = 0.5;
  double R = 0.0;             // 0: 2 (1 + max sup-norm over the found solutions)
  double margin_factor = 0.05;  // classification margin = margin_factor * r
};

struct FindOptions {
  ShootingOptions shooting;
  double alpha_max = 64.0;
  int max_expansions = 40;
  double alpha_min_ratio = 1e-6;  // scan starts at alpha_max * alpha_min_ratio
  int n_scan = 512;
  double event_tol = 1e-9;
  double accept_tol = 1e-6;
  double dedup_tol = 1e-9;
  int max_subdivision_depth = 24;
  bool parallel = true;
  ClassifyOptions classify;
};

/// Roots of the shooting residual with the trajectory data needed to certify them.
struct ShootingRoot {
  double alpha = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct RootSearch {
  std::vector<ShootingRoot> roots;
  std::vector<double> scan_alphas;
  std::vector<ShootingOutcome> scan;
  double alpha_max_used = 0.0;
  std::vector<std::string> warnings;
};

/// Scan the residual on a log-uniform alpha grid, refine sign changes by safeguarded Newton
/// and subdivide cells where the Hermite interpolant of the residual dips through zero.
RootSearch find_roots(const ShootingProblem& p, const FindOptions& opt = {});

/// Build a certified solution record at a root.
PositiveSolution make_solution(const ShootingProblem& p, const SignStructure* structure, double mu,
                               double alpha, const ShootingOptions& opt = {});

struct SolutionSet {
  std::vector<PositiveSolution> solutions;
  std::vector<std::string> warnings;
  double r = 0.0;
  double R = 0.0;
};

/// Every positive solution at fixed mu, sorted by alpha, classified and certified.
SolutionSet find_all_solutions(const WeightFamily& h, const Nonlinearity& g, double mu,
                               const FindOptions& opt = {});
/// Same for a bare problem (no sign structure, no classification).
std::vector<PositiveSolution> find_all_solutions(const ShootingProblem& p,
                                                 const FindOptions& opt = {});

/// Per-interval maxima of u on the positivity intervals of `s`.
std::vector<double> interval_maxima(const Trajectory& u, const SignStructure& s);

/// Lambda set of a solution: indices whose interval maximum exceeds r. Throws
/// AmbiguousClassification when a maximum lies within `margin` of r, when any maximum reaches R,
/// or when the set would be empty.
LambdaSet classify(const PositiveSolution& sol, double r, double R, double margin);
/// Applies `classify` to every solution, recording ambiguity instead of throwing.
void classify_all(std::vector<PositiveSolution>& sols, double r, double R, double margin);

/// w(b) for w(a) = 0, w'(a) = 1 along the solution; also returns w'(b).
std::pair<double, double> nondegeneracy_certificate(const ShootingProblem& p,
                                                    const PositiveSolution& sol,
                                                    const ShootingOptions& opt = {});

struct MoroneyCertificate {
  double w_end = 0.0;
  double wp_end = 0.0;
  bool hypotheses_verified = false;
  bool passes = false;  // both end values negative and hypotheses verified
  /// -max(w(d), w'(d)) / (w(c) + w'(c)): the realized uniform margin.
  double margin = 0.0;
};

/// Linearized solution along a positive Dirichlet solution on [c, d] with w(c) = w0 >= 0,
/// w'(c) = w0p >= 0 (not both zero). Throws std::invalid_argument on a trivial initial condition.
MoroneyCertificate moroney_sign_certificate(const ShootingProblem& p, const Trajectory& sol,
                                            double w0, double w0p,
                                            const ShootingOptions& opt = {});

/// max over a grid of |u(t) - u(a + b - t)|.
double check_symmetry(const std::function<double(double)>& u, double a, double b, int n = 2001);
double check_symmetry(const PositiveSolution& sol, int n = 2001);

/// r = w / w' wherever |w'| > floor.
std::vector<std::pair<double, double>> ratio_trace(const DenseSolution<2>& w, double floor = 1e-8,
                                                   int n = 4001);

/// Action 1/2 int (u')^2 - int q G(u), Gauss-Legendre on every integrator step.
double trajectory_action(const ShootingProblem& p, const Trajectory& u);

}  // namespace indefbvp

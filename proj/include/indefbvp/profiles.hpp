#pragma once

#include <map>
#include <vector>

#include "indefbvp/shooting.hpp"

namespace indefbvp {

/// A positive solution of u'' + h+ g(u) = 0 with zero data at both ends of one positivity
/// interval.
struct LimitPiece {
  int interval = 0;  // 1-based positivity interval index
  int choice = 0;    // 0-based index among the interval's solutions, sorted by alpha
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.0;  // u'(lo)
  Trajectory trajectory;
  std::vector<double> grid;
  std::vector<double> values;
  double w_end = 0.0;  // non-degeneracy certificate on the interval
  double sup_norm = 0.0;

  double operator()(double t) const;
};

/// Every limit solution found on one positivity interval.
struct LimitInterval {
  int interval = 0;
  std::vector<LimitPiece> pieces;
  /// Exactly one root and the arch hypotheses hold on the interval.
  bool unique = false;
  bool hypotheses_hold = false;
};

struct ProfileOptions {
  FindOptions find;
  int grid_points = 2001;  // samples stored per piece
};

/// Throws NoSolution when the sweep finds no positive solution on the interval.
LimitInterval solve_limit_interval(const WeightFamily& h, const Nonlinearity& g, int i,
                                   const ProfileOptions& opt = {});
/// All intervals, solved concurrently.
std::vector<LimitInterval> solve_limit_intervals(const WeightFamily& h, const Nonlinearity& g,
                                                 const ProfileOptions& opt = {});

struct LimitProfile {
  LambdaSet lambda_set;
  std::map<int, LimitPiece> pieces;  // keyed by interval index, active intervals only
  std::map<int, double> piece_alphas;
  double a = 0.0;
  double b = 1.0;
  double event_tol = 1e-9;

  /// Zero off the active pieces; values below event_tol are clamped to zero.
  double operator()(double t) const;
  double sup_norm() const;
  /// Minimum over active pieces of the piece maximum.
  double min_piece_max() const;
  /// One character per interval: '0' when inactive, else the 1-based choice of piece.
  /// Reduces to the 0/1 bit string when every interval has a single solution.
  std::string label(int m) const;
};

/// One profile per selection of zero-or-one solution on each interval, minus the all-zero one.
std::vector<LimitProfile> enumerate_profiles(const WeightFamily& h,
                                             const std::vector<LimitInterval>& intervals);
std::vector<LimitProfile> enumerate_profiles(const WeightFamily& h, const Nonlinearity& g,
                                             const ProfileOptions& opt = {});

/// prod (1 + k_i) - 1.
std::size_t expected_profile_count(const std::vector<LimitInterval>& intervals);

/// Sup-norm distance on a shared grid (uniform plus the sign-change points).
double profile_distance(const std::function<double(double)>& u, const LimitProfile& prof,
                        int n = 8001);
double profile_distance(const PositiveSolution& sol, const LimitProfile& prof, int n = 8001);

/// Index of the nearest profile and the distance to it.
std::pair<std::size_t, double> nearest_profile(const PositiveSolution& sol,
                                               const std::vector<LimitProfile>& profiles);

/// Classification radius tied to the profiles: 0.1 * min over profiles of the piece maxima.
double profile_radius(const std::vector<LimitProfile>& profiles);

}  // namespace indefbvp

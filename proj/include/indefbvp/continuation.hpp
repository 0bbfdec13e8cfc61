#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "indefbvp/nonlinearity.hpp"
#include "indefbvp/profiles.hpp"
#include "indefbvp/weights.hpp"

namespace indefbvp {

inline constexpr int kDefaultMeshInterior = 800;

/// Nodes on [a, b] containing every breakpoint and sign-change point of h. Each sub-interval
/// between such points gets nodes in proportion to its length, graded so that spacing near its
/// ends is four times finer than in its middle.
std::vector<double> make_mesh(const WeightFamily& h, int n_interior = kDefaultMeshInterior);

/// Second-order finite-difference model of u'' + (h+ - mu h-) g(u) = 0 with u(a) = u(b) = 0.
/// Node j (interior) carries the lumped weights P_j, M_j: h+ and h- averaged over the two
/// adjacent half-cells with one-sided values, so jumps of h at nodes are handled exactly.
class DiscreteModel {
 public:
  DiscreteModel(WeightFamily h, Nonlinearity g, std::vector<double> mesh);
  DiscreteModel(const WeightFamily& h, const Nonlinearity& g, int n_interior = kDefaultMeshInterior);

  const WeightFamily& weight() const { return h_; }
  const Nonlinearity& nonlinearity() const { return g_; }
  const std::vector<double>& mesh() const { return *t_; }
  const std::shared_ptr<const std::vector<double>>& shared_mesh() const { return t_; }
  std::size_t size() const { return t_->size(); }
  double plus_weight(std::size_t j) const { return P_[j]; }
  double minus_weight(std::size_t j) const { return M_[j]; }
  double q(std::size_t j, double mu) const { return P_[j] - mu * M_[j]; }

 private:
  WeightFamily h_;
  Nonlinearity g_;
  std::shared_ptr<const std::vector<double>> t_;
  std::vector<double> P_, M_;
};

struct DiscreteSolution {
  std::shared_ptr<const std::vector<double>> mesh;  // shared with the model
  std::vector<double> values;                       // includes the pinned end values
  double mu = 0.0;

  const std::vector<double>& nodes() const { return *mesh; }
  /// Piecewise-linear interpolant.
  double operator()(double t) const;
  double sup_norm() const;
  double min_value() const;
};

/// Sample a function on the model mesh with the end values pinned to zero.
DiscreteSolution sample_on_mesh(const DiscreteModel& model, const std::function<double(double)>& u,
                                double mu);

/// Rows 0 and n-1 are the boundary rows u(a), u(b); interior rows are the scheme.
std::vector<double> residual(const DiscreteModel& model, const DiscreteSolution& d);

struct NewtonOptions {
  double tol = 1e-10;  // ||residual||_inf <= tol (1 + ||u||_inf)
  int max_iterations = 50;
  int max_halvings = 10;  // damping 1, 1/2, ..., 2^-max_halvings
};

struct NewtonReport {
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Optional pseudo-arclength row: <tu, u - u0>_L2 / scale^2 + tnu (nu - nu0) = ds, nu = asinh mu.
struct ArclengthConstraint {
  std::vector<double> tu;
  double tnu = 0.0;
  std::vector<double> u0;
  double nu0 = 0.0;
  double ds = 0.0;
  double scale = 1.0;
};

/// Damped Newton. Without a constraint mu is fixed; with one, (u, mu) are corrected together
/// through the bordered tridiagonal system. Throws NewtonDiverged or SingularJacobian.
DiscreteSolution newton_correct(const DiscreteModel& model, const DiscreteSolution& d,
                                const NewtonOptions& opt = {},
                                const ArclengthConstraint* constraint = nullptr,
                                NewtonReport* report = nullptr);

/// Discrete analogue of w(b) for w(a) = 0, w'(a) = 1: the linearized scheme marched from a.
/// Vanishes exactly when the discrete Jacobian is singular.
double discrete_w_b(const DiscreteModel& model, const DiscreteSolution& d);
/// w(b) from the linearized ODE along the interpolated discrete solution.
double shooting_w_b(const DiscreteModel& model, const DiscreteSolution& d);

/// Trapezoidal 1/2 int (u')^2 - int q G(u) on the mesh.
double action(const DiscreteModel& model, const DiscreteSolution& d);

struct BranchCoordinates {
  double uprime0 = 0.0;      // second-order one-sided slope at a
  double l2_grad_norm = 0.0;  // ||u'||_L2 of the interpolant
};
BranchCoordinates branch_coordinates(const DiscreteSolution& d);

struct BranchPoint {
  double mu = 0.0;
  DiscreteSolution solution;
  double uprime0 = 0.0;
  double l2_grad_norm = 0.0;
  double action = 0.0;
  double w_b = 0.0;           // shooting-based certificate
  double w_b_discrete = 0.0;  // discrete certificate
  double tangent_nu = 0.0;    // d nu / ds at the point
};

struct FoldPoint {
  double mu = 0.0;
  DiscreteSolution solution;
  double resolution = 0.0;  // final bracket width in mu
  std::size_t index = 0;    // branch point just before the fold
  bool w_b_sign_change = false;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<FoldPoint> folds;
  std::string origin;  // profile label
  std::string termination;
  std::vector<std::string> warnings;

  const BranchPoint& end() const { return points.back(); }
};

struct TraceOptions {
  double mu_stop = -1.0;
  double mu_max = 1e6;  // leaving (mu_stop, mu_max] ends the branch
  double ds_initial = 0.01;
  double ds_min = 1e-9;
  double ds_max = 0.25;
  double grow = 1.3;
  int easy_before_grow = 3;
  int max_corrector_iterations = 8;
  int max_steps = 4000;
  double pos_tol = 1e-9;  // relative to ||u||_inf
  double fold_tol = 1e-3;  // relative in mu, with unit floor
  /// Points traced past a fold to confirm it. Past a fold the branch retraces a partner branch,
  /// which is traced from its own profile anyway, so the branch is then cut back to end at the
  /// refined fold point.
  int steps_after_fold = 6;
  bool stop_after_fold = true;
  NewtonOptions newton;
};

/// Pseudo-arclength continuation in nu = asinh(mu) from a converged positive start, initially
/// in the direction of decreasing mu.
Branch trace_branch(const DiscreteModel& model, const DiscreteSolution& start,
                    const TraceOptions& opt = {});

/// Sign changes of d nu / ds along the branch, refined by arclength bisection.
std::vector<FoldPoint> detect_folds(const DiscreteModel& model, const Branch& branch,
                                    const TraceOptions& opt = {});

/// Converge the profile at mu_start and trace it. Throws NewtonDiverged when the profile does
/// not converge.
Branch trace_from_profile(const DiscreteModel& model, const LimitProfile& prof, double mu_start,
                          const TraceOptions& opt = {});
/// All profiles, one branch per profile, traced concurrently.
std::vector<Branch> trace_all(const DiscreteModel& model, const std::vector<LimitProfile>& profiles,
                              double mu_start, const TraceOptions& opt = {});

/// Groups of branch indices whose end points lie within `tol` of each other in
/// (mu, ||u'||_L2), relative to the larger coordinate with unit floor.
std::vector<std::vector<std::size_t>> cluster_endpoints(const std::vector<Branch>& branches,
                                                        double tol = 1e-4);

}  // namespace indefbvp

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "indefbvp/shooting.hpp"
#include "indefbvp/weights.hpp"

namespace indefbvp {

/// One measured property: passes when `measured <= limit`.
struct Check {
  std::string name;
  double measured = 0.0;
  double limit = 0.0;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const;
  /// nullptr when every check passed.
  const Check* first_failure() const;
  void add(std::string name, double measured, double limit);
};

/// Fourth-order derivative of the shooting residual: Richardson extrapolation of central
/// differences with steps d and d/2. Empty when any evaluation blows up.
std::optional<double> richardson_derivative(const ShootingProblem& p, double alpha, double d,
                                            const ShootingOptions& opt);

/// Variational d u(b) / d alpha against the Richardson difference of the shooting map on random
/// (weight, mu, alpha) cases.
SuiteReport verify_derivative(int cases = 20, std::uint64_t seed = 20240607);
/// Reflection defect of the unique solution for symmetric weights at negative mu.
SuiteReport verify_symmetry();
/// Sign certificate w(d) < 0, w'(d) < 0 on the arch corpus for two nonlinearities and both unit
/// initial conditions.
SuiteReport verify_moroney();
/// First-zero scaling B(l^2 alpha) - a = (B(alpha) - a) / l and dB/dalpha = -(B - a) / (2 alpha)
/// for the autonomous cubic problem.
SuiteReport verify_scaling();
/// Mesh refinement of the discrete model against shooting solutions: observed order and action.
SuiteReport verify_convergence();

/// Dispatch by name: derivative, symmetry, moroney, scaling, convergence.
/// Throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const std::string& name);
const std::vector<std::string>& suite_names();

/// Ten symmetric arches, nondecreasing on their left half.
std::vector<WeightFamily> arch_corpus();

}  // namespace indefbvp

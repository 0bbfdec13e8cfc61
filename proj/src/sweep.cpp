// Alpha-sweep kernels. Each alpha is an independent shooting integration, so the parallel
// kernel is a plain parallel-for over a pre-sized output vector; results do not depend on the
// thread count or schedule.

#include <exception>

#include "indefbvp/shooting.hpp"

#ifdef INDEFBVP_HAVE_OPENMP
#include <omp.h>
#endif

namespace indefbvp {

std::vector<ShootingOutcome> sweep_serial(const ShootingProblem& p, std::span<const double> alphas,
                                          const ShootingOptions& opt) {
  std::vector<ShootingOutcome> out(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) out[k] = shoot(p, alphas[k], opt);
  return out;
}

std::vector<ShootingOutcome> sweep_parallel(const ShootingProblem& p,
                                            std::span<const double> alphas,
                                            const ShootingOptions& opt) {
  std::vector<ShootingOutcome> out(alphas.size());
  std::exception_ptr error;
  const auto n = static_cast<long>(alphas.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long k = 0; k < n; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = shoot(p, alphas[static_cast<std::size_t>(k)], opt);
    } catch (...) {
#pragma omp critical(indefbvp_sweep_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace indefbvp

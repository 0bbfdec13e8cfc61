// Serial reference sweep against the OpenMP sweep on the same alpha grid.

#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "indefbvp/nonlinearity.hpp"
#include "indefbvp/shooting.hpp"

namespace {

using namespace indefbvp;

struct Fixture {
  ShootingProblem problem;
  std::vector<double> alphas;
};

const Fixture& fixture(const char* weight, double mu, int n) {
  static thread_local std::map<std::string, Fixture> cache;
  const std::string key = std::string(weight) + "/" + std::to_string(mu) + "/" + std::to_string(n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Fixture f{make_problem(WeightFamily::parse(weight), Nonlinearity::power(3.0), mu),
              log_grid(1e-2, 300.0, n)};
    it = cache.emplace(key, std::move(f)).first;
  }
  return it->second;
}

void run(benchmark::State& state, decltype(&sweep_serial) sweep, const char* weight, double mu) {
  const auto& f = fixture(weight, mu, static_cast<int>(state.range(0)));
  const ShootingOptions opt;
  for (auto _ : state) {
    auto out = sweep(f.problem, f.alphas, opt);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepSerial(benchmark::State& state, const char* weight, double mu) {
  run(state, &sweep_serial, weight, mu);
}
void BM_SweepParallel(benchmark::State& state, const char* weight, double mu) {
  run(state, &sweep_parallel, weight, mu);
}

}  // namespace

BENCHMARK_CAPTURE(BM_SweepSerial, sin3_mu8, "sin:3", 8.0)->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK_CAPTURE(BM_SweepParallel, sin3_mu8, "sin:3", 8.0)->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK_CAPTURE(BM_SweepSerial, sin5_mu20, "sin:5", 20.0)->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK_CAPTURE(BM_SweepParallel, sin5_mu20, "sin:5", 20.0)->Arg(256)->Arg(1024)->UseRealTime();

BENCHMARK_MAIN();

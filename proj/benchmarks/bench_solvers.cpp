#include <benchmark/benchmark.h>

#include "app/commands.hpp"
#include "strb/problem.hpp"

using namespace strb;

namespace {

struct Setup {
  app::RunConfig config;
  std::unique_ptr<Problem> problem;
  app::TrainedModel trained;

  Setup() : problem(build_problem(config.problem)), trained(app::train(config, *problem)) {}
};

Setup& setup() {
  static Setup s;
  return s;
}

void BM_OnlineSolve(benchmark::State& state) {
  const auto& m = setup().trained.bundle.model;
  const Vector alpha = Vector::Ones(m.N0());
  double rho = -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.solve(alpha, rho));
    rho = rho > 0.5 ? -0.5 : rho + 0.01;
  }
}
BENCHMARK(BM_OnlineSolve)->Unit(benchmark::kMicrosecond);

void BM_OnlinePayoffWithSigma(benchmark::State& state) {
  const auto& s = setup();
  const auto& m = s.trained.bundle.model;
  const Vector mu = payoff::payoff_coeffs(payoff::PayoffSpec::call(70), s.problem->knots).mu0_L;
  for (auto _ : state) benchmark::DoNotOptimize(m.solve_payoff(mu, 0.3, true));
}
BENCHMARK(BM_OnlinePayoffWithSigma)->Unit(benchmark::kMicrosecond);

// A detailed solve for a new parameter, including the step factorization.
void BM_TruthSolveCold(benchmark::State& state) {
  const auto& s = setup();
  const Vector u0 = s.trained.bundle.model.init_basis.col(0);
  for (auto _ : state) {
    s.problem->truth->clear_cache();
    benchmark::DoNotOptimize(s.problem->truth->solve(0.3, u0));
  }
}
BENCHMARK(BM_TruthSolveCold)->Unit(benchmark::kMillisecond);

void BM_TruthSolveCached(benchmark::State& state) {
  const auto& s = setup();
  const Vector u0 = s.trained.bundle.model.init_basis.col(0);
  s.problem->truth->solve(0.3, u0);
  for (auto _ : state) benchmark::DoNotOptimize(s.problem->truth->solve(0.3, u0));
}
BENCHMARK(BM_TruthSolveCached)->Unit(benchmark::kMillisecond);

void BM_HestonAssembly(benchmark::State& state) {
  const auto& p = *setup().problem;
  for (auto _ : state) benchmark::DoNotOptimize(fem2d::assemble_heston_affine(p.mesh, p.config.heston));
}
BENCHMARK(BM_HestonAssembly)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

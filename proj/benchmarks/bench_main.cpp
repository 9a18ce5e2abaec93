#include <benchmark/benchmark.h>

#include <cmath>

#include "chainqfi/dynamics.hpp"
#include "chainqfi/qfi.hpp"
#include "chainqfi/specfun.hpp"
#include "chainqfi/spinon.hpp"
#include "chainqfi/suscept.hpp"

using namespace chainqfi;

static void BM_LogGamma(benchmark::State& state) {
  Complex z(0.37, -12.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_gamma_complex(z));
    z += Complex(0.0, 1e-6);
  }
}
BENCHMARK(BM_LogGamma);

static void BM_ChainSusceptibility(benchmark::State& state) {
  SusceptibilityModel model;
  model.form = state.range(0) == 0 ? BonnerFisherForm::FiniteRing : BonnerFisherForm::Pade;
  (void)reduced_susceptibility(1.0, model);  // warm the spectrum cache
  double t = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reduced_susceptibility(t, model));
    t = t > 5.0 ? 0.3 : t + 1e-3;
  }
}
BENCHMARK(BM_ChainSusceptibility)->Arg(0)->Arg(1);

static void BM_ModelQfi(benchmark::State& state) {
  const auto p = StarykhParams::standard(3.1);
  const double wmax = default_omega_max(3.1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_qfi(p, 0.5, wmax));
}
BENCHMARK(BM_ModelQfi)->Unit(benchmark::kMicrosecond);

static void BM_PowderRoundTrip(benchmark::State& state) {
  const auto nq = static_cast<int>(state.range(0));
  std::vector<double> q(nq), e{0.1, 0.4, 0.7, 1.0};
  for (int i = 0; i < nq; ++i) q[i] = 2.0 * i / (nq - 1);
  const auto s1d = [](double x, double w) {
    const double s = std::sin(2.5 * x);
    return (0.3 + s * s) * std::exp(-w);
  };
  for (auto _ : state) benchmark::DoNotOptimize(powder_to_1d(forward_powder_average(s1d, q, e, 1.0)));
}
BENCHMARK(BM_PowderRoundTrip)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

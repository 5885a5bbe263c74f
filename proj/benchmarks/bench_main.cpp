#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "bridgediag/bridge.hpp"
#include "bridgediag/ess.hpp"
#include "bridgediag/experiments.hpp"
#include "bridgediag/mcse.hpp"
#include "bridgediag/pareto.hpp"
#include "bridgediag/samplers.hpp"

namespace bd = bridgediag;

namespace {

bd::LogRatios noisy_ratios(std::size_t n) {
  bd::RngStream rng(1, 0);
  bd::LogRatios r;
  for (std::size_t i = 0; i < n; ++i) {
    r.log_l1.push_back(-3.0 + 0.3 * rng.normal());
    r.log_l2.push_back(-3.0 + 0.3 * rng.normal());
  }
  return r;
}

void BM_BridgeIterate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const bd::LogRatios r = noisy_ratios(n);
  for (auto _ : state) benchmark::DoNotOptimize(bd::bridge_iterate(r, {}, {4, n / 4}));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n));
}
BENCHMARK(BM_BridgeIterate)->Arg(2000)->Arg(20000);

bd::ScalarChains ar1_chains(std::size_t iters) {
  bd::RngStream rng(2, 0);
  std::vector<double> v(4 * iters);
  double x = 0.0;
  for (double& e : v) e = x = 0.9 * x + std::sqrt(1.0 - 0.81) * rng.normal();
  return bd::ScalarChains(4, iters, std::move(v));
}

void BM_EssDirect(benchmark::State& state) {
  const auto x = ar1_chains(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bd::ess_mean(x, bd::AutocovMethod::kDirect));
}
BENCHMARK(BM_EssDirect)->Arg(250)->Arg(2500)->Arg(25000);

void BM_EssFft(benchmark::State& state) {
  const auto x = ar1_chains(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bd::ess_mean(x, bd::AutocovMethod::kFft));
}
BENCHMARK(BM_EssFft)->Arg(250)->Arg(2500)->Arg(25000);

void BM_GpdFit(benchmark::State& state) {
  bd::RngStream rng(3, 0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = (std::pow(rng.uniform(), -0.3) - 1.0) / 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(bd::fit_gpd_excesses(x));
}
BENCHMARK(BM_GpdFit)->Arg(134)->Arg(1000);

void BM_EstimatePipeline(benchmark::State& state) {
  bd::RunConfig c;
  c.model = "conjugate-linreg";
  const auto model = bd::build_model(c);
  bd::RngStream seed(4, 0);
  const bd::DrawsMatrix draws = bd::run_sampler(*model, c.sampler_spec(), seed);
  for (auto _ : state) {
    bd::RngStream rng(5, 0);
    benchmark::DoNotOptimize(bd::run_estimate(*model, draws, {}, rng));
  }
}
BENCHMARK(BM_EstimatePipeline)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

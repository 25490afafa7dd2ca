// Serial vs OpenMP versions of the three parallel kernels.

#include <benchmark/benchmark.h>

#include <memory>

#include "procurl/envs/karel.hpp"
#include "procurl/harness/training.hpp"
#include "procurl/pos.hpp"
#include "procurl/rollouts.hpp"
#include "procurl/students/actor_critic.hpp"
#include "procurl/theory.hpp"

using namespace procurl;

namespace {

struct KarelFixture {
  envs::KarelPool pool = envs::generate_karel_pool(100, {}, RngSeed{7});
  students::LinearActorCritic ac{envs::kObservationDim, envs::kKarelActions};
  KarelFixture() {
    Rng rng(1);
    for (auto& w : ac.policy_weights()) w = rng.uniform(-0.3, 0.3);
  }
  pos::RolloutFn fn() const {
    return [this](TaskId t, Rng& rng) { return attempt_karel(pool, ac, t, rng); };
  }
};

const KarelFixture& karel() {
  static const KarelFixture f;
  return f;
}

void BM_RefreshPos(benchmark::State& state) {
  const auto fn = karel().fn();
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto r = parallel ? pos::refresh_pos_mc(fn, 100, 20, 3) : pos::refresh_pos_mc_serial(fn, 100, 20, 3);
    benchmark::DoNotOptimize(r.pos.data());
  }
}
BENCHMARK(BM_RefreshPos)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EvaluateUniform(benchmark::State& state) {
  const auto fn = karel().fn();
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto r = parallel ? harness::evaluate_uniform(fn, 100, 20, 5) : harness::evaluate_uniform_serial(fn, 100, 20, 5);
    benchmark::DoNotOptimize(r.mean_reward);
  }
}
BENCHMARK(BM_EvaluateUniform)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_VerifyTheorem(benchmark::State& state) {
  theory::TheoremParams p;
  p.n_samples = 5000;
  const auto grid = theory::standard_grid();
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto r = parallel ? theory::verify_theorem(p, grid, 1) : theory::verify_theorem_serial(p, grid, 1);
    benchmark::DoNotOptimize(r.points.data());
  }
}
BENCHMARK(BM_VerifyTheorem)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

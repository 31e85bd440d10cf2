#include <benchmark/benchmark.h>

#include <vector>

#include "lppo/grpo.hpp"
#include "lppo/sim_env.hpp"
#include "lppo/stats_tracker.hpp"

using namespace lppo;

namespace {

ChainEnvironment make_env(int steps) {
  ChainProblemSpec spec{steps, 4, std::vector<int>(static_cast<std::size_t>(steps), 1)};
  Problem p;
  p.id = "b";
  p.question = spec.to_json();
  p.gold_answer = spec.render_answer();
  return ChainEnvironment({p});
}

void BM_LpWeight(benchmark::State& state) {
  double d = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lp_weight(d, 8.0, 0.5));
    d = d > 1.0 ? -1.0 : d + 1e-6;
  }
}
BENCHMARK(BM_LpWeight);

void BM_TrackerUpdate(benchmark::State& state) {
  StatsTracker tracker(WeightingConfig{});
  std::int64_t step = 0;
  for (auto _ : state) {
    tracker.update_pass_rate("p", static_cast<double>(step % 9) / 8.0, ++step);
  }
}
BENCHMARK(BM_TrackerUpdate);

void BM_RolloutGroup(benchmark::State& state) {
  const auto env = make_env(static_cast<int>(state.range(0)));
  const auto policy = env.make_policy();
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pass_rate(policy, env.problem("b"), 16, 0, rng));
  }
}
BENCHMARK(BM_RolloutGroup)->Arg(4)->Arg(8)->Arg(16);

void BM_SurrogateGradient(benchmark::State& state) {
  const auto env = make_env(8);
  const auto policy = env.make_policy();
  Rng rng(2);
  const auto group = pass_rate(policy, env.problem("b"), static_cast<std::size_t>(state.range(0)), 0, rng).group;
  std::vector<double> rewards(group.rollouts.size(), 0.0);
  for (std::size_t k = 0; k < rewards.size(); k += 2) rewards[k] = 1.0;
  const auto adv = apply_lp_weight(group_advantage(rewards), 1.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(surrogate_objective(group, adv, policy, 0.2, -0.001));
  }
}
BENCHMARK(BM_SurrogateGradient)->Arg(8)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();

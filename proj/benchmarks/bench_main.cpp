#include <benchmark/benchmark.h>

#include <vector>

#include "linrmdp/drop_solver.hpp"
#include "linrmdp/instance.hpp"
#include "linrmdp/offline_data.hpp"
#include "linrmdp/robust_oracle.hpp"
#include "linrmdp/rng.hpp"
#include "linrmdp/tv_dual.hpp"

using namespace linrmdp;

namespace {

DualProblem make_dual_problem(int n, bool signed_weights) {
    Rng rng(42);
    DualProblem p;
    p.values.resize(n);
    p.weights.resize(n);
    for (int j = 0; j < n; ++j) {
        p.values[j] = 4.0 * rng.u01();
        p.weights[j] = signed_weights ? 2.0 * rng.u01() - 1.0 : rng.u01() / n;
    }
    p.rho = 0.3;
    p.floor = 0.0;
    p.lo = 0.0;
    p.hi = 4.0;
    return p;
}

void BM_MaximizeDual(benchmark::State& state) {
    const DualProblem p = make_dual_problem(static_cast<int>(state.range(0)), true);
    for (auto _ : state) benchmark::DoNotOptimize(maximize_dual(p).value);
}
BENCHMARK(BM_MaximizeDual)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RobustValueIteration(benchmark::State& state) {
    const int S = static_cast<int>(state.range(0));
    const LinRmdpInstance inst = random_instance(7, S, 4, 8, 12, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(robust_value_iteration(inst).v_star.values);
}
BENCHMARK(BM_RobustValueIteration)->Arg(10)->Arg(40);

void BM_DropFit(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const LinRmdpInstance inst = random_instance(11, 6, 3, 5, 8, 0.2);
    const StochasticPolicy behavior =
        uniform_policy(inst.horizon, inst.num_states, inst.num_actions);
    const OfflineDataset data = generate(inst, behavior, K, 3);
    DropConfig cfg;
    cfg.rho = 0.2;
    cfg.num_trajectories = K;
    cfg.gamma0 = 0.5;
    const FeatureView view = feature_view(inst);
    for (auto _ : state) benchmark::DoNotOptimize(fit(view, data, cfg).q);
}
BENCHMARK(BM_DropFit)->Arg(500)->Arg(2000)->Arg(8000);

} // namespace

BENCHMARK_MAIN();

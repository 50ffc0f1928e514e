#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "otmap/conjugate.hpp"
#include "otmap/distributions.hpp"
#include "otmap/eval.hpp"
#include "otmap/icnn.hpp"
#include "otmap/trainer.hpp"

namespace {

using namespace otmap;

IcnnArch bench_arch(int dim) { return {dim, 3, 15, 1.0}; }

void BM_IcnnForward(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int batch = static_cast<int>(state.range(1));
  const IcnnParams params = init_icnn(bench_arch(dim), 1);
  const Eigen::MatrixXd X = sample({SourceKind::StdNormal, dim}, batch, 2);
  IcnnWorkspace ws;
  Eigen::VectorXd values;
  for (auto _ : state) {
    icnn_eval_batch(params, X, &values, nullptr, ws);
    benchmark::DoNotOptimize(values.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_IcnnForward)->Args({1, 64})->Args({1, 1024})->Args({3, 1024});

void BM_IcnnValueAndInputGrad(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int batch = static_cast<int>(state.range(1));
  const IcnnParams params = init_icnn(bench_arch(dim), 1);
  const Eigen::MatrixXd X = sample({SourceKind::StdNormal, dim}, batch, 2);
  IcnnWorkspace ws;
  Eigen::VectorXd values;
  Eigen::MatrixXd grads;
  for (auto _ : state) {
    icnn_eval_batch(params, X, &values, &grads, ws);
    benchmark::DoNotOptimize(grads.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_IcnnValueAndInputGrad)->Args({1, 1024})->Args({3, 1024});

void BM_IcnnParamGrad(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const IcnnParams params = init_icnn(bench_arch(1), 1);
  const Eigen::MatrixXd X = sample({SourceKind::StdNormal, 1}, batch, 2);
  IcnnWorkspace ws;
  ParamGradient g = ParamGradient::zeros_like(params);
  for (auto _ : state) {
    g.set_zero();
    accumulate_grad_params(params, X, 1.0 / batch, g, ws);
    benchmark::DoNotOptimize(g.biases.back().data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_IcnnParamGrad)->Arg(50)->Arg(512);

void BM_ConjugateBatch(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const IcnnParams params = init_icnn(bench_arch(1), 1);
  const Eigen::MatrixXd Y =
      pushforward_sample({MapKind::Linear, 1}, {SourceKind::StdNormal, 1}, 50,
                         3);
  IcnnPotential phi(params);
  ConjugateConfig cfg;
  cfg.steps = steps;
  cfg.step_size = 1e-3;
  for (auto _ : state) {
    const BatchConjugateResult r = solve_conjugate_batch(phi, Y, cfg);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetItemsProcessed(state.iterations() * 50 * steps);
}
BENCHMARK(BM_ConjugateBatch)->Arg(100)->Arg(500);

void BM_SemiDualBatchLoss(benchmark::State& state) {
  const IcnnParams params = init_icnn(bench_arch(1), 1);
  const Eigen::MatrixXd X = sample({SourceKind::StdNormal, 1}, 50, 2);
  const Eigen::MatrixXd Y =
      pushforward_sample({MapKind::Linear, 1}, {SourceKind::StdNormal, 1}, 50,
                         3);
  ConjugateConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  cfg.step_size = 1e-3;
  for (auto _ : state) {
    const BatchLoss loss = semi_dual_batch_loss(params, X, Y, cfg);
    benchmark::DoNotOptimize(loss.loss);
  }
}
BENCHMARK(BM_SemiDualBatchLoss)->Arg(100)->Arg(500);

void BM_TrainEpoch(benchmark::State& state) {
  const int n = 200;
  const Eigen::MatrixXd X = sample({SourceKind::StdNormal, 1}, n, 2);
  const Eigen::MatrixXd Y =
      pushforward_sample({MapKind::Linear, 1}, {SourceKind::StdNormal, 1}, n,
                         3);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_x = 50;
  cfg.batch_y = 50;
  cfg.conjugate.steps = 100;
  for (auto _ : state) {
    const TrainReport report = train(X, Y, bench_arch(1), cfg, 1);
    benchmark::DoNotOptimize(report.per_epoch_loss.data());
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_L2Loss(benchmark::State& state) {
  const int eval_samples = static_cast<int>(state.range(0));
  const IcnnParams params = init_icnn(bench_arch(1), 1);
  for (auto _ : state) {
    const double loss = l2_loss(params, {MapKind::Linear, 1},
                                {SourceKind::StdNormal, 1}, eval_samples, 4);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * eval_samples);
}
BENCHMARK(BM_L2Loss)->Arg(8192)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();

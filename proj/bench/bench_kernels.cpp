// Serial reference against the OpenMP path for the hot kernels.

#include "edmp/denoiser.hpp"
#include "edmp/guidance.hpp"
#include "edmp/kernels.hpp"
#include "edmp/nn_ops.hpp"
#include "edmp/planner.hpp"
#include "edmp/rng.hpp"
#include "edmp/worldgen.hpp"

#include <benchmark/benchmark.h>

using namespace edmp;
using kernels::Exec;

namespace {

nn::Denoiser make_net() {
  nn::DenoiserConfig a;
  a.widths = {16, 32, 64};
  nn::Denoiser net(a);
  net.initialize(1);
  return net;
}

std::vector<Trajectory> noise(int b, int h, int m, std::uint64_t seed) {
  rng::Stream r(seed, rng::Purpose::test);
  std::vector<Trajectory> x(b, Trajectory(h, m));
  for (auto& t : x)
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = r.normal();
  return x;
}

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_PredictBatch(benchmark::State& state) {
  const auto net = make_net();
  const int b = 120;
  const auto x = noise(b, 50, 3, 1);
  const std::vector<int> t(b, 10);
  std::vector<Trajectory> out(b);
  for (auto _ : state) {
    kernels::predict_batch(net, x, t, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_PredictBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LossGradientBatch(benchmark::State& state) {
  const auto net = make_net();
  const int b = 64;
  const auto x = noise(b, 50, 3, 2), eps = noise(b, 50, 3, 3);
  std::vector<kernels::TrainSample> batch;
  for (int i = 0; i < b; ++i) batch.push_back({x[i], 1 + i % 64, eps[i]});
  for (auto _ : state) benchmark::DoNotOptimize(kernels::loss_gradient_batch(net, batch, true, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_LossGradientBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GuidedReverseStep(benchmark::State& state) {
  const auto net = make_net();
  const auto chain = chain::default_chain();
  const auto sched = diffusion::make_schedule(64);
  const Scene scene = worldgen::gen_scene(worldgen::SceneKind::shelf, chain, 1);
  const auto guide = guidance::default_guides()[6];
  const auto x = noise(10, 50, 3, 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        planner::guided_reverse_step(net, x, 32, sched, guide, scene, chain, 0, 0, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_GuidedReverseStep)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Conv1d(benchmark::State& state) {
  const nn::ConvShape s{64, 64, 5, 1};
  rng::Stream r(5, rng::Purpose::test);
  nn::Mat x(64, 50);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal();
  std::vector<double> w(s.weight_size()), b(64);
  for (double& v : w) v = r.normal();
  for (auto _ : state)
    benchmark::DoNotOptimize(state.range(0) ? nn::conv1d(x, w, b, s) : nn::conv1d_reference(x, w, b, s));
}
BENCHMARK(BM_Conv1d)->ArgName("gemm")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

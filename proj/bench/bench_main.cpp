// Serial reference vs OpenMP variant for each parallel kernel.

#include "softwrist/neural_ik.hpp"
#include "softwrist/tuning.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace softwrist;

Scenario short_scenario() {
  Scenario s;
  s.duration = 0.5;
  s.step = 5e-4;
  return s;
}

std::vector<SmcGains> swarm(int n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<SmcGains> g;
  for (int i = 0; i < n; ++i) {
    g.push_back({0.001 * std::pow(10.0, u(rng)), 1000.0 * std::pow(10.0, u(rng)), 1000.0 * std::pow(10.0, u(rng))});
  }
  return g;
}

void BM_SwarmSerial(benchmark::State& st) {
  const auto s = short_scenario();
  const auto g = swarm(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_swarm(g, s, {}));
}

void BM_SwarmParallel(benchmark::State& st) {
  const auto s = short_scenario();
  const auto g = swarm(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_swarm_parallel(g, s, {}));
}

MlpNetwork bench_net() { return MlpNetwork::create({2, 200, 100, 100, 1}, Activation::kSigmoid, 5); }

Eigen::MatrixXd queries(Eigen::Index n) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.08, 0.08);
  Eigen::MatrixXd q(2, n);
  for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = u(rng);
  return q;
}

void BM_PredictSerial(benchmark::State& st) {
  const auto net = bench_net();
  const auto q = queries(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(predict_batch(net, q));
}

void BM_PredictParallel(benchmark::State& st) {
  const auto net = bench_net();
  const auto q = queries(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(predict_batch_parallel(net, q));
}

void BM_DatasetSerial(benchmark::State& st) {
  const WristModel w;
  DatasetConfig c;
  c.samples = static_cast<int>(st.range(0));
  c.train_samples = c.samples * 3 / 4;
  for (auto _ : st) benchmark::DoNotOptimize(generate_dataset(w, c));
}

void BM_DatasetParallel(benchmark::State& st) {
  const WristModel w;
  DatasetConfig c;
  c.samples = static_cast<int>(st.range(0));
  c.train_samples = c.samples * 3 / 4;
  for (auto _ : st) benchmark::DoNotOptimize(generate_dataset_parallel(w, c));
}

}  // namespace

BENCHMARK(BM_SwarmSerial)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SwarmParallel)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PredictSerial)->Arg(4096)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_PredictParallel)->Arg(4096)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_DatasetSerial)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DatasetParallel)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "agrimeta/datagen/dataset.hpp"
#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/datagen/scenario.hpp"
#include "agrimeta/tensornet/kernels.hpp"
#include "agrimeta/tensornet/network.hpp"
#include "agrimeta/tensornet/reference.hpp"

using namespace agrimeta;
using tensornet::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

struct Batch {
  std::vector<datagen::Sample> samples;
  std::vector<tensornet::NetInput> inputs;
  std::vector<double> targets;
};

Batch random_batch(std::size_t n) {
  Batch b;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i) {
    datagen::Sample s;
    s.temporal.resize(datagen::kTemporalChannels * datagen::kWindowDays);
    s.soil.resize(datagen::kSoilChannels * datagen::kSoilLayers);
    for (auto& v : s.temporal) v = g(rng);
    for (auto& v : s.soil) v = g(rng);
    for (auto& v : s.scalars) v = g(rng);
    s.target = g(rng);
    b.samples.push_back(std::move(s));
  }
  for (const auto& s : b.samples) {
    b.inputs.push_back(tensornet::input_of(s));
    b.targets.push_back(s.target);
  }
  return b;
}

void BM_Conv1dReference(benchmark::State& state) {
  const auto in = random_tensor({6, 210}, 1);
  const auto w = random_tensor({20, 6, 3}, 2);
  const auto b = random_tensor({20}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tensornet::reference::conv1d(in, w, b));
}
BENCHMARK(BM_Conv1dReference);

void BM_Conv1dProduction(benchmark::State& state) {
  const auto in = random_tensor({6, 210}, 1);
  const auto w = random_tensor({20, 6, 3}, 2);
  const auto b = random_tensor({20}, 3);
  std::vector<double> out(20 * 208);
  for (auto _ : state) {
    tensornet::kernels::conv1d_forward(in.data(), 6, 210, w.data(), b.data(), 20, 3, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Conv1dProduction);

void BM_BackwardReference(benchmark::State& state) {
  const auto spec = tensornet::metamodel_spec(true);
  const auto params = tensornet::init_parameters(spec, 11);
  const auto batch = random_batch(32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tensornet::reference::backward(spec, params, batch.inputs, batch.targets));
  }
}
BENCHMARK(BM_BackwardReference)->Unit(benchmark::kMillisecond);

// Argument = OpenMP thread count; 1 is the serial path.
void BM_BackwardProduction(benchmark::State& state) {
  const auto spec = tensornet::metamodel_spec(true);
  const auto params = tensornet::init_parameters(spec, 11);
  const auto batch = random_batch(32);
  const tensornet::Network net(spec);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(net.backward(params, batch.inputs, batch.targets));
  omp_set_num_threads(saved);
}
BENCHMARK(BM_BackwardProduction)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GenerateSerial(benchmark::State& state) {
  const auto scenarios = datagen::build_factorial(2, 2, 4, 4, 5);
  const auto weather = datagen::WeatherStore::synthetic(2, {1990, 1991}, 5);
  const auto soils = datagen::SoilLibrary::shipped();
  for (auto _ : state) benchmark::DoNotOptimize(datagen::generate_dataset_serial(scenarios, weather, soils));
}
BENCHMARK(BM_GenerateSerial)->Unit(benchmark::kMillisecond);

void BM_GenerateParallel(benchmark::State& state) {
  const auto scenarios = datagen::build_factorial(2, 2, 4, 4, 5);
  const auto weather = datagen::WeatherStore::synthetic(2, {1990, 1991}, 5);
  const auto soils = datagen::SoilLibrary::shipped();
  datagen::GenerateOptions options;
  options.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(datagen::generate_dataset(scenarios, weather, soils, options));
  }
}
BENCHMARK(BM_GenerateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "attrinfer/synthetic.hpp"
#include "attrinfer/training.hpp"

namespace attrinfer {
namespace {

void BM_TrainStep(benchmark::State& state) {
  const auto mode = static_cast<TrainMode>(state.range(1));
  Rng graph_rng(0);
  const AttributedGraph graph =
      generate_synthetic(benchmark_synthetic_config(static_cast<std::size_t>(state.range(0))), graph_rng)
          .graph;
  TrainConfig config;
  config.mode = mode;
  Rng split_rng = stream_rng(config.seed, SeedStream::split);
  const TrainingData data = prepare_training_data(graph, split_labels(graph, config.split, split_rng));
  TrainState train = init_train_state(config, data);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(train, config, data));
  state.SetLabel(to_string(mode));
}
BENCHMARK(BM_TrainStep)
    ->ArgsProduct({{300, 3000}, {static_cast<long>(TrainMode::full), static_cast<long>(TrainMode::vanilla_vae)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace attrinfer

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "attrinfer/metrics.hpp"
#include "attrinfer/synthetic.hpp"
#include "attrinfer/training.hpp"

// Multi-seed behavioural checks on the 300-user synthetic benchmark.

namespace attrinfer {
namespace {

constexpr int kSeeds = 10;

const AttributedGraph& benchmark_graph() {
  static const AttributedGraph g = [] {
    Rng rng(0);
    return generate_synthetic(benchmark_synthetic_config(), rng).graph;
  }();
  return g;
}

TrainingData data_for(const TrainConfig& config) {
  Rng split_rng = stream_rng(config.seed, SeedStream::split);
  const AttributedGraph& g = benchmark_graph();
  return prepare_training_data(g, split_labels(g, config.split, split_rng));
}

TEST(TrainingProgress, ValidationAccuracyImprovesOverTraining) {
  double early = 0.0;
  double late = 0.0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    TrainConfig config;
    config.seed = static_cast<std::uint64_t>(seed);
    const TrainResult r = train(config, data_for(config));
    ASSERT_EQ(r.history.size(), 500u);
    ASSERT_TRUE(r.history[9].validation_accuracy.has_value());
    ASSERT_TRUE(r.history[499].validation_accuracy.has_value());
    early += *r.history[9].validation_accuracy;
    late += *r.history[499].validation_accuracy;
  }
  EXPECT_GT(late / kSeeds, early / kSeeds);
}

TEST(TrainingProgress, FitsTheTrainCellsOfFullyVisibleUsers) {
  double fit = 0.0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    TrainConfig config;
    config.seed = static_cast<std::uint64_t>(seed);
    const TrainingData data = data_for(config);
    const TrainResult r = train(config, data);
    const LabelMatrix pred = predict_labels(infer(r.final_params, data), data.schema());
    std::size_t cells = 0;
    std::size_t hits = 0;
    for (std::size_t u : data.partition.labeled) {
      for (std::size_t t = 0; t < data.schema().type_count(); ++t) {
        if (!data.split.train(u, t)) continue;
        ++cells;
        hits += pred(u, t) == data.graph.label(u, t) ? 1 : 0;
      }
    }
    ASSERT_GT(cells, 0u);
    fit += static_cast<double>(hits) / static_cast<double>(cells);
  }
  EXPECT_GE(fit / kSeeds, 0.9);
}

TEST(TrainingProgress, DiscriminatorBeatsChanceAfterFiftyIterations) {
  double total = 0.0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    TrainConfig config;
    config.seed = static_cast<std::uint64_t>(seed);
    config.iterations = 50;
    const TrainResult r = train(config, data_for(config));
    total += r.history.back().losses.l_d;
  }
  EXPECT_LT(total / kSeeds, 2.0 * std::log(2.0));
}

}  // namespace
}  // namespace attrinfer

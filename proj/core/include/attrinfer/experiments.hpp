#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrinfer/graph.hpp"
#include "attrinfer/metrics.hpp"
#include "attrinfer/training.hpp"

namespace attrinfer {

// One train/evaluate run. The label split comes from the config seed, so every
// run with the same seed and split ratios evaluates on the same test cells.
struct RunOutcome {
  TrainResult training;
  MetricsReport test_metrics;
  std::uint64_t train_mask_fingerprint = 0;
  std::uint64_t test_mask_fingerprint = 0;
};

// Splits `graph` with config.seed, optionally thins the training cells to
// keep_fraction of all observed cells, trains and evaluates the best snapshot
// on the test mask.
RunOutcome run_single(const AttributedGraph& graph, const TrainConfig& config,
                      std::optional<double> keep_fraction = std::nullopt,
                      const IterationCallback& on_iteration = {});

struct Summary {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation; 0 for a single value
};

// Throws ConfigError for an empty input.
Summary summarize(std::span<const double> values);

enum class SweepAxis { sparsity, lambda, beta };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepPoint {
  double value = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;  // accuracy_cell, aligned with seeds
  std::vector<std::uint64_t> test_mask_fingerprints;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::sparsity;
  std::vector<SweepPoint> points;
};

using RunCallback =
    std::function<void(const std::string& label, std::uint64_t seed, const RunOutcome& outcome)>;

// For each fraction × seed: split with the seed, keep that fraction of the
// observed cells for training and evaluate on the seed's test mask. Runs with
// no fully visible training user skip the adversary and the MI term.
SweepResult run_sparsity_sweep(const AttributedGraph& graph, const TrainConfig& base,
                               std::span<const double> fractions,
                               std::span<const std::uint64_t> seeds,
                               const RunCallback& on_run = {});

// Same shape, varying lambda or beta with the default split.
SweepResult run_weight_sweep(const AttributedGraph& graph, const TrainConfig& base, SweepAxis axis,
                             std::span<const double> values, std::span<const std::uint64_t> seeds,
                             const RunCallback& on_run = {});

struct AblationRow {
  TrainMode mode = TrainMode::full;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;
  std::vector<std::uint64_t> test_mask_fingerprints;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;

  const AblationRow& row(TrainMode mode) const;
};

inline constexpr TrainMode kAllModes[] = {TrainMode::full, TrainMode::no_adversary,
                                          TrainMode::no_mi, TrainMode::gcn_vae,
                                          TrainMode::vanilla_vae};

// One run per mode per seed; every mode sees the same split for a given seed.
AblationResult run_ablations(const AttributedGraph& graph, const TrainConfig& base,
                             std::span<const TrainMode> modes, std::span<const std::uint64_t> seeds,
                             const RunCallback& on_run = {});

}  // namespace attrinfer

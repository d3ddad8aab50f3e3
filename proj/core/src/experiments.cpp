#include "attrinfer/experiments.hpp"

#include <cmath>

#include "attrinfer/error.hpp"

namespace attrinfer {
namespace {

void require_seeds(std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
}

SweepPoint make_point(double value) {
  SweepPoint p;
  p.value = value;
  return p;
}

void finish(SweepPoint& p) {
  const Summary s = summarize(p.accuracies);
  p.mean = s.mean;
  p.std_dev = s.std_dev;
}

}  // namespace

RunOutcome run_single(const AttributedGraph& graph, const TrainConfig& config,
                      std::optional<double> keep_fraction, const IterationCallback& on_iteration) {
  config.validate();
  Rng split_rng = stream_rng(config.seed, SeedStream::split);
  LabelSplit split = split_labels(graph, config.split, split_rng);
  if (keep_fraction) {
    Rng sparsify_rng = stream_rng(config.seed, SeedStream::sparsify);
    split = sparsify_train_labels(split, *keep_fraction, sparsify_rng);
  }
  RunOutcome out;
  out.train_mask_fingerprint = split.train.fingerprint();
  out.test_mask_fingerprint = split.test.fingerprint();
  const TrainingData data = prepare_training_data(graph, std::move(split));
  out.training = train(config, data, on_iteration);
  out.test_metrics = evaluate_predictions(infer(out.training.best_params, data), data.graph,
                                          data.split.test);
  return out;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ConfigError("cannot summarize an empty set of values");
  double sum = 0.0;
  for (double v : values) sum += v;
  Summary s;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::sparsity:
      return "sparsity";
    case SweepAxis::lambda:
      return "lambda";
    case SweepAxis::beta:
      return "beta";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::sparsity, SweepAxis::lambda, SweepAxis::beta}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + name + "' (expected sparsity, lambda or beta)");
}

SweepResult run_sparsity_sweep(const AttributedGraph& graph, const TrainConfig& base,
                               std::span<const double> fractions,
                               std::span<const std::uint64_t> seeds, const RunCallback& on_run) {
  require_seeds(seeds);
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError("sparsity fractions must lie in (0, 1], got " + std::to_string(f));
    }
  }
  SweepResult result;
  result.axis = SweepAxis::sparsity;
  for (double f : fractions) {
    SweepPoint point = make_point(f);
    for (std::uint64_t seed : seeds) {
      TrainConfig config = base;
      config.seed = seed;
      config.require_labeled_users = false;
      const RunOutcome run = run_single(graph, config, f);
      point.seeds.push_back(seed);
      point.accuracies.push_back(run.test_metrics.accuracy_cell);
      point.test_mask_fingerprints.push_back(run.test_mask_fingerprint);
      if (on_run) on_run("sparsity=" + std::to_string(f), seed, run);
    }
    finish(point);
    result.points.push_back(std::move(point));
  }
  return result;
}

SweepResult run_weight_sweep(const AttributedGraph& graph, const TrainConfig& base, SweepAxis axis,
                             std::span<const double> values, std::span<const std::uint64_t> seeds,
                             const RunCallback& on_run) {
  if (axis == SweepAxis::sparsity) {
    throw ConfigError("run_weight_sweep handles lambda and beta; use run_sparsity_sweep");
  }
  require_seeds(seeds);
  SweepResult result;
  result.axis = axis;
  for (double v : values) {
    SweepPoint point = make_point(v);
    for (std::uint64_t seed : seeds) {
      TrainConfig config = base;
      config.seed = seed;
      (axis == SweepAxis::lambda ? config.lambda : config.beta) = v;
      const RunOutcome run = run_single(graph, config);
      point.seeds.push_back(seed);
      point.accuracies.push_back(run.test_metrics.accuracy_cell);
      point.test_mask_fingerprints.push_back(run.test_mask_fingerprint);
      if (on_run) on_run(to_string(axis) + "=" + std::to_string(v), seed, run);
    }
    finish(point);
    result.points.push_back(std::move(point));
  }
  return result;
}

const AblationRow& AblationResult::row(TrainMode mode) const {
  for (const auto& r : rows) {
    if (r.mode == mode) return r;
  }
  throw ConfigError("ablation result has no row for mode " + to_string(mode));
}

AblationResult run_ablations(const AttributedGraph& graph, const TrainConfig& base,
                             std::span<const TrainMode> modes, std::span<const std::uint64_t> seeds,
                             const RunCallback& on_run) {
  require_seeds(seeds);
  if (modes.empty()) throw ConfigError("at least one mode is required");
  AblationResult result;
  for (TrainMode mode : modes) {
    AblationRow row;
    row.mode = mode;
    result.rows.push_back(row);
  }
  // Seed-major so that a partial run still covers every mode for the seeds done.
  for (std::uint64_t seed : seeds) {
    for (AblationRow& row : result.rows) {
      TrainConfig config = base;
      config.seed = seed;
      config.mode = row.mode;
      const RunOutcome run = run_single(graph, config);
      row.seeds.push_back(seed);
      row.accuracies.push_back(run.test_metrics.accuracy_cell);
      row.test_mask_fingerprints.push_back(run.test_mask_fingerprint);
      if (on_run) on_run(to_string(row.mode), seed, run);
    }
  }
  for (AblationRow& row : result.rows) {
    const Summary s = summarize(row.accuracies);
    row.mean = s.mean;
    row.std_dev = s.std_dev;
  }
  return result;
}

}  // namespace attrinfer

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "attrinfer/experiments.hpp"
#include "attrinfer/graph.hpp"
#include "attrinfer/metrics.hpp"
#include "attrinfer/training.hpp"

namespace attrinfer {

// Everything one CLI invocation reports. Absent parts are omitted from
// metrics.json; sweep.csv and history.jsonl are always written, possibly empty.
struct ReportBundle {
  AttributeSchema schema;
  std::optional<MetricsReport> metrics;
  std::vector<IterationRecord> history;
  std::optional<SweepResult> sweep;
  std::optional<AblationResult> ablation;
};

// "%.10g"
std::string format_number(double v);

// Writes metrics.json, sweep.csv, history.jsonl and plotdata/*.csv under
// `out_dir` (created if needed), plus ablation.csv when an ablation is present.
// Identical bundles produce byte-identical files. Throws IoError naming the path.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

std::string metrics_json(const MetricsReport& metrics, const AttributeSchema& schema);

}  // namespace attrinfer

#include "attrinfer/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "attrinfer/error.hpp"
#include "json_util.hpp"

namespace attrinfer {
namespace {

using detail::Json;
using detail::round_significant;
namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

Json metrics_to_json(const MetricsReport& m, const AttributeSchema& schema) {
  Json labels = Json::array();
  for (std::size_t j = 0; j < schema.type_count(); ++j) {
    const AttributeType& type = schema.type(j);
    for (std::size_t l = 0; l < type.label_count(); ++l) {
      const std::size_t k = schema.offset(j) + l;
      const LabelCounts& c = m.counts.at(k);
      labels.push_back({{"attribute", type.name},
                        {"label", type.labels[l]},
                        {"tp", c.tp},
                        {"tn", c.tn},
                        {"fp", c.fp},
                        {"fn", c.fn},
                        {"precision", round_significant(m.precision.at(k))},
                        {"recall", round_significant(m.recall.at(k))}});
    }
  }
  Json per_attribute = Json::object();
  for (const auto& [name, acc] : m.per_attribute_accuracy) per_attribute[name] = round_significant(acc);
  return {{"accuracy_cell", round_significant(m.accuracy_cell)},
          {"accuracy_label", round_significant(m.accuracy_label)},
          {"macro_f1", round_significant(m.macro_f1)},
          {"test_cells", m.test_cells},
          {"per_attribute_accuracy", std::move(per_attribute)},
          {"labels", std::move(labels)}};
}

Json sweep_to_json(const SweepResult& s) {
  Json points = Json::array();
  for (const auto& p : s.points) {
    Json acc = Json::array();
    for (double a : p.accuracies) acc.push_back(round_significant(a));
    points.push_back({{"value", round_significant(p.value)},
                      {"mean", round_significant(p.mean)},
                      {"std", round_significant(p.std_dev)},
                      {"seeds", p.seeds},
                      {"accuracies", std::move(acc)}});
  }
  return {{"axis", to_string(s.axis)}, {"points", std::move(points)}};
}

Json ablation_to_json(const AblationResult& a) {
  Json rows = Json::array();
  for (const auto& r : a.rows) {
    Json acc = Json::array();
    for (double v : r.accuracies) acc.push_back(round_significant(v));
    rows.push_back({{"mode", to_string(r.mode)},
                    {"mean", round_significant(r.mean)},
                    {"std", round_significant(r.std_dev)},
                    {"seeds", r.seeds},
                    {"accuracies", std::move(acc)}});
  }
  return rows;
}

std::string sweep_csv(const std::optional<SweepResult>& sweep) {
  std::ostringstream out;
  out << "axis,value,mean,std,n_seeds\n";
  if (sweep) {
    for (const auto& p : sweep->points) {
      out << to_string(sweep->axis) << ',' << format_number(p.value) << ',' << format_number(p.mean)
          << ',' << format_number(p.std_dev) << ',' << p.seeds.size() << '\n';
    }
  }
  return out.str();
}

std::string sweep_runs_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "axis,value,seed,accuracy_cell\n";
  for (const auto& p : sweep.points) {
    for (std::size_t k = 0; k < p.seeds.size(); ++k) {
      out << to_string(sweep.axis) << ',' << format_number(p.value) << ',' << p.seeds[k] << ','
          << format_number(p.accuracies[k]) << '\n';
    }
  }
  return out.str();
}

std::string ablation_csv(const AblationResult& a) {
  std::ostringstream out;
  out << "mode,mean,std,n_seeds\n";
  for (const auto& r : a.rows) {
    out << to_string(r.mode) << ',' << format_number(r.mean) << ',' << format_number(r.std_dev)
        << ',' << r.seeds.size() << '\n';
  }
  return out.str();
}

std::string ablation_runs_csv(const AblationResult& a) {
  std::ostringstream out;
  out << "mode,seed,accuracy_cell\n";
  for (const auto& r : a.rows) {
    for (std::size_t k = 0; k < r.seeds.size(); ++k) {
      out << to_string(r.mode) << ',' << r.seeds[k] << ',' << format_number(r.accuracies[k]) << '\n';
    }
  }
  return out.str();
}

std::string loss_curve_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out << "iteration,l_vae,l_recon,l_kl,l_d,l_gnn,l_mi,total,validation_accuracy\n";
  for (const auto& r : history) {
    const LossBreakdown& l = r.losses;
    out << r.iteration << ',' << format_number(l.l_vae) << ',' << format_number(l.l_recon) << ','
        << format_number(l.l_kl) << ',' << format_number(l.l_d) << ',' << format_number(l.l_gnn)
        << ',' << format_number(l.l_mi) << ',' << format_number(l.total) << ','
        << (r.validation_accuracy ? format_number(*r.validation_accuracy) : "") << '\n';
  }
  return out.str();
}

std::string per_attribute_csv(const MetricsReport& m) {
  std::ostringstream out;
  out << "attribute,accuracy_cell\n";
  for (const auto& [name, acc] : m.per_attribute_accuracy) out << name << ',' << format_number(acc) << '\n';
  return out.str();
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string metrics_json(const MetricsReport& metrics, const AttributeSchema& schema) {
  return metrics_to_json(metrics, schema).dump(2);
}

void emit_report(const ReportBundle& bundle, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "plotdata", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "plotdata").string() + ": " + ec.message());

  Json root = Json::object();
  if (bundle.metrics) root["test"] = metrics_to_json(*bundle.metrics, bundle.schema);
  if (bundle.sweep) root["sweep"] = sweep_to_json(*bundle.sweep);
  if (bundle.ablation) root["ablation"] = ablation_to_json(*bundle.ablation);
  write_file(out_dir / "metrics.json", root.dump(2) + "\n");

  write_file(out_dir / "sweep.csv", sweep_csv(bundle.sweep));

  std::string history;
  for (const auto& r : bundle.history) history += history_line(r) + "\n";
  write_file(out_dir / "history.jsonl", history);

  write_file(out_dir / "plotdata" / "loss_curve.csv", loss_curve_csv(bundle.history));
  if (bundle.metrics) {
    write_file(out_dir / "plotdata" / "per_attribute_accuracy.csv", per_attribute_csv(*bundle.metrics));
  }
  if (bundle.sweep) write_file(out_dir / "plotdata" / "sweep_runs.csv", sweep_runs_csv(*bundle.sweep));
  if (bundle.ablation) {
    write_file(out_dir / "ablation.csv", ablation_csv(*bundle.ablation));
    write_file(out_dir / "plotdata" / "ablation_runs.csv", ablation_runs_csv(*bundle.ablation));
  }
}

}  // namespace attrinfer

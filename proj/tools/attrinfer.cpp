// Command-line front end: train, eval, sweep, ablate, synth.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attrinfer/checkpoint.hpp"
#include "attrinfer/error.hpp"
#include "attrinfer/experiments.hpp"
#include "attrinfer/graph_io.hpp"
#include "attrinfer/metrics.hpp"
#include "attrinfer/report.hpp"
#include "attrinfer/synthetic.hpp"
#include "attrinfer/training.hpp"

namespace fs = std::filesystem;
using namespace attrinfer;

namespace {

struct DataOptions {
  std::string schema;
  std::string nodes;
  std::string edges;
  bool benchmark = false;
  std::uint64_t graph_seed = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--schema", schema, "schema.json");
    cmd.add_option("--nodes", nodes, "nodes.tsv");
    cmd.add_option("--edges", edges, "edges.tsv");
    cmd.add_flag("--benchmark", benchmark,
                 "use the built-in synthetic benchmark graph instead of files");
    cmd.add_option("--graph-seed", graph_seed, "seed for --benchmark")->capture_default_str();
  }

  AttributedGraph load() const {
    if (benchmark) {
      if (!schema.empty() || !nodes.empty() || !edges.empty()) {
        throw ConfigError("--benchmark cannot be combined with --schema/--nodes/--edges");
      }
      Rng rng(graph_seed);
      return generate_synthetic(benchmark_synthetic_config(), rng).graph;
    }
    if (schema.empty() || nodes.empty() || edges.empty()) {
      throw ConfigError("--schema, --nodes and --edges are required (or pass --benchmark)");
    }
    return load_graph(schema, nodes, edges);
  }
};

struct TrainOptions {
  std::string mode = "full";
  std::size_t iterations = 500;
  double beta = 0.3;
  double lambda = 0.2;
  double lr = 0.01;
  double disc_lr = 0.001;
  std::optional<double> kl_weight;
  std::uint64_t seed = 0;

  void add_to(CLI::App& cmd, bool with_seed) {
    cmd.add_option("--mode", mode, "full|no_adversary|no_mi|vanilla_vae|gcn_vae")
        ->capture_default_str();
    cmd.add_option("--iters", iterations, "training iterations")->capture_default_str();
    cmd.add_option("--beta", beta, "adversarial weight")->capture_default_str();
    cmd.add_option("--lambda", lambda, "MI constraint weight")->capture_default_str();
    cmd.add_option("--lr", lr, "encoder/decoder learning rate")->capture_default_str();
    cmd.add_option("--disc-lr", disc_lr, "adversarial learning rate (discriminator and generator steps)")->capture_default_str();
    cmd.add_option("--kl-weight", kl_weight, "KL scale inside the VAE term (default 1/N)");
    if (with_seed) cmd.add_option("--seed", seed, "run seed")->capture_default_str();
  }

  TrainConfig config() const {
    TrainConfig c;
    c.mode = parse_train_mode(mode);
    c.iterations = iterations;
    c.beta = beta;
    c.lambda = lambda;
    c.lr_model = lr;
    c.lr_adversarial = disc_lr;
    c.lr_disc = disc_lr;
    c.kl_weight = kl_weight;
    c.seed = seed;
    c.validate();
    return c;
  }
};

void log_run(const std::string& label, std::uint64_t seed, const RunOutcome& run) {
  std::cerr << label << " seed=" << seed
            << " accuracy_cell=" << format_number(run.test_metrics.accuracy_cell)
            << " best_iteration=" << run.training.best_iteration << '\n';
}

void write_predictions(const fs::path& path, const LabelMatrix& predictions) {
  write_assignments(predictions.n_users, predictions.n_types, predictions.labels, path);
}

int cmd_train(const DataOptions& data_opts, const TrainOptions& train_opts, const std::string& out) {
  const AttributedGraph graph = data_opts.load();
  const TrainConfig config = train_opts.config();
  fs::create_directories(out);
  std::ofstream live(fs::path(out) / "history.jsonl");
  if (!live) throw IoError("cannot write " + (fs::path(out) / "history.jsonl").string());
  const RunOutcome run = run_single(graph, config, std::nullopt, [&](const IterationRecord& r) {
    live << history_line(r) << '\n';
    if (r.validation_accuracy) {
      std::cerr << "iteration " << r.iteration << " total=" << format_number(r.losses.total)
                << " validation_accuracy=" << format_number(*r.validation_accuracy) << '\n';
    }
  });
  live.close();

  save_checkpoint(fs::path(out) / "checkpoint.json", run.training.best_params, config, graph.schema());
  ReportBundle bundle{graph.schema(), run.test_metrics, run.training.history, std::nullopt,
                      std::nullopt};
  emit_report(bundle, out);
  std::cout << "accuracy_cell " << format_number(run.test_metrics.accuracy_cell) << "\n"
            << "accuracy_label " << format_number(run.test_metrics.accuracy_label) << "\n"
            << "macro_f1 " << format_number(run.test_metrics.macro_f1) << "\n";
  return 0;
}

int cmd_eval(const DataOptions& data_opts, const std::string& checkpoint, const std::string& out) {
  const AttributedGraph graph = data_opts.load();
  const Checkpoint cp = load_checkpoint(checkpoint, graph.schema());
  Rng split_rng = stream_rng(cp.config.seed, SeedStream::split);
  const TrainingData data = prepare_training_data(graph, split_labels(graph, cp.config.split, split_rng));
  const DenseMatrix x_hat = infer(cp.params, data);
  const MetricsReport metrics = evaluate_predictions(x_hat, data.graph, data.split.test);
  fs::create_directories(out);
  ReportBundle bundle{graph.schema(), metrics, {}, std::nullopt, std::nullopt};
  emit_report(bundle, out);
  write_predictions(fs::path(out) / "predictions.tsv", predict_labels(x_hat, graph.schema()));
  std::cout << "accuracy_cell " << format_number(metrics.accuracy_cell) << "\n"
            << "accuracy_label " << format_number(metrics.accuracy_label) << "\n"
            << "macro_f1 " << format_number(metrics.macro_f1) << "\n";
  return 0;
}

int cmd_sweep(const DataOptions& data_opts, const TrainOptions& train_opts, const std::string& axis_name,
              const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
              const std::string& out) {
  const AttributedGraph graph = data_opts.load();
  const TrainConfig config = train_opts.config();
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const SweepResult result = axis == SweepAxis::sparsity
                                 ? run_sparsity_sweep(graph, config, values, seeds, log_run)
                                 : run_weight_sweep(graph, config, axis, values, seeds, log_run);
  ReportBundle bundle{graph.schema(), std::nullopt, {}, result, std::nullopt};
  emit_report(bundle, out);
  for (const auto& p : result.points) {
    std::cout << axis_name << ' ' << format_number(p.value) << " mean " << format_number(p.mean)
              << " std " << format_number(p.std_dev) << "\n";
  }
  return 0;
}

int cmd_ablate(const DataOptions& data_opts, const TrainOptions& train_opts,
               const std::vector<std::string>& mode_names, const std::vector<std::uint64_t>& seeds,
               const std::string& out) {
  const AttributedGraph graph = data_opts.load();
  const TrainConfig config = train_opts.config();
  std::vector<TrainMode> modes;
  for (const auto& m : mode_names) modes.push_back(parse_train_mode(m));
  if (modes.empty()) modes.assign(std::begin(kAllModes), std::end(kAllModes));
  const AblationResult result = run_ablations(graph, config, modes, seeds, log_run);
  ReportBundle bundle{graph.schema(), std::nullopt, {}, std::nullopt, result};
  emit_report(bundle, out);
  for (const auto& r : result.rows) {
    std::cout << to_string(r.mode) << " mean " << format_number(r.mean) << " std "
              << format_number(r.std_dev) << "\n";
  }
  return 0;
}

int cmd_synth(std::size_t users, std::size_t communities, double homophily, double missing,
              double mean_degree, const std::vector<std::size_t>& labels, std::uint64_t seed,
              const std::string& out) {
  SyntheticConfig config = benchmark_synthetic_config(users);
  config.n_communities = communities;
  config.homophily = homophily;
  config.missing_rate = missing;
  config.mean_degree = mean_degree;
  if (!labels.empty()) config.schema = AttributeSchema::from_label_counts(labels);
  Rng rng(seed);
  const SyntheticGraph sg = generate_synthetic(config, rng);
  fs::create_directories(out);
  write_synthetic(sg, out);
  std::cout << "users " << sg.graph.user_count() << " edges " << sg.graph.edges().size()
            << " observed_cells " << sg.graph.observed_cell_count() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute inference on attributed social graphs"};
  app.require_subcommand(1);

  DataOptions data_opts;
  TrainOptions train_opts;
  std::string out;

  CLI::App* train_cmd = app.add_subcommand("train", "train a model and evaluate it on the test cells");
  data_opts.add_to(*train_cmd);
  train_opts.add_to(*train_cmd, true);
  train_cmd->add_option("--out", out, "output directory")->required();

  std::string checkpoint;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test cells");
  data_opts.add_to(*eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
  eval_cmd->add_option("--out", out, "output directory")->required();

  std::string axis;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep sparsity, lambda or beta over seeds");
  data_opts.add_to(*sweep_cmd);
  train_opts.add_to(*sweep_cmd, false);
  sweep_cmd->add_option("--axis", axis, "sparsity|lambda|beta")->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values")->required()->delimiter(',');
  sweep_cmd->add_option("--seeds", seeds, "comma-separated seeds")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out, "output directory")->required();

  std::vector<std::string> modes;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "compare training modes over seeds");
  data_opts.add_to(*ablate_cmd);
  train_opts.add_to(*ablate_cmd, false);
  ablate_cmd->add_option("--seeds", seeds, "comma-separated seeds")->required()->delimiter(',');
  ablate_cmd->add_option("--modes", modes, "comma-separated modes (default: all)")->delimiter(',');
  ablate_cmd->add_option("--out", out, "output directory")->required();

  std::size_t users = 300;
  std::size_t communities = 3;
  double homophily = 0.8;
  double missing = 0.3;
  double mean_degree = 10.0;
  std::vector<std::size_t> label_counts;
  std::uint64_t synth_seed = 0;
  CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic planted-community graph");
  synth_cmd->add_option("--users", users, "number of users")->capture_default_str();
  synth_cmd->add_option("--communities", communities, "planted communities")->capture_default_str();
  synth_cmd->add_option("--homophily", homophily, "probability a label follows its community")->capture_default_str();
  synth_cmd->add_option("--missing", missing, "fraction of cells left unlabeled")->capture_default_str();
  synth_cmd->add_option("--mean-degree", mean_degree, "expected degree")->capture_default_str();
  synth_cmd->add_option("--labels", label_counts, "labels per attribute type (default 3,4,5)")
      ->delimiter(',');
  synth_cmd->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(data_opts, train_opts, out);
    if (*eval_cmd) return cmd_eval(data_opts, checkpoint, out);
    if (*sweep_cmd) return cmd_sweep(data_opts, train_opts, axis, values, seeds, out);
    if (*ablate_cmd) return cmd_ablate(data_opts, train_opts, modes, seeds, out);
    if (*synth_cmd) {
      return cmd_synth(users, communities, homophily, missing, mean_degree, label_counts, synth_seed, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

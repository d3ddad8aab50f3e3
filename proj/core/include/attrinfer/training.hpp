#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrinfer/adam.hpp"
#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/graph.hpp"
#include "attrinfer/losses.hpp"
#include "attrinfer/model.hpp"
#include "attrinfer/rng.hpp"
#include "attrinfer/sparse_matrix.hpp"

namespace attrinfer {

// Which objective terms are trained.
//   full          reconstruction + KL, MI constraint, adversarial game
//   no_adversary  no discriminator steps
//   no_mi         MI constraint weight forced to zero
//   gcn_vae       reconstruction + KL only
//   vanilla_vae   reconstruction + KL with a dense encoder instead of the GCN
enum class TrainMode { full, no_adversary, no_mi, gcn_vae, vanilla_vae };

std::string to_string(TrainMode mode);
// Throws ConfigError for an unknown name.
TrainMode parse_train_mode(std::string_view name);

bool uses_adversary(TrainMode mode);
bool uses_mi(TrainMode mode);
EncoderKind encoder_kind(TrainMode mode);

struct TrainConfig {
  std::size_t iterations = 500;
  double lr_model = 0.01;
  double lr_disc = 0.001;
  double lr_adversarial = 0.001;  // generator-side step of the adversarial game
  double beta = 0.3;
  double lambda = 0.2;
  // Scale of the KL term inside L_VAE. Unset means 1 / N, the normalization of
  // the reference variational graph autoencoder; 1.0 collapses the posterior on
  // sparse attribute data because reconstruction is averaged over cells.
  std::optional<double> kl_weight;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::full;
  ModelDims dims;  // `features` and `encoder` are filled in from the data and mode
  SplitRatios split;
  std::size_t eval_every = 10;
  // When false, a training view without any fully visible user is accepted and
  // the adversarial steps and the MI term are skipped for that run.
  bool require_labeled_users = true;

  // Throws ConfigError describing the first invalid field.
  void validate() const;
};

// Named seed streams; every run derives its generators from TrainConfig::seed.
enum class SeedStream : std::uint64_t { split = 1, init = 2, noise = 3, sparsify = 4 };
Rng stream_rng(std::uint64_t seed, SeedStream stream);

// Everything a run reads from the graph and its label split.
struct TrainingData {
  AttributedGraph graph;
  LabelSplit split;
  DenseMatrix features;   // built from split.train only
  SparseMatrix a_norm;
  UserPartition partition;

  const AttributeSchema& schema() const { return graph.schema(); }
  std::size_t user_count() const { return graph.user_count(); }
};

// The partition may come back with no labeled users; init_train_state decides
// whether the configured mode can live with that.
TrainingData prepare_training_data(const AttributedGraph& graph, LabelSplit split);

double effective_kl_weight(const TrainConfig& config, std::size_t n_users);

// Model dims for `config` on data with `features` columns.
ModelDims resolve_dims(const TrainConfig& config, std::size_t features);

// Term selection, gradient weights and routing for one objective evaluation.
// A term's gradient reaches a parameter group only through the flags set here;
// everything else is treated as a constant.
struct ObjectiveSpec {
  bool vae = false;  // reconstruction + KL; gradient reaches both encoders and the decoder
  double vae_weight = 1.0;
  double kl_weight = 1.0;  // KL scale inside the VAE term

  bool mi = false;
  double mi_weight = 0.0;
  bool mi_to_decoder = false;
  bool mi_to_encoders = false;

  bool disc = false;
  double disc_weight = 1.0;
  bool disc_to_discriminator = false;
  bool disc_to_encoders = false;

  bool gen = false;
  double gen_weight = 1.0;
  bool gen_to_graph_encoder = false;
  bool gen_to_mlp_encoder = false;
  bool gen_to_discriminator = false;

  // The full weighted objective with every gradient path open.
  static ObjectiveSpec everything(double beta, double lambda, bool with_mi, bool with_adversary);
};

struct ObjectiveValue {
  double l_recon = 0.0;
  double l_kl = 0.0;
  double l_mi = 0.0;
  double l_d = 0.0;
  double l_gnn = 0.0;
  // Σ weight · term over the evaluated terms.
  double weighted = 0.0;
};

// Evaluates the selected terms at `params` with reparameterization noise `eps`.
// When `grads` is non-null it must be shaped like `params` and receives the
// routed gradient of `weighted` (accumulated, not overwritten).
ObjectiveValue evaluate_objective(const ModelParams& params, const TrainingData& data,
                                  const DenseMatrix& eps, const ObjectiveSpec& spec,
                                  ModelParams* grads);

enum class SubStep { vae_update, discriminator_update, adversarial_update };
using SubStepObserver = std::function<void(SubStep, const ModelParams&)>;

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  LossBreakdown losses;
  std::optional<double> validation_accuracy;
};

struct TrainState {
  ModelParams params;
  AdamState model_opt;        // both encoders and the decoder
  AdamState disc_opt;         // discriminator
  AdamState adversarial_opt;  // graph encoder, driven by the generator loss
  Rng noise{0};
  std::size_t iteration = 0;
  bool adversary_active = false;
  bool mi_active = false;
};

TrainState init_train_state(const TrainConfig& config, const TrainingData& data);

// One alternating iteration: (1) reconstruction + KL + weighted MI update of
// encoders and decoder, MI reaching the decoder only; (2) discriminator update
// on fresh noise; (3) generator update of the graph encoder on the same noise.
// Steps 2 and 3 run only when the adversary is active. Throws NumericalError
// with the iteration number when any loss goes non-finite.
LossBreakdown train_step(TrainState& state, const TrainConfig& config, const TrainingData& data,
                         const SubStepObserver& observer = {});

struct TrainResult {
  ModelParams best_params;  // snapshot with the highest validation accuracy
  ModelParams final_params;
  std::vector<IterationRecord> history;
  double best_validation_accuracy = 0.0;
  std::size_t best_iteration = 0;
  bool adversary_active = false;
  bool mi_active = false;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

TrainResult train(const TrainConfig& config, const TrainingData& data,
                  const IterationCallback& on_iteration = {}, const SubStepObserver& observer = {});

// Deterministic reconstruction: the user latent is its mean (noise = 0).
DenseMatrix infer(const ModelParams& params, const TrainingData& data);

// One JSON object per line with the loss breakdown and optional validation accuracy.
std::string history_line(const IterationRecord& record);

}  // namespace attrinfer

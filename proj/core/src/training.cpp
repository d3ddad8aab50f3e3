#include "attrinfer/training.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "attrinfer/error.hpp"
#include "attrinfer/metrics.hpp"
#include "attrinfer/numerics.hpp"
#include "json_util.hpp"

namespace attrinfer {
namespace {

constexpr ParamGroup kModelGroups[] = {ParamGroup::mlp_encoder, ParamGroup::graph_encoder,
                                       ParamGroup::decoder};

std::vector<DenseMatrix*> group_tensors(ModelParams& params, std::span<const ParamGroup> groups) {
  std::vector<DenseMatrix*> out;
  for (ParamGroup g : groups) {
    for (DenseMatrix* t : params.tensors(g)) out.push_back(t);
  }
  return out;
}

std::vector<const DenseMatrix*> group_tensors(const ModelParams& params,
                                              std::span<const ParamGroup> groups) {
  std::vector<const DenseMatrix*> out;
  for (ParamGroup g : groups) {
    for (const DenseMatrix* t : params.tensors(g)) out.push_back(t);
  }
  return out;
}

// Moves the gradient tensors of `groups` out of `grads`.
std::vector<DenseMatrix> take_grads(ModelParams& grads, std::span<const ParamGroup> groups) {
  std::vector<DenseMatrix> out;
  for (DenseMatrix* t : group_tensors(grads, groups)) out.push_back(std::move(*t));
  return out;
}

void update(ModelParams& params, ModelParams& grads, std::span<const ParamGroup> groups,
            AdamState& opt) {
  const std::vector<DenseMatrix*> targets = group_tensors(params, groups);
  const std::vector<DenseMatrix> g = take_grads(grads, groups);
  adam_step(targets, g, opt);
}

// target += weight · g, allocating target on first use.
void accumulate(DenseMatrix& target, const DenseMatrix& g, double weight = 1.0) {
  if (target.empty()) target = DenseMatrix(g.rows(), g.cols());
  scaled_add_in_place(target, weight, g);
}

void require_positive(const char* field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(field) + " must be a positive finite number, got " +
                      std::to_string(v));
  }
}

void require_non_negative(const char* field, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(field) + " must be a non-negative finite number, got " +
                      std::to_string(v));
  }
}

double validation_accuracy(const ModelParams& params, const TrainingData& data) {
  const LabelMatrix predictions = predict_labels(infer(params, data), data.schema());
  return accuracy(predictions, data.graph, data.split.validation).accuracy_cell;
}

}  // namespace

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::full:
      return "full";
    case TrainMode::no_adversary:
      return "no_adversary";
    case TrainMode::no_mi:
      return "no_mi";
    case TrainMode::gcn_vae:
      return "gcn_vae";
    case TrainMode::vanilla_vae:
      return "vanilla_vae";
  }
  return "unknown";
}

TrainMode parse_train_mode(std::string_view name) {
  for (TrainMode m : {TrainMode::full, TrainMode::no_adversary, TrainMode::no_mi, TrainMode::gcn_vae,
                      TrainMode::vanilla_vae}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + std::string(name) +
                    "' (expected full, no_adversary, no_mi, gcn_vae or vanilla_vae)");
}

bool uses_adversary(TrainMode mode) { return mode == TrainMode::full || mode == TrainMode::no_mi; }

bool uses_mi(TrainMode mode) { return mode == TrainMode::full || mode == TrainMode::no_adversary; }

EncoderKind encoder_kind(TrainMode mode) {
  return mode == TrainMode::vanilla_vae ? EncoderKind::dense : EncoderKind::graph;
}

void TrainConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations must be at least 1");
  if (eval_every == 0) throw ConfigError("eval_every must be at least 1");
  require_positive("lr_model", lr_model);
  require_positive("lr_disc", lr_disc);
  require_positive("lr_adversarial", lr_adversarial);
  require_non_negative("beta", beta);
  require_non_negative("lambda", lambda);
  if (kl_weight) require_non_negative("kl_weight", *kl_weight);
}

Rng stream_rng(std::uint64_t seed, SeedStream stream) {
  return Rng::derive(seed, static_cast<std::uint64_t>(stream));
}

TrainingData prepare_training_data(const AttributedGraph& graph, LabelSplit split) {
  if (split.train.user_count() != graph.user_count() ||
      split.train.type_count() != graph.type_count()) {
    throw DimensionError("label split does not match the graph's " +
                         std::to_string(graph.user_count()) + " users and " +
                         std::to_string(graph.type_count()) + " attribute types");
  }
  TrainingData data;
  data.graph = graph;
  data.features = build_feature_matrix(graph, split.train);
  data.a_norm = normalize_adjacency(graph);
  data.partition = partition_users_unchecked(graph, split.train);
  data.split = std::move(split);
  return data;
}

double effective_kl_weight(const TrainConfig& config, std::size_t n_users) {
  if (config.kl_weight) return *config.kl_weight;
  if (n_users == 0) throw ConfigError("the graph has no users");
  return 1.0 / static_cast<double>(n_users);
}

ModelDims resolve_dims(const TrainConfig& config, std::size_t features) {
  ModelDims dims = config.dims;
  dims.features = features;
  dims.encoder = encoder_kind(config.mode);
  return dims;
}

ObjectiveSpec ObjectiveSpec::everything(double beta, double lambda, bool with_mi,
                                        bool with_adversary) {
  ObjectiveSpec s;
  s.vae = true;
  s.mi = with_mi;
  s.mi_weight = lambda;
  s.mi_to_decoder = s.mi_to_encoders = with_mi;
  s.disc = s.gen = with_adversary;
  s.disc_weight = s.gen_weight = beta;
  s.disc_to_discriminator = s.disc_to_encoders = with_adversary;
  s.gen_to_graph_encoder = s.gen_to_mlp_encoder = s.gen_to_discriminator = with_adversary;
  return s;
}

ObjectiveValue evaluate_objective(const ModelParams& params, const TrainingData& data,
                                  const DenseMatrix& eps, const ObjectiveSpec& spec,
                                  ModelParams* grads) {
  const std::size_t n = data.user_count();
  const std::size_t d = params.dims.latent;
  if (eps.rows() != n || eps.cols() != d) {
    throw DimensionError("noise is " + eps.shape_string() + ", expected " + std::to_string(n) +
                         "x" + std::to_string(d));
  }
  if (grads != nullptr && grads->dims != params.dims) {
    throw DimensionError("gradient accumulator does not match the model dimensions");
  }
  if (spec.gen_to_mlp_encoder && !spec.gen_to_graph_encoder) {
    throw ConfigError("the generator gradient cannot reach the MLP encoder without passing "
                      "through the graph encoder");
  }
  const bool want = grads != nullptr;
  const auto blocks = data.schema().blocks();

  ObjectiveValue out;
  const MlpEncoderPass mlp = mlp_encoder_forward(params, data.features);
  if (!(spec.vae || spec.mi || spec.disc || spec.gen)) return out;
  const LatentEncoderPass lat = latent_encoder_forward(params, mlp.z_m, data.a_norm, eps);

  // Upstream gradients. The *_full ones continue into the MLP encoder through
  // the latent encoder; zu_graph_only stops at the latent encoder.
  DenseMatrix g_mu, g_lv, g_zu_full, g_zu_graph_only, g_zm_direct;
  bool into_mlp = false;

  if (spec.vae || spec.mi) {
    const DecoderPass dec_u = decoder_forward(params, lat.z_u, blocks);
    DenseMatrix g_probs_vae;
    DenseMatrix g_probs_mi;
    if (spec.vae) {
      DenseMatrix g_recon, gm, gl;
      out.l_recon = recon_loss(dec_u.probs, data.features, data.split.train, data.schema(),
                               want ? &g_recon : nullptr);
      out.l_kl = kl_gauss(lat.mu, lat.log_var, want ? &gm : nullptr, want ? &gl : nullptr);
      out.weighted += spec.vae_weight * (out.l_recon + spec.kl_weight * out.l_kl);
      if (want) {
        scale_in_place(g_recon, spec.vae_weight);
        g_probs_vae = std::move(g_recon);
        accumulate(g_mu, gm, spec.vae_weight * spec.kl_weight);
        accumulate(g_lv, gl, spec.vae_weight * spec.kl_weight);
        into_mlp = true;
      }
    }
    if (spec.mi) {
      const DecoderPass dec_m = decoder_forward(params, mlp.z_m, blocks);
      const bool mi_grad =
          want && (spec.mi_to_decoder || spec.mi_to_encoders) && spec.mi_weight != 0.0;
      DenseMatrix g_xm, g_xu;
      out.l_mi = mi_constraint(dec_m.probs, dec_u.probs, data.partition,
                               mi_grad ? &g_xm : nullptr, mi_grad ? &g_xu : nullptr);
      out.weighted += spec.mi_weight * out.l_mi;
      if (mi_grad) {
        scale_in_place(g_xm, spec.mi_weight);
        scale_in_place(g_xu, spec.mi_weight);
        DenseMatrix dz = decoder_backward(params, mlp.z_m, dec_m, g_xm, blocks,
                                          spec.mi_to_decoder ? grads : nullptr, spec.mi_to_encoders);
        if (spec.mi_to_encoders) {
          accumulate(g_zm_direct, dz);
          into_mlp = true;
        }
        g_probs_mi = std::move(g_xu);
      }
    }
    if (want && !(g_probs_vae.empty() && g_probs_mi.empty())) {
      // The decoder weights see VAE + (MI if routed to the decoder); the user
      // latent sees VAE + (MI if routed to the encoders). Backward is linear in
      // the upstream gradient, so differing mixes take two passes.
      DenseMatrix to_params = g_probs_vae;
      DenseMatrix to_input = g_probs_vae;
      if (!g_probs_mi.empty() && spec.mi_to_decoder) accumulate(to_params, g_probs_mi);
      if (!g_probs_mi.empty() && spec.mi_to_encoders) accumulate(to_input, g_probs_mi);
      if (spec.mi_to_decoder == spec.mi_to_encoders || g_probs_mi.empty()) {
        DenseMatrix dz = decoder_backward(params, lat.z_u, dec_u, to_params, blocks, grads,
                                          !to_input.empty());
        if (!dz.empty()) accumulate(g_zu_full, dz);
      } else {
        if (!to_params.empty()) {
          decoder_backward(params, lat.z_u, dec_u, to_params, blocks, grads, false);
        }
        if (!to_input.empty()) {
          accumulate(g_zu_full,
                     decoder_backward(params, lat.z_u, dec_u, to_input, blocks, nullptr, true));
        }
      }
    }
  }

  if (spec.disc || spec.gen) {
    const DiscriminatorPass neg = discriminator_forward(params, lat.z_u);
    if (spec.disc) {
      const DenseMatrix z_pos = gather_rows(mlp.z_m, data.partition.labeled);
      const DiscriminatorPass pos = discriminator_forward(params, z_pos);
      const bool d_grad = want && (spec.disc_to_discriminator || spec.disc_to_encoders);
      DenseMatrix gp, gn;
      out.l_d = disc_loss(pos.scores, neg.scores, d_grad ? &gp : nullptr, d_grad ? &gn : nullptr);
      out.weighted += spec.disc_weight * out.l_d;
      if (d_grad) {
        scale_in_place(gp, spec.disc_weight);
        scale_in_place(gn, spec.disc_weight);
        ModelParams* target = spec.disc_to_discriminator ? grads : nullptr;
        const DenseMatrix dz_pos =
            discriminator_backward(params, z_pos, pos, gp, target, spec.disc_to_encoders);
        const DenseMatrix dz_neg =
            discriminator_backward(params, lat.z_u, neg, gn, target, spec.disc_to_encoders);
        if (spec.disc_to_encoders) {
          if (g_zm_direct.empty()) g_zm_direct = DenseMatrix(n, d);
          scatter_add_rows(g_zm_direct, data.partition.labeled, dz_pos);
          accumulate(g_zu_full, dz_neg);
          into_mlp = true;
        }
      }
    }
    if (spec.gen) {
      const bool to_encoder = spec.gen_to_graph_encoder || spec.gen_to_mlp_encoder;
      const bool g_grad = want && (to_encoder || spec.gen_to_discriminator);
      DenseMatrix gn;
      out.l_gnn = gen_loss(neg.scores, g_grad ? &gn : nullptr);
      out.weighted += spec.gen_weight * out.l_gnn;
      if (g_grad) {
        scale_in_place(gn, spec.gen_weight);
        DenseMatrix dz = discriminator_backward(
            params, lat.z_u, neg, gn, spec.gen_to_discriminator ? grads : nullptr, to_encoder);
        if (spec.gen_to_mlp_encoder) {
          accumulate(g_zu_full, dz);
          into_mlp = true;
        } else if (spec.gen_to_graph_encoder) {
          accumulate(g_zu_graph_only, dz);
        }
      }
    }
  }

  if (!want) return out;
  DenseMatrix g_zm_latent;
  if (!(g_mu.empty() && g_lv.empty() && g_zu_full.empty())) {
    g_zm_latent = latent_encoder_backward(params, mlp.z_m, data.a_norm, lat, g_mu, g_lv, g_zu_full,
                                          *grads);
  }
  if (!g_zu_graph_only.empty()) {
    latent_encoder_backward(params, mlp.z_m, data.a_norm, lat, DenseMatrix{}, DenseMatrix{},
                            g_zu_graph_only, *grads);
  }
  if (into_mlp) {
    DenseMatrix g_zm = g_zm_direct.empty() ? DenseMatrix(n, d) : std::move(g_zm_direct);
    if (!g_zm_latent.empty()) add_in_place(g_zm, g_zm_latent);
    mlp_encoder_backward(params, data.features, mlp, g_zm, *grads);
  }
  return out;
}

TrainState init_train_state(const TrainConfig& config, const TrainingData& data) {
  config.validate();
  const bool has_labeled = !data.partition.labeled.empty();
  if (!has_labeled && config.require_labeled_users &&
      (uses_adversary(config.mode) || uses_mi(config.mode))) {
    throw ConfigError("mode " + to_string(config.mode) +
                      " needs at least one user with every attribute visible in the training view");
  }
  TrainState state;
  Rng init = stream_rng(config.seed, SeedStream::init);
  state.params = ModelParams::glorot(resolve_dims(config, data.features.cols()), init);
  state.noise = stream_rng(config.seed, SeedStream::noise);
  state.adversary_active = uses_adversary(config.mode) && has_labeled;
  state.mi_active = uses_mi(config.mode) && has_labeled;

  const ParamGroup disc_group[] = {ParamGroup::discriminator};
  const ParamGroup graph_group[] = {ParamGroup::graph_encoder};
  const ModelParams& p = state.params;
  state.model_opt = AdamState({.learning_rate = config.lr_model}, group_tensors(p, kModelGroups));
  state.disc_opt = AdamState({.learning_rate = config.lr_disc}, group_tensors(p, disc_group));
  state.adversarial_opt =
      AdamState({.learning_rate = config.lr_adversarial}, group_tensors(p, graph_group));
  return state;
}

LossBreakdown train_step(TrainState& state, const TrainConfig& config, const TrainingData& data,
                         const SubStepObserver& observer) {
  ++state.iteration;
  const std::size_t n = data.user_count();
  const std::size_t d = state.params.dims.latent;
  const double beta = state.adversary_active ? config.beta : 0.0;
  const double lambda = state.mi_active ? config.lambda : 0.0;
  const double kl_weight = effective_kl_weight(config, n);
  try {
    ObjectiveSpec vae_spec;
    vae_spec.vae = true;
    vae_spec.kl_weight = kl_weight;
    vae_spec.mi = state.mi_active;
    vae_spec.mi_weight = lambda;
    vae_spec.mi_to_decoder = true;
    ModelParams grads = ModelParams::zeros(state.params.dims);
    const ObjectiveValue v = evaluate_objective(state.params, data, state.noise.normal_matrix(n, d),
                                                vae_spec, &grads);
    update(state.params, grads, kModelGroups, state.model_opt);
    if (observer) observer(SubStep::vae_update, state.params);

    double l_d = 0.0;
    double l_gnn = 0.0;
    if (state.adversary_active) {
      const DenseMatrix eps = state.noise.normal_matrix(n, d);

      ObjectiveSpec disc_spec;
      disc_spec.disc = true;
      disc_spec.disc_to_discriminator = true;
      ModelParams disc_grads = ModelParams::zeros(state.params.dims);
      l_d = evaluate_objective(state.params, data, eps, disc_spec, &disc_grads).l_d;
      const ParamGroup disc_group[] = {ParamGroup::discriminator};
      update(state.params, disc_grads, disc_group, state.disc_opt);
      if (observer) observer(SubStep::discriminator_update, state.params);

      ObjectiveSpec gen_spec;
      gen_spec.gen = true;
      gen_spec.gen_weight = config.beta;
      gen_spec.gen_to_graph_encoder = true;
      ModelParams gen_grads = ModelParams::zeros(state.params.dims);
      l_gnn = evaluate_objective(state.params, data, eps, gen_spec, &gen_grads).l_gnn;
      const ParamGroup graph_group[] = {ParamGroup::graph_encoder};
      update(state.params, gen_grads, graph_group, state.adversarial_opt);
      if (observer) observer(SubStep::adversarial_update, state.params);
    }
    return make_breakdown(v.l_recon, v.l_kl, l_d, l_gnn, v.l_mi, beta, lambda, kl_weight);
  } catch (const NumericalError& e) {
    throw NumericalError("iteration " + std::to_string(state.iteration) + ": " + e.what());
  }
}

TrainResult train(const TrainConfig& config, const TrainingData& data,
                  const IterationCallback& on_iteration, const SubStepObserver& observer) {
  TrainState state = init_train_state(config, data);
  TrainResult result;
  result.adversary_active = state.adversary_active;
  result.mi_active = state.mi_active;
  bool have_snapshot = false;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    IterationRecord record;
    record.iteration = it;
    record.losses = train_step(state, config, data, observer);
    if (it % config.eval_every == 0 || it == config.iterations) {
      const double acc = validation_accuracy(state.params, data);
      record.validation_accuracy = acc;
      if (!have_snapshot || acc > result.best_validation_accuracy) {
        result.best_params = state.params;
        result.best_validation_accuracy = acc;
        result.best_iteration = it;
        have_snapshot = true;
      }
    }
    if (on_iteration) on_iteration(record);
    result.history.push_back(std::move(record));
  }
  result.final_params = std::move(state.params);
  return result;
}

DenseMatrix infer(const ModelParams& params, const TrainingData& data) {
  if (params.dims.features != data.schema().feature_count()) {
    throw SchemaError("model expects " + std::to_string(params.dims.features) +
                      " feature columns but the schema has " +
                      std::to_string(data.schema().feature_count()));
  }
  const DenseMatrix z_m = encode_mlp(data.features, params);
  const DenseMatrix eps(data.user_count(), params.dims.latent);
  const LatentEncoderPass lat = latent_encoder_forward(params, z_m, data.a_norm, eps);
  return decoder_forward(params, lat.mu, data.schema().blocks()).probs;
}

std::string history_line(const IterationRecord& record) {
  using detail::round_significant;
  const LossBreakdown& l = record.losses;
  detail::Json j = {{"iteration", record.iteration},
                    {"l_vae", round_significant(l.l_vae)},
                    {"l_recon", round_significant(l.l_recon)},
                    {"l_kl", round_significant(l.l_kl)},
                    {"l_d", round_significant(l.l_d)},
                    {"l_gnn", round_significant(l.l_gnn)},
                    {"l_mi", round_significant(l.l_mi)},
                    {"total", round_significant(l.total)},
                    {"beta", round_significant(l.beta)},
                    {"lambda", round_significant(l.lambda)},
                    {"kl_weight", round_significant(l.kl_weight)}};
  if (record.validation_accuracy) {
    j["validation_accuracy"] = round_significant(*record.validation_accuracy);
  }
  return j.dump();
}

}  // namespace attrinfer

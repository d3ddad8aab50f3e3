#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "attrinfer/adam.hpp"
#include "attrinfer/checkpoint.hpp"
#include "attrinfer/error.hpp"
#include "attrinfer/grad_check.hpp"
#include "attrinfer/losses.hpp"
#include "attrinfer/training.hpp"
#include "support/test_support.hpp"

namespace attrinfer {
namespace {

using testing::TempDir;
using testing::toy_data;
using testing::toy_dims;

TrainConfig toy_config(TrainMode mode = TrainMode::full, std::size_t iterations = 20) {
  TrainConfig c;
  c.mode = mode;
  c.iterations = iterations;
  c.seed = 7;
  c.dims = toy_dims(0);
  c.eval_every = 5;
  return c;
}

TEST(TrainConfig, DefaultsFollowTheReferenceSetup) {
  const TrainConfig c;
  EXPECT_EQ(c.iterations, 500u);
  EXPECT_EQ(c.lr_model, 0.01);
  EXPECT_EQ(c.lr_disc, 0.001);
  EXPECT_EQ(c.lr_adversarial, 0.001);
  EXPECT_EQ(c.beta, 0.3);
  EXPECT_EQ(c.lambda, 0.2);
  EXPECT_EQ(c.mode, TrainMode::full);
  EXPECT_EQ(c.dims.latent, 64u);
  EXPECT_EQ(c.dims.mlp_hidden, 64u);
  EXPECT_EQ(c.dims.gcn_hidden, 64u);
  EXPECT_EQ(c.dims.decoder_hidden, 128u);
  EXPECT_EQ(c.eval_every, 10u);
  EXPECT_NO_THROW(c.validate());
}

TEST(TrainConfig, InvalidFieldsAreConfigErrors) {
  TrainConfig c;
  c.iterations = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr_model = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.beta = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lambda = std::nan("");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(TrainMode, NamesRoundTripAndFlags) {
  for (TrainMode m : {TrainMode::full, TrainMode::no_adversary, TrainMode::no_mi,
                      TrainMode::gcn_vae, TrainMode::vanilla_vae}) {
    EXPECT_EQ(parse_train_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_train_mode("both"), ConfigError);
  EXPECT_TRUE(uses_adversary(TrainMode::full) && uses_mi(TrainMode::full));
  EXPECT_FALSE(uses_adversary(TrainMode::no_adversary));
  EXPECT_TRUE(uses_mi(TrainMode::no_adversary));
  EXPECT_FALSE(uses_mi(TrainMode::no_mi));
  EXPECT_FALSE(uses_adversary(TrainMode::vanilla_vae) || uses_mi(TrainMode::vanilla_vae));
  EXPECT_EQ(encoder_kind(TrainMode::vanilla_vae), EncoderKind::dense);
  EXPECT_EQ(encoder_kind(TrainMode::gcn_vae), EncoderKind::graph);
}

TEST(KlWeight, DefaultsToInverseUserCount) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(effective_kl_weight(c, 300), 1.0 / 300.0);
  c.kl_weight = 1.0;
  EXPECT_EQ(effective_kl_weight(c, 300), 1.0);
}

TEST(Train, SingleIterationGivesOneHistoryEntry) {
  const TrainingData data = toy_data();
  const TrainResult r = train(toy_config(TrainMode::full, 1), data);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_TRUE(r.history[0].validation_accuracy.has_value());
  EXPECT_EQ(r.best_iteration, 1u);
}

TEST(Train, ValidationEveryFewIterationsAndAtTheEnd) {
  const TrainingData data = toy_data();
  TrainConfig c = toy_config(TrainMode::full, 12);
  const TrainResult r = train(c, data);
  for (const auto& rec : r.history) {
    const bool expected = rec.iteration % 5 == 0 || rec.iteration == 12;
    EXPECT_EQ(rec.validation_accuracy.has_value(), expected) << rec.iteration;
  }
}

TEST(Train, LoggedTotalsComposeTheParts) {
  const TrainingData data = toy_data();
  const TrainResult r = train(toy_config(), data);
  for (const auto& rec : r.history) {
    const LossBreakdown& l = rec.losses;
    EXPECT_GE(l.l_kl, 0.0);
    EXPECT_NEAR(l.l_vae, l.l_recon + l.kl_weight * l.l_kl, 1e-12);
    EXPECT_NEAR(l.total, l.l_vae + l.beta * (l.l_d + l.l_gnn) + l.lambda * l.l_mi, 1e-9);
    EXPECT_GT(l.l_d, 0.0);
    EXPECT_GT(l.l_gnn, 0.0);
  }
}

TEST(Train, SameSeedSameHistoryAndParameters) {
  const TrainingData data = toy_data();
  const TrainResult a = train(toy_config(), data);
  const TrainResult b = train(toy_config(), data);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    EXPECT_EQ(history_line(a.history[k]), history_line(b.history[k]));
    EXPECT_EQ(a.history[k].losses.total, b.history[k].losses.total);
  }
  EXPECT_EQ(a.final_params.fingerprint(), b.final_params.fingerprint());
  EXPECT_EQ(a.best_params.fingerprint(), b.best_params.fingerprint());
}

TEST(Train, DifferentSeedsDiverge) {
  const TrainingData data = toy_data();
  TrainConfig other = toy_config();
  other.seed = 8;
  EXPECT_NE(train(toy_config(), data).final_params.fingerprint(),
            train(other, data).final_params.fingerprint());
}

TEST(Train, ModesSwitchTermsOff) {
  const TrainingData data = toy_data();
  const TrainResult no_adv = train(toy_config(TrainMode::no_adversary, 3), data);
  EXPECT_FALSE(no_adv.adversary_active);
  EXPECT_EQ(no_adv.history[0].losses.l_d, 0.0);
  EXPECT_EQ(no_adv.history[0].losses.beta, 0.0);
  EXPECT_NE(no_adv.history[0].losses.l_mi, 0.0);

  const TrainResult no_mi = train(toy_config(TrainMode::no_mi, 3), data);
  EXPECT_FALSE(no_mi.mi_active);
  EXPECT_EQ(no_mi.history[0].losses.lambda, 0.0);
  EXPECT_GT(no_mi.history[0].losses.l_d, 0.0);

  const TrainResult vanilla = train(toy_config(TrainMode::vanilla_vae, 3), data);
  EXPECT_EQ(vanilla.final_params.dims.encoder, EncoderKind::dense);
  EXPECT_EQ(vanilla.history[0].losses.l_d, 0.0);
  EXPECT_EQ(vanilla.history[0].losses.lambda, 0.0);
}

TEST(Train, EmptyLabeledSetRejectedUnlessAllowed) {
  const AttributedGraph g = testing::toy_graph();
  LabelSplit s = testing::toy_split(g);
  for (std::size_t i = 0; i < g.user_count(); ++i) s.train.set(i, 1, false);
  const TrainingData data = prepare_training_data(g, s);
  ASSERT_TRUE(data.partition.labeled.empty());

  EXPECT_THROW(train(toy_config(TrainMode::full, 2), data), ConfigError);
  EXPECT_THROW(train(toy_config(TrainMode::no_mi, 2), data), ConfigError);
  EXPECT_NO_THROW(train(toy_config(TrainMode::gcn_vae, 2), data));

  TrainConfig relaxed = toy_config(TrainMode::full, 2);
  relaxed.require_labeled_users = false;
  const TrainResult r = train(relaxed, data);
  EXPECT_FALSE(r.adversary_active);
  EXPECT_FALSE(r.mi_active);
}

TEST(Train, ObserverSeesThreeSubStepsPerIteration) {
  const TrainingData data = toy_data();
  std::vector<SubStep> seen;
  train(toy_config(TrainMode::full, 4), data, {},
        [&](SubStep s, const ModelParams&) { seen.push_back(s); });
  ASSERT_EQ(seen.size(), 12u);
  for (std::size_t k = 0; k < seen.size(); k += 3) {
    EXPECT_EQ(seen[k], SubStep::vae_update);
    EXPECT_EQ(seen[k + 1], SubStep::discriminator_update);
    EXPECT_EQ(seen[k + 2], SubStep::adversarial_update);
  }
  seen.clear();
  train(toy_config(TrainMode::no_adversary, 4), data, {},
        [&](SubStep s, const ModelParams&) { seen.push_back(s); });
  EXPECT_EQ(seen.size(), 4u);
}

// Which groups each sub-step is allowed to touch.
TEST(Train, SubStepsOnlyTouchTheirOwnGroups) {
  const TrainingData data = toy_data();
  const TrainConfig config = toy_config(TrainMode::full, 15);
  TrainState state = init_train_state(config, data);
  auto prints = [](const ModelParams& p) {
    std::vector<std::uint64_t> out;
    for (ParamGroup g : kAllGroups) out.push_back(p.fingerprint(g));
    return out;
  };
  std::vector<std::uint64_t> before = prints(state.params);
  auto observer = [&](SubStep step, const ModelParams& p) {
    const std::vector<std::uint64_t> after = prints(p);
    const bool mlp = after[0] != before[0];
    const bool graph = after[1] != before[1];
    const bool dec = after[2] != before[2];
    const bool disc = after[3] != before[3];
    switch (step) {
      case SubStep::vae_update:
        EXPECT_TRUE(mlp && graph && dec);
        EXPECT_FALSE(disc);
        break;
      case SubStep::discriminator_update:
        EXPECT_TRUE(disc);
        EXPECT_FALSE(mlp || graph || dec);
        break;
      case SubStep::adversarial_update:
        EXPECT_TRUE(graph);
        EXPECT_FALSE(mlp || dec || disc);
        break;
    }
    before = after;
  };
  for (std::size_t k = 0; k < config.iterations; ++k) train_step(state, config, data, observer);
}

// Reference variational graph autoencoder loop assembled from the layer and
// loss primitives, with no adversarial or MI code at all.
std::vector<double> reference_vgae_losses(const TrainingData& data, const TrainConfig& config) {
  Rng init = stream_rng(config.seed, SeedStream::init);
  Rng noise = stream_rng(config.seed, SeedStream::noise);
  ModelParams p = ModelParams::glorot(resolve_dims(config, data.features.cols()), init);
  std::vector<const DenseMatrix*> cparams;
  std::vector<DenseMatrix*> params;
  for (ParamGroup g : {ParamGroup::mlp_encoder, ParamGroup::graph_encoder, ParamGroup::decoder}) {
    for (DenseMatrix* t : p.tensors(g)) {
      params.push_back(t);
      cparams.push_back(t);
    }
  }
  AdamState opt(AdamConfig{config.lr_model, 0.9, 0.999, 1e-8}, cparams);
  const double kl_w = 1.0 / static_cast<double>(data.user_count());
  const auto blocks = data.schema().blocks();
  std::vector<double> losses;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const DenseMatrix eps = noise.normal_matrix(data.user_count(), p.dims.latent);
    const MlpEncoderPass mlp = mlp_encoder_forward(p, data.features);
    const LatentEncoderPass lat = latent_encoder_forward(p, mlp.z_m, data.a_norm, eps);
    const DecoderPass dec = decoder_forward(p, lat.z_u, blocks);
    DenseMatrix g_probs, g_mu, g_lv;
    const double recon = recon_loss(dec.probs, data.features, data.split.train, data.schema(), &g_probs);
    const double kl = kl_gauss(lat.mu, lat.log_var, &g_mu, &g_lv);
    losses.push_back(recon + kl_w * kl);
    scale_in_place(g_mu, kl_w);
    scale_in_place(g_lv, kl_w);
    ModelParams grads = ModelParams::zeros(p.dims);
    const DenseMatrix g_zu = decoder_backward(p, lat.z_u, dec, g_probs, blocks, &grads, true);
    const DenseMatrix g_zm =
        latent_encoder_backward(p, mlp.z_m, data.a_norm, lat, g_mu, g_lv, g_zu, grads);
    mlp_encoder_backward(p, data.features, mlp, g_zm, grads);
    std::vector<DenseMatrix> g;
    for (ParamGroup grp : {ParamGroup::mlp_encoder, ParamGroup::graph_encoder, ParamGroup::decoder}) {
      for (DenseMatrix* t : grads.tensors(grp)) g.push_back(*t);
    }
    adam_step(params, g, opt);
  }
  return losses;
}

TEST(Train, GcnVaeWithZeroWeightsReducesToReferenceVgae) {
  const TrainingData data = toy_data();
  TrainConfig c = toy_config(TrainMode::gcn_vae, 30);
  c.beta = 0.0;
  c.lambda = 0.0;
  const std::vector<double> expected = reference_vgae_losses(data, c);
  const TrainResult r = train(c, data);
  ASSERT_EQ(r.history.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_NEAR(r.history[k].losses.l_vae, expected[k], 1e-10 * std::abs(expected[k])) << k;
    EXPECT_EQ(r.history[k].losses.total, r.history[k].losses.l_vae);
  }
}

TEST(Objective, FullCompositionGradientMatchesFiniteDifferences) {
  const TrainingData data = toy_data();
  TrainConfig c = toy_config();
  c.kl_weight = 1.0;
  TrainState state = init_train_state(c, data);
  ModelParams& p = state.params;
  Rng rng(3);
  for (DenseMatrix* t : p.all_tensors()) {
    if (t->rows() == 1) {
      for (double& v : t->values()) v = rng.uniform(-0.1, 0.1);
    }
  }
  const DenseMatrix eps = rng.normal_matrix(data.user_count(), p.dims.latent);
  const ObjectiveSpec spec = ObjectiveSpec::everything(0.3, 0.2, true, true);
  auto loss = [&] { return evaluate_objective(p, data, eps, spec, nullptr).weighted; };
  auto gradient = [&] {
    ModelParams g = ModelParams::zeros(p.dims);
    evaluate_objective(p, data, eps, spec, &g);
    std::vector<DenseMatrix> out;
    for (const DenseMatrix* t : g.all_tensors()) out.push_back(*t);
    return out;
  };
  const auto params = p.all_tensors();
  const auto names = p.all_tensor_names();
  const GradCheckReport report = grad_check(loss, gradient, params, names);
  for (const auto& pc : report.params) {
    EXPECT_TRUE(pc.passed) << pc.name << " " << pc.max_relative_error;
  }
  EXPECT_LT(report.max_relative_error, 1e-4);
}

TEST(Objective, GeneratorCannotSkipTheGraphEncoder) {
  const TrainingData data = toy_data();
  const TrainState state = init_train_state(toy_config(), data);
  ObjectiveSpec spec;
  spec.gen = true;
  spec.gen_to_mlp_encoder = true;
  ModelParams g = ModelParams::zeros(state.params.dims);
  EXPECT_THROW(evaluate_objective(state.params, data,
                                  DenseMatrix(data.user_count(), state.params.dims.latent), spec, &g),
               ConfigError);
}

TEST(Infer, DeterministicAndBlockNormalized) {
  const TrainingData data = toy_data();
  const TrainResult r = train(toy_config(TrainMode::full, 5), data);
  const DenseMatrix a = infer(r.best_params, data);
  EXPECT_EQ(a, infer(r.best_params, data));
  ASSERT_EQ(a.rows(), data.user_count());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (const auto& b : data.schema().blocks()) {
      double s = 0.0;
      for (std::size_t c = b.start; c < b.end; ++c) s += a(i, c);
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Infer, FeatureMismatchIsSchemaError) {
  const TrainingData data = toy_data();
  ModelDims d = toy_dims(7);
  Rng rng(1);
  EXPECT_THROW(infer(ModelParams::glorot(d, rng), data), SchemaError);
}

TEST(HistoryLine, CarriesEveryLossField) {
  IterationRecord rec;
  rec.iteration = 10;
  rec.losses = make_breakdown(1.0, 2.0, 3.0, 4.0, 5.0, 0.3, 0.2, 0.5);
  rec.validation_accuracy = 0.75;
  const std::string line = history_line(rec);
  for (const char* key : {"\"iteration\"", "\"l_vae\"", "\"l_recon\"", "\"l_kl\"", "\"l_d\"",
                          "\"l_gnn\"", "\"l_mi\"", "\"total\"", "\"beta\"", "\"lambda\"",
                          "\"validation_accuracy\""}) {
    EXPECT_NE(line.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(line.find('\n'), std::string::npos);
  rec.validation_accuracy.reset();
  EXPECT_EQ(history_line(rec).find("validation_accuracy"), std::string::npos);
}

TEST(Checkpoint, RoundTripReproducesParameters) {
  const TrainingData data = toy_data();
  TrainConfig c = toy_config(TrainMode::no_mi, 3);
  c.kl_weight = 0.25;
  const TrainResult r = train(c, data);
  TempDir dir("ckpt");
  save_checkpoint(dir / "model.json", r.best_params, c, data.schema());
  const Checkpoint back = load_checkpoint(dir / "model.json", data.schema());
  EXPECT_EQ(back.params.fingerprint(), r.best_params.fingerprint());
  EXPECT_EQ(back.params.dims, r.best_params.dims);
  EXPECT_EQ(back.config.mode, TrainMode::no_mi);
  EXPECT_EQ(back.config.seed, c.seed);
  EXPECT_EQ(back.config.iterations, 3u);
  ASSERT_TRUE(back.config.kl_weight.has_value());
  EXPECT_EQ(*back.config.kl_weight, 0.25);
  EXPECT_EQ(infer(back.params, data), infer(r.best_params, data));
}

TEST(Checkpoint, RejectsOtherSchemasAndBadFiles) {
  const TrainingData data = toy_data();
  const TrainResult r = train(toy_config(TrainMode::gcn_vae, 2), data);
  TempDir dir("ckpt_bad");
  save_checkpoint(dir / "model.json", r.best_params, toy_config(), data.schema());
  const std::size_t counts[] = {3, 3};
  EXPECT_THROW(load_checkpoint(dir / "model.json", AttributeSchema::from_label_counts(counts)),
               SchemaError);
  EXPECT_THROW(load_checkpoint(dir / "absent.json", data.schema()), IoError);
  std::ofstream(dir / "garbage.json") << "{\"format\": 12";
  EXPECT_THROW(load_checkpoint(dir / "garbage.json", data.schema()), ParseError);
  std::ofstream(dir / "wrong.json") << "{\"format\": \"something-else\"}";
  EXPECT_THROW(load_checkpoint(dir / "wrong.json", data.schema()), ParseError);
}

}  // namespace
}  // namespace attrinfer

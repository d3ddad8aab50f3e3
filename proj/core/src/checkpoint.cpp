#include "attrinfer/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "attrinfer/error.hpp"
#include "json_util.hpp"

namespace attrinfer {
namespace {

using detail::Json;

constexpr const char* kFormat = "attrinfer-checkpoint";
constexpr int kVersion = 1;

Json dims_to_json(const ModelDims& d) {
  return {{"features", d.features},
          {"mlp_hidden", d.mlp_hidden},
          {"latent", d.latent},
          {"gcn_hidden", d.gcn_hidden},
          {"decoder_hidden", d.decoder_hidden},
          {"disc_hidden1", d.disc_hidden1},
          {"disc_hidden2", d.disc_hidden2},
          {"encoder", d.encoder == EncoderKind::graph ? "graph" : "dense"}};
}

ModelDims dims_from_json(const Json& j) {
  ModelDims d;
  d.features = j.at("features").get<std::size_t>();
  d.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
  d.latent = j.at("latent").get<std::size_t>();
  d.gcn_hidden = j.at("gcn_hidden").get<std::size_t>();
  d.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
  d.disc_hidden1 = j.at("disc_hidden1").get<std::size_t>();
  d.disc_hidden2 = j.at("disc_hidden2").get<std::size_t>();
  const std::string encoder = j.at("encoder").get<std::string>();
  if (encoder != "graph" && encoder != "dense") throw ParseError("unknown encoder kind '" + encoder + "'");
  d.encoder = encoder == "graph" ? EncoderKind::graph : EncoderKind::dense;
  return d;
}

Json config_to_json(const TrainConfig& c) {
  return {{"iterations", c.iterations},
          {"lr_model", c.lr_model},
          {"lr_disc", c.lr_disc},
          {"lr_adversarial", c.lr_adversarial},
          {"beta", c.beta},
          {"lambda", c.lambda},
          {"kl_weight", c.kl_weight ? Json(*c.kl_weight) : Json(nullptr)},
          {"seed", c.seed},
          {"mode", to_string(c.mode)},
          {"split", {c.split.train, c.split.validation, c.split.test}},
          {"eval_every", c.eval_every},
          {"require_labeled_users", c.require_labeled_users}};
}

TrainConfig config_from_json(const Json& j) {
  TrainConfig c;
  c.iterations = j.at("iterations").get<std::size_t>();
  c.lr_model = j.at("lr_model").get<double>();
  c.lr_disc = j.at("lr_disc").get<double>();
  c.lr_adversarial = j.at("lr_adversarial").get<double>();
  c.beta = j.at("beta").get<double>();
  c.lambda = j.at("lambda").get<double>();
  if (!j.at("kl_weight").is_null()) c.kl_weight = j.at("kl_weight").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.mode = parse_train_mode(j.at("mode").get<std::string>());
  const Json& split = j.at("split");
  c.split = {split.at(0).get<double>(), split.at(1).get<double>(), split.at(2).get<double>()};
  c.eval_every = j.at("eval_every").get<std::size_t>();
  c.require_labeled_users = j.at("require_labeled_users").get<bool>();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const TrainConfig& config, const AttributeSchema& schema) {
  Json tensors = Json::object();
  const auto names = params.all_tensor_names();
  const auto values = params.all_tensors();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const DenseMatrix& m = *values[k];
    tensors[names[k]] = {{"rows", m.rows()},
                         {"cols", m.cols()},
                         {"data", std::vector<double>(m.values().begin(), m.values().end())}};
  }
  Json root = {{"format", kFormat},
               {"version", kVersion},
               {"schema_hash", schema.hash()},
               {"config", config_to_json(config)},
               {"dims", dims_to_json(params.dims)},
               {"params", std::move(tensors)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << root.dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json root;
  try {
    root = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  Checkpoint cp;
  try {
    if (root.at("format").get<std::string>() != kFormat || root.at("version").get<int>() != kVersion) {
      throw ParseError(path.string() + ": not a version " + std::to_string(kVersion) +
                       " attrinfer checkpoint");
    }
    cp.schema_hash = root.at("schema_hash").get<std::string>();
    if (cp.schema_hash != schema.hash()) {
      throw SchemaError(path.string() + ": checkpoint schema " + cp.schema_hash +
                        " does not match the data schema " + schema.hash());
    }
    cp.config = config_from_json(root.at("config"));
    cp.params = ModelParams::zeros(dims_from_json(root.at("dims")));
    if (cp.params.dims.features != schema.feature_count()) {
      throw SchemaError(path.string() + ": checkpoint has " +
                        std::to_string(cp.params.dims.features) + " features, schema has " +
                        std::to_string(schema.feature_count()));
    }
    const Json& tensors = root.at("params");
    const auto names = cp.params.all_tensor_names();
    const auto targets = cp.params.all_tensors();
    if (tensors.size() != names.size()) {
      throw ParseError(path.string() + ": expected " + std::to_string(names.size()) +
                       " parameter tensors, found " + std::to_string(tensors.size()));
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      const Json& t = tensors.at(names[k]);
      DenseMatrix& m = *targets[k];
      const auto data = t.at("data").get<std::vector<double>>();
      if (t.at("rows").get<std::size_t>() != m.rows() ||
          t.at("cols").get<std::size_t>() != m.cols() || data.size() != m.size()) {
        throw ParseError(path.string() + ": tensor " + names[k] + " should be " + m.shape_string());
      }
      std::copy(data.begin(), data.end(), m.values().begin());
    }
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return cp;
}

}  // namespace attrinfer

#include "attrinfer/model.hpp"

#include <cmath>
#include <string>

#include "attrinfer/error.hpp"
#include "attrinfer/fingerprint.hpp"

namespace attrinfer {
namespace {

DenseLayer zero_layer(std::size_t in, std::size_t out) {
  return {DenseMatrix(in, out), DenseMatrix(1, out)};
}

DenseMatrix glorot_matrix(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  DenseMatrix w(in, out);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

DenseLayer glorot_layer(std::size_t in, std::size_t out, Rng& rng) {
  return {glorot_matrix(in, out, rng), DenseMatrix(1, out)};
}

DenseMatrix dense_forward(const DenseLayer& layer, const DenseMatrix& x) {
  DenseMatrix y = matmul(x, layer.weight);
  add_row_vector(y, layer.bias);
  return y;
}

// Accumulates dW, db for y = x W + b. Returns dx when requested.
DenseMatrix dense_backward(const DenseLayer& layer, const DenseMatrix& x, const DenseMatrix& grad_y,
                           DenseLayer* grads, bool want_input_grad) {
  if (grads != nullptr) {
    add_in_place(grads->weight, matmul_transpose_a(x, grad_y));
    add_in_place(grads->bias, column_sums(grad_y));
  }
  if (!want_input_grad) return {};
  return matmul_transpose_b(grad_y, layer.weight);
}

void require_cols(const char* what, const DenseMatrix& m, std::size_t cols) {
  if (m.cols() != cols) {
    throw DimensionError(std::string(what) + ": input is " + m.shape_string() + ", expected " +
                         std::to_string(cols) + " columns");
  }
}

}  // namespace

std::string to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::mlp_encoder:
      return "mlp_encoder";
    case ParamGroup::graph_encoder:
      return "graph_encoder";
    case ParamGroup::decoder:
      return "decoder";
    case ParamGroup::discriminator:
      return "discriminator";
  }
  return "unknown";
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  if (dims.features == 0 || dims.latent == 0 || dims.mlp_hidden == 0 || dims.gcn_hidden == 0 ||
      dims.decoder_hidden == 0 || dims.disc_hidden1 == 0 || dims.disc_hidden2 == 0) {
    throw ConfigError("model dimensions must all be positive");
  }
  ModelParams p;
  p.dims = dims;
  p.enc_hidden = zero_layer(dims.features, dims.mlp_hidden);
  p.enc_out = zero_layer(dims.mlp_hidden, dims.latent);
  if (dims.encoder == EncoderKind::graph) {
    p.gcn_hidden = DenseMatrix(dims.latent, dims.gcn_hidden);
    p.gcn_out = DenseMatrix(dims.gcn_hidden, 2 * dims.latent);
  } else {
    p.latent_head = zero_layer(dims.latent, 2 * dims.latent);
  }
  p.dec_hidden = zero_layer(dims.latent, dims.decoder_hidden);
  p.dec_out = zero_layer(dims.decoder_hidden, dims.features);
  p.disc_hidden1 = zero_layer(dims.latent, dims.disc_hidden1);
  p.disc_hidden2 = zero_layer(dims.disc_hidden1, dims.disc_hidden2);
  p.disc_out = zero_layer(dims.disc_hidden2, 1);
  return p;
}

ModelParams ModelParams::glorot(const ModelDims& dims, Rng& rng) {
  ModelParams p = zeros(dims);
  p.enc_hidden = glorot_layer(dims.features, dims.mlp_hidden, rng);
  p.enc_out = glorot_layer(dims.mlp_hidden, dims.latent, rng);
  if (dims.encoder == EncoderKind::graph) {
    p.gcn_hidden = glorot_matrix(dims.latent, dims.gcn_hidden, rng);
    p.gcn_out = glorot_matrix(dims.gcn_hidden, 2 * dims.latent, rng);
  } else {
    p.latent_head = glorot_layer(dims.latent, 2 * dims.latent, rng);
  }
  p.dec_hidden = glorot_layer(dims.latent, dims.decoder_hidden, rng);
  p.dec_out = glorot_layer(dims.decoder_hidden, dims.features, rng);
  p.disc_hidden1 = glorot_layer(dims.latent, dims.disc_hidden1, rng);
  p.disc_hidden2 = glorot_layer(dims.disc_hidden1, dims.disc_hidden2, rng);
  p.disc_out = glorot_layer(dims.disc_hidden2, 1, rng);
  return p;
}

std::vector<DenseMatrix*> ModelParams::tensors(ParamGroup group) {
  switch (group) {
    case ParamGroup::mlp_encoder:
      return {&enc_hidden.weight, &enc_hidden.bias, &enc_out.weight, &enc_out.bias};
    case ParamGroup::graph_encoder:
      if (dims.encoder == EncoderKind::graph) return {&gcn_hidden, &gcn_out};
      return {&latent_head.weight, &latent_head.bias};
    case ParamGroup::decoder:
      return {&dec_hidden.weight, &dec_hidden.bias, &dec_out.weight, &dec_out.bias};
    case ParamGroup::discriminator:
      return {&disc_hidden1.weight, &disc_hidden1.bias, &disc_hidden2.weight,
              &disc_hidden2.bias,   &disc_out.weight,     &disc_out.bias};
  }
  return {};
}

std::vector<const DenseMatrix*> ModelParams::tensors(ParamGroup group) const {
  auto mutable_view = const_cast<ModelParams*>(this)->tensors(group);
  return {mutable_view.begin(), mutable_view.end()};
}

std::vector<std::string> ModelParams::tensor_names(ParamGroup group) const {
  switch (group) {
    case ParamGroup::mlp_encoder:
      return {"enc_hidden.weight", "enc_hidden.bias", "enc_out.weight", "enc_out.bias"};
    case ParamGroup::graph_encoder:
      if (dims.encoder == EncoderKind::graph) return {"gcn_hidden", "gcn_out"};
      return {"latent_head.weight", "latent_head.bias"};
    case ParamGroup::decoder:
      return {"dec_hidden.weight", "dec_hidden.bias", "dec_out.weight", "dec_out.bias"};
    case ParamGroup::discriminator:
      return {"disc_hidden1.weight", "disc_hidden1.bias", "disc_hidden2.weight",
              "disc_hidden2.bias",   "disc_out.weight",   "disc_out.bias"};
  }
  return {};
}

std::vector<DenseMatrix*> ModelParams::all_tensors() {
  std::vector<DenseMatrix*> out;
  for (ParamGroup g : kAllGroups) {
    auto part = tensors(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<const DenseMatrix*> ModelParams::all_tensors() const {
  auto mutable_view = const_cast<ModelParams*>(this)->all_tensors();
  return {mutable_view.begin(), mutable_view.end()};
}

std::vector<std::string> ModelParams::all_tensor_names() const {
  std::vector<std::string> out;
  for (ParamGroup g : kAllGroups) {
    auto part = tensor_names(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::uint64_t ModelParams::fingerprint(ParamGroup group) const {
  Fingerprint fp;
  for (const DenseMatrix* t : tensors(group)) {
    fp.number(t->rows()).number(t->cols()).values(t->values());
  }
  return fp.value();
}

std::uint64_t ModelParams::fingerprint() const {
  Fingerprint fp;
  for (ParamGroup g : kAllGroups) fp.number(fingerprint(g));
  return fp.value();
}

MlpEncoderPass mlp_encoder_forward(const ModelParams& params, const DenseMatrix& x) {
  require_cols("encode_mlp", x, params.dims.features);
  MlpEncoderPass pass;
  pass.hidden = apply(Elementwise::relu, dense_forward(params.enc_hidden, x));
  pass.z_m = dense_forward(params.enc_out, pass.hidden);
  return pass;
}

DenseMatrix encode_mlp(const DenseMatrix& x, const ModelParams& params) {
  return mlp_encoder_forward(params, x).z_m;
}

void mlp_encoder_backward(const ModelParams& params, const DenseMatrix& x,
                          const MlpEncoderPass& pass, const DenseMatrix& grad_z_m,
                          ModelParams& grads) {
  DenseMatrix grad_hidden =
      dense_backward(params.enc_out, pass.hidden, grad_z_m, &grads.enc_out, true);
  relu_mask_in_place(grad_hidden, pass.hidden);
  dense_backward(params.enc_hidden, x, grad_hidden, &grads.enc_hidden, false);
}

LatentEncoderPass latent_encoder_forward(const ModelParams& params, const DenseMatrix& z_m,
                                         const SparseMatrix& a_norm, const DenseMatrix& eps) {
  const std::size_t latent = params.dims.latent;
  require_cols("latent encoder", z_m, latent);
  if (!eps.same_shape(z_m)) {
    throw DimensionError("latent encoder: noise is " + eps.shape_string() + ", latent is " +
                         z_m.shape_string());
  }
  LatentEncoderPass pass;
  DenseMatrix gaussian;
  if (params.dims.encoder == EncoderKind::graph) {
    if (a_norm.rows() != z_m.rows() || a_norm.cols() != z_m.rows()) {
      throw DimensionError("latent encoder: adjacency is " + std::to_string(a_norm.rows()) + "x" +
                           std::to_string(a_norm.cols()) + " for " + std::to_string(z_m.rows()) +
                           " users");
    }
    pass.propagated_input = sparse_dense_matmul(a_norm, z_m);
    pass.hidden = apply(Elementwise::relu, matmul(pass.propagated_input, params.gcn_hidden));
    pass.propagated_hidden = sparse_dense_matmul(a_norm, pass.hidden);
    gaussian = matmul(pass.propagated_hidden, params.gcn_out);
  } else {
    gaussian = dense_forward(params.latent_head, z_m);
  }
  pass.mu = slice_columns(gaussian, 0, latent);
  pass.log_var = slice_columns(gaussian, latent, 2 * latent);
  pass.std_dev = DenseMatrix(pass.log_var.rows(), latent);
  pass.z_u = pass.mu;
  for (std::size_t k = 0; k < pass.z_u.size(); ++k) {
    const double sd = std::exp(0.5 * pass.log_var.values()[k]);
    pass.std_dev.values()[k] = sd;
    pass.z_u.values()[k] += sd * eps.values()[k];
  }
  pass.eps = eps;
  return pass;
}

LatentPair encode_gnn(const DenseMatrix& z_m, const SparseMatrix& a_norm, const ModelParams& params,
                      const DenseMatrix& eps) {
  LatentEncoderPass pass = latent_encoder_forward(params, z_m, a_norm, eps);
  return {z_m, std::move(pass.mu), std::move(pass.log_var), std::move(pass.eps),
          std::move(pass.z_u)};
}

DenseMatrix latent_encoder_backward(const ModelParams& params, const DenseMatrix& z_m,
                                    const SparseMatrix& a_norm, const LatentEncoderPass& pass,
                                    const DenseMatrix& grad_mu, const DenseMatrix& grad_log_var,
                                    const DenseMatrix& grad_z_u, ModelParams& grads) {
  const std::size_t latent = params.dims.latent;
  DenseMatrix d_mu = grad_mu.empty() ? DenseMatrix(pass.mu.rows(), latent) : grad_mu;
  DenseMatrix d_log_var =
      grad_log_var.empty() ? DenseMatrix(pass.mu.rows(), latent) : grad_log_var;
  if (!grad_z_u.empty()) {
    add_in_place(d_mu, grad_z_u);
    auto dz = grad_z_u.values();
    auto sd = pass.std_dev.values();
    auto eps = pass.eps.values();
    auto dlv = d_log_var.values();
    for (std::size_t k = 0; k < dz.size(); ++k) dlv[k] += 0.5 * dz[k] * eps[k] * sd[k];
  }
  DenseMatrix d_gaussian = concat_columns(d_mu, d_log_var);

  if (params.dims.encoder == EncoderKind::dense) {
    return dense_backward(params.latent_head, z_m, d_gaussian, &grads.latent_head, true);
  }
  // gaussian = (Ã H) W1, H = relu((Ã Z) W0)
  add_in_place(grads.gcn_out, matmul_transpose_a(pass.propagated_hidden, d_gaussian));
  DenseMatrix d_propagated_hidden = matmul_transpose_b(d_gaussian, params.gcn_out);
  DenseMatrix d_hidden = sparse_transpose_dense_matmul(a_norm, d_propagated_hidden);
  relu_mask_in_place(d_hidden, pass.hidden);
  add_in_place(grads.gcn_hidden, matmul_transpose_a(pass.propagated_input, d_hidden));
  DenseMatrix d_propagated_input = matmul_transpose_b(d_hidden, params.gcn_hidden);
  return sparse_transpose_dense_matmul(a_norm, d_propagated_input);
}

DecoderPass decoder_forward(const ModelParams& params, const DenseMatrix& z,
                            std::span<const ColumnBlock> blocks) {
  require_cols("decode", z, params.dims.latent);
  DecoderPass pass;
  pass.hidden = apply(Elementwise::relu, dense_forward(params.dec_hidden, z));
  pass.probs = softmax_blocks(dense_forward(params.dec_out, pass.hidden), blocks);
  return pass;
}

DenseMatrix decode(const DenseMatrix& z, const ModelParams& params, const AttributeSchema& schema) {
  if (schema.feature_count() != params.dims.features) {
    throw SchemaError("decoder emits " + std::to_string(params.dims.features) +
                      " features but the schema has " + std::to_string(schema.feature_count()));
  }
  return decoder_forward(params, z, schema.blocks()).probs;
}

DenseMatrix decoder_backward(const ModelParams& params, const DenseMatrix& z,
                             const DecoderPass& pass, const DenseMatrix& grad_probs,
                             std::span<const ColumnBlock> blocks, ModelParams* grads,
                             bool want_input_grad) {
  DenseMatrix d_logits = softmax_blocks_backward(pass.probs, grad_probs, blocks);
  const bool need_hidden = want_input_grad || grads != nullptr;
  DenseMatrix d_hidden = dense_backward(params.dec_out, pass.hidden, d_logits,
                                        grads ? &grads->dec_out : nullptr, need_hidden);
  if (!need_hidden) return {};
  relu_mask_in_place(d_hidden, pass.hidden);
  return dense_backward(params.dec_hidden, z, d_hidden, grads ? &grads->dec_hidden : nullptr,
                        want_input_grad);
}

DiscriminatorPass discriminator_forward(const ModelParams& params, const DenseMatrix& z) {
  require_cols("discriminate", z, params.dims.latent);
  DiscriminatorPass pass;
  pass.hidden1 = apply(Elementwise::relu, dense_forward(params.disc_hidden1, z));
  pass.hidden2 = apply(Elementwise::relu, dense_forward(params.disc_hidden2, pass.hidden1));
  pass.scores = apply(Elementwise::sigmoid, dense_forward(params.disc_out, pass.hidden2));
  return pass;
}

DenseMatrix discriminate(const DenseMatrix& z, const ModelParams& params) {
  return discriminator_forward(params, z).scores;
}

DenseMatrix discriminator_backward(const ModelParams& params, const DenseMatrix& z,
                                   const DiscriminatorPass& pass, const DenseMatrix& grad_scores,
                                   ModelParams* grads, bool want_input_grad) {
  DenseMatrix d_logit(pass.scores.rows(), 1);
  for (std::size_t r = 0; r < d_logit.rows(); ++r) {
    const double s = pass.scores(r, 0);
    d_logit(r, 0) = grad_scores(r, 0) * s * (1.0 - s);
  }
  DenseMatrix d_h2 =
      dense_backward(params.disc_out, pass.hidden2, d_logit, grads ? &grads->disc_out : nullptr, true);
  relu_mask_in_place(d_h2, pass.hidden2);
  DenseMatrix d_h1 = dense_backward(params.disc_hidden2, pass.hidden1, d_h2,
                                    grads ? &grads->disc_hidden2 : nullptr, true);
  relu_mask_in_place(d_h1, pass.hidden1);
  return dense_backward(params.disc_hidden1, z, d_h1, grads ? &grads->disc_hidden1 : nullptr,
                        want_input_grad);
}

}  // namespace attrinfer

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/graph.hpp"
#include "attrinfer/numerics.hpp"
#include "attrinfer/rng.hpp"
#include "attrinfer/sparse_matrix.hpp"

namespace attrinfer {

// How the user latent is produced from the mid latent: two graph convolutions
// over the normalized adjacency, or (plain VAE baseline) one dense layer that
// ignores the graph.
enum class EncoderKind { graph, dense };

struct ModelDims {
  std::size_t features = 0;
  std::size_t mlp_hidden = 64;
  std::size_t latent = 64;
  std::size_t gcn_hidden = 64;
  std::size_t decoder_hidden = 128;
  std::size_t disc_hidden1 = 16;
  std::size_t disc_hidden2 = 4;
  EncoderKind encoder = EncoderKind::graph;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct DenseLayer {
  DenseMatrix weight;  // in × out
  DenseMatrix bias;    // 1 × out
};

// Parameter groups, in the order the optimizer partitions them.
enum class ParamGroup { mlp_encoder, graph_encoder, decoder, discriminator };

struct ModelParams {
  ModelDims dims;

  // MLP encoder: features -> mlp_hidden -> latent.
  DenseLayer enc_hidden;
  DenseLayer enc_out;
  // Graph encoder (EncoderKind::graph): latent -> gcn_hidden -> 2·latent, no biases.
  DenseMatrix gcn_hidden;
  DenseMatrix gcn_out;
  // Dense encoder head (EncoderKind::dense): latent -> 2·latent.
  DenseLayer latent_head;
  // Decoder: latent -> decoder_hidden -> features.
  DenseLayer dec_hidden;
  DenseLayer dec_out;
  // Discriminator: latent -> disc_hidden1 -> disc_hidden2 -> 1.
  DenseLayer disc_hidden1;
  DenseLayer disc_hidden2;
  DenseLayer disc_out;

  // All-zero tensors of the right shapes; doubles as a gradient accumulator.
  static ModelParams zeros(const ModelDims& dims);
  // Glorot-uniform weights, zero biases.
  static ModelParams glorot(const ModelDims& dims, Rng& rng);

  std::vector<DenseMatrix*> tensors(ParamGroup group);
  std::vector<const DenseMatrix*> tensors(ParamGroup group) const;
  std::vector<std::string> tensor_names(ParamGroup group) const;
  std::vector<DenseMatrix*> all_tensors();
  std::vector<const DenseMatrix*> all_tensors() const;
  std::vector<std::string> all_tensor_names() const;

  std::uint64_t fingerprint(ParamGroup group) const;
  std::uint64_t fingerprint() const;
};

inline constexpr ParamGroup kAllGroups[] = {ParamGroup::mlp_encoder, ParamGroup::graph_encoder,
                                            ParamGroup::decoder, ParamGroup::discriminator};

std::string to_string(ParamGroup group);

// Mid latent z_m and the Gaussian user latent built on top of it.
struct LatentPair {
  DenseMatrix z_m;
  DenseMatrix mu;
  DenseMatrix log_var;
  DenseMatrix eps;
  DenseMatrix z_u;  // mu + exp(log_var / 2) ⊙ eps
};

// --- MLP encoder -----------------------------------------------------------

struct MlpEncoderPass {
  DenseMatrix hidden;  // after relu
  DenseMatrix z_m;
};

MlpEncoderPass mlp_encoder_forward(const ModelParams& params, const DenseMatrix& x);
DenseMatrix encode_mlp(const DenseMatrix& x, const ModelParams& params);
void mlp_encoder_backward(const ModelParams& params, const DenseMatrix& x,
                          const MlpEncoderPass& pass, const DenseMatrix& grad_z_m,
                          ModelParams& grads);

// --- Latent (graph or dense) encoder with reparameterization ----------------

struct LatentEncoderPass {
  DenseMatrix propagated_input;   // Ã z_m (graph kind only)
  DenseMatrix hidden;             // relu(Ã z_m W0) (graph kind only)
  DenseMatrix propagated_hidden;  // Ã hidden (graph kind only)
  DenseMatrix std_dev;            // exp(log_var / 2)
  DenseMatrix mu;
  DenseMatrix log_var;
  DenseMatrix eps;
  DenseMatrix z_u;
};

LatentEncoderPass latent_encoder_forward(const ModelParams& params, const DenseMatrix& z_m,
                                         const SparseMatrix& a_norm, const DenseMatrix& eps);
LatentPair encode_gnn(const DenseMatrix& z_m, const SparseMatrix& a_norm, const ModelParams& params,
                      const DenseMatrix& eps);

// Upstream gradients may be empty (0×0) when a path carries none. Returns the
// gradient w.r.t. z_m.
DenseMatrix latent_encoder_backward(const ModelParams& params, const DenseMatrix& z_m,
                                    const SparseMatrix& a_norm, const LatentEncoderPass& pass,
                                    const DenseMatrix& grad_mu, const DenseMatrix& grad_log_var,
                                    const DenseMatrix& grad_z_u, ModelParams& grads);

// --- Decoder ---------------------------------------------------------------

struct DecoderPass {
  DenseMatrix hidden;  // after relu
  DenseMatrix probs;   // per-attribute softmax blocks
};

DecoderPass decoder_forward(const ModelParams& params, const DenseMatrix& z,
                            std::span<const ColumnBlock> blocks);
DenseMatrix decode(const DenseMatrix& z, const ModelParams& params, const AttributeSchema& schema);
// Accumulates decoder gradients into `grads` when non-null; returns the input
// gradient when `want_input_grad`, otherwise an empty matrix.
DenseMatrix decoder_backward(const ModelParams& params, const DenseMatrix& z,
                             const DecoderPass& pass, const DenseMatrix& grad_probs,
                             std::span<const ColumnBlock> blocks, ModelParams* grads,
                             bool want_input_grad);

// --- Discriminator ---------------------------------------------------------

struct DiscriminatorPass {
  DenseMatrix hidden1;  // after relu
  DenseMatrix hidden2;  // after relu
  DenseMatrix scores;   // rows × 1, sigmoid output
};

DiscriminatorPass discriminator_forward(const ModelParams& params, const DenseMatrix& z);
// Probability that each row is a mid latent of a fully labeled user.
DenseMatrix discriminate(const DenseMatrix& z, const ModelParams& params);
DenseMatrix discriminator_backward(const ModelParams& params, const DenseMatrix& z,
                                   const DiscriminatorPass& pass, const DenseMatrix& grad_scores,
                                   ModelParams* grads, bool want_input_grad);

}  // namespace attrinfer

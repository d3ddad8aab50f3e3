#pragma once

#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/graph.hpp"

namespace attrinfer {

// Lower clamp applied to every log argument in the adversarial losses and the
// reconstruction term.
inline constexpr double kLogFloor = 1e-12;

// Per-iteration objective values. l_vae = l_recon + kl_weight·l_kl and
// total = l_vae + beta·(l_d + l_gnn) + lambda·l_mi.
struct LossBreakdown {
  double l_vae = 0.0;
  double l_recon = 0.0;
  double l_kl = 0.0;
  double l_d = 0.0;
  double l_gnn = 0.0;
  double l_mi = 0.0;
  double total = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double kl_weight = 1.0;
};

struct LossParts {
  double l_vae = 0.0;
  double l_d = 0.0;
  double l_gnn = 0.0;
  double l_mi = 0.0;
};

// Every gradient out-parameter below is optional; when given it is overwritten
// with the gradient of the returned value w.r.t. that input.

// Mean over train-visible cells of -log x_hat at the observed label. Targets
// are read from the one-hot feature matrix. Throws NumericalError when a target
// probability is not positive, SchemaError when a visible cell has no one-hot
// entry and ConfigError when no cell is visible.
double recon_loss(const DenseMatrix& x_hat, const DenseMatrix& x, const LabelMask& train,
                  const AttributeSchema& schema, DenseMatrix* grad_x_hat = nullptr);

// KL(N(mu, exp(log_var)) || N(0, I)), summed over latent dimensions and averaged over users.
double kl_gauss(const DenseMatrix& mu, const DenseMatrix& log_var, DenseMatrix* grad_mu = nullptr,
                DenseMatrix* grad_log_var = nullptr);

// -mean(log pos) - mean(log(1 - neg)), each mean taken over its own set.
double disc_loss(const DenseMatrix& pos_scores, const DenseMatrix& neg_scores,
                 DenseMatrix* grad_pos = nullptr, DenseMatrix* grad_neg = nullptr);

// -mean(log neg): the encoder trying to pass its user latents off as mid latents.
double gen_loss(const DenseMatrix& neg_scores, DenseMatrix* grad_neg = nullptr);

// InfoNCE estimate with the inner-product critic over K paired rows:
// (1/K) Σ_i log( exp(x_i·y_i) / ((1/K) Σ_j exp(x_i·y_j)) ). Never exceeds log K.
double infonce(const DenseMatrix& x, const DenseMatrix& y, DenseMatrix* grad_x = nullptr,
               DenseMatrix* grad_y = nullptr);

// -InfoNCE over the labeled users' (x_hat_m, x_hat) rows plus InfoNCE over the
// unlabeled users' rows; the second term is dropped when there are no
// unlabeled users. Throws ConfigError when there are no labeled users.
double mi_constraint(const DenseMatrix& x_hat_m, const DenseMatrix& x_hat,
                     const UserPartition& partition, DenseMatrix* grad_x_hat_m = nullptr,
                     DenseMatrix* grad_x_hat = nullptr);

// l_vae + beta·(l_d + l_gnn) + lambda·l_mi. Throws NumericalError naming the
// first non-finite part.
double total_loss(const LossParts& parts, double beta, double lambda);

LossBreakdown make_breakdown(double l_recon, double l_kl, double l_d, double l_gnn, double l_mi,
                             double beta, double lambda, double kl_weight = 1.0);

}  // namespace attrinfer

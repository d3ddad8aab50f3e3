#include "attrinfer/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "attrinfer/error.hpp"
#include "attrinfer/numerics.hpp"

namespace attrinfer {
namespace {

double clamped_log(double v) { return std::log(std::max(v, kLogFloor)); }

// d/dv of clamped_log at v.
double clamped_log_grad(double v) { return v > kLogFloor ? 1.0 / v : 0.0; }

void require_same_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shapes " + a.shape_string() + " and " +
                         b.shape_string() + " differ");
  }
}

}  // namespace

double recon_loss(const DenseMatrix& x_hat, const DenseMatrix& x, const LabelMask& train,
                  const AttributeSchema& schema, DenseMatrix* grad_x_hat) {
  require_same_shape("recon_loss", x_hat, x);
  if (x.cols() != schema.feature_count() || train.user_count() != x.rows() ||
      train.type_count() != schema.type_count()) {
    throw DimensionError("recon_loss: features " + x.shape_string() + " do not match the schema (" +
                         std::to_string(schema.feature_count()) + " features) or the mask (" +
                         std::to_string(train.user_count()) + "x" +
                         std::to_string(train.type_count()) + ")");
  }
  struct Target {
    std::size_t row;
    std::size_t col;
  };
  std::vector<Target> targets;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < schema.type_count(); ++j) {
      if (!train(i, j)) continue;
      const ColumnBlock block = schema.blocks()[j];
      std::size_t hit = block.end;
      for (std::size_t c = block.start; c < block.end; ++c) {
        if (x(i, c) == 1.0) {
          hit = c;
          break;
        }
      }
      if (hit == block.end) {
        throw SchemaError("recon_loss: user " + std::to_string(i) + " attribute '" +
                          schema.type(j).name + "' is visible but its feature block is empty");
      }
      targets.push_back({i, hit});
    }
  }
  if (targets.empty()) throw ConfigError("recon_loss: no training cells are visible");

  const double inv_count = 1.0 / static_cast<double>(targets.size());
  if (grad_x_hat != nullptr) *grad_x_hat = DenseMatrix(x_hat.rows(), x_hat.cols());
  double total = 0.0;
  for (const auto& t : targets) {
    const double p = x_hat(t.row, t.col);
    if (!(p > 0.0)) {
      throw NumericalError("recon_loss: probability " + std::to_string(p) + " at target (" +
                           std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
    }
    total -= clamped_log(p);
    if (grad_x_hat != nullptr) (*grad_x_hat)(t.row, t.col) = -inv_count * clamped_log_grad(p);
  }
  return total * inv_count;
}

double kl_gauss(const DenseMatrix& mu, const DenseMatrix& log_var, DenseMatrix* grad_mu,
                DenseMatrix* grad_log_var) {
  require_same_shape("kl_gauss", mu, log_var);
  if (mu.rows() == 0) return 0.0;
  const double inv_users = 1.0 / static_cast<double>(mu.rows());
  if (grad_mu != nullptr) *grad_mu = DenseMatrix(mu.rows(), mu.cols());
  if (grad_log_var != nullptr) *grad_log_var = DenseMatrix(mu.rows(), mu.cols());
  auto m = mu.values();
  auto lv = log_var.values();
  double total = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double var = std::exp(lv[k]);
    total += 0.5 * (var + m[k] * m[k] - 1.0 - lv[k]);
    if (grad_mu != nullptr) grad_mu->values()[k] = inv_users * m[k];
    if (grad_log_var != nullptr) grad_log_var->values()[k] = inv_users * 0.5 * (var - 1.0);
  }
  // Each summand is non-negative analytically; rounding can leave a -1e-17.
  return std::max(0.0, total * inv_users);
}

double disc_loss(const DenseMatrix& pos_scores, const DenseMatrix& neg_scores,
                 DenseMatrix* grad_pos, DenseMatrix* grad_neg) {
  if (pos_scores.size() == 0) {
    throw ConfigError("disc_loss: no positive samples (no fully labeled users)");
  }
  if (neg_scores.size() == 0) throw ConfigError("disc_loss: no negative samples");
  const double inv_pos = 1.0 / static_cast<double>(pos_scores.size());
  const double inv_neg = 1.0 / static_cast<double>(neg_scores.size());
  if (grad_pos != nullptr) *grad_pos = DenseMatrix(pos_scores.rows(), pos_scores.cols());
  if (grad_neg != nullptr) *grad_neg = DenseMatrix(neg_scores.rows(), neg_scores.cols());

  double pos_term = 0.0;
  auto pos = pos_scores.values();
  for (std::size_t k = 0; k < pos.size(); ++k) {
    pos_term -= clamped_log(pos[k]);
    if (grad_pos != nullptr) grad_pos->values()[k] = -inv_pos * clamped_log_grad(pos[k]);
  }
  double neg_term = 0.0;
  auto neg = neg_scores.values();
  for (std::size_t k = 0; k < neg.size(); ++k) {
    const double complement = 1.0 - neg[k];
    neg_term -= clamped_log(complement);
    if (grad_neg != nullptr) grad_neg->values()[k] = inv_neg * clamped_log_grad(complement);
  }
  return pos_term * inv_pos + neg_term * inv_neg;
}

double gen_loss(const DenseMatrix& neg_scores, DenseMatrix* grad_neg) {
  if (neg_scores.size() == 0) throw ConfigError("gen_loss: no samples");
  const double inv = 1.0 / static_cast<double>(neg_scores.size());
  if (grad_neg != nullptr) *grad_neg = DenseMatrix(neg_scores.rows(), neg_scores.cols());
  double total = 0.0;
  auto s = neg_scores.values();
  for (std::size_t k = 0; k < s.size(); ++k) {
    total -= clamped_log(s[k]);
    if (grad_neg != nullptr) grad_neg->values()[k] = -inv * clamped_log_grad(s[k]);
  }
  return total * inv;
}

double infonce(const DenseMatrix& x, const DenseMatrix& y, DenseMatrix* grad_x,
               DenseMatrix* grad_y) {
  require_same_shape("infonce", x, y);
  const std::size_t k_rows = x.rows();
  if (k_rows == 0) throw ConfigError("infonce: needs at least one sample pair");
  const double inv_k = 1.0 / static_cast<double>(k_rows);
  const double log_k = std::log(static_cast<double>(k_rows));

  // scores(i, j) = x_i · y_j
  const DenseMatrix scores = matmul_transpose_b(x, y);
  const bool want_grad = grad_x != nullptr || grad_y != nullptr;
  DenseMatrix coeff = want_grad ? DenseMatrix(k_rows, k_rows) : DenseMatrix();

  double total = 0.0;
  for (std::size_t i = 0; i < k_rows; ++i) {
    auto row = scores.row(i);
    const double lse = log_sum_exp(row);
    total += row[i] - lse + log_k;
    if (want_grad) {
      for (std::size_t j = 0; j < k_rows; ++j) coeff(i, j) = -inv_k * std::exp(row[j] - lse);
      coeff(i, i) += inv_k;
    }
  }
  if (grad_x != nullptr) *grad_x = matmul(coeff, y);
  if (grad_y != nullptr) *grad_y = matmul_transpose_a(coeff, x);
  return total * inv_k;
}

double mi_constraint(const DenseMatrix& x_hat_m, const DenseMatrix& x_hat,
                     const UserPartition& partition, DenseMatrix* grad_x_hat_m,
                     DenseMatrix* grad_x_hat) {
  require_same_shape("mi_constraint", x_hat_m, x_hat);
  if (partition.labeled.empty()) {
    throw ConfigError("mi_constraint: no fully labeled users");
  }
  if (grad_x_hat_m != nullptr) *grad_x_hat_m = DenseMatrix(x_hat.rows(), x_hat.cols());
  if (grad_x_hat != nullptr) *grad_x_hat = DenseMatrix(x_hat.rows(), x_hat.cols());

  auto term = [&](std::span<const std::size_t> users, double sign) {
    const DenseMatrix xm = gather_rows(x_hat_m, users);
    const DenseMatrix xu = gather_rows(x_hat, users);
    DenseMatrix g_m;
    DenseMatrix g_u;
    const double value = infonce(xm, xu, grad_x_hat_m ? &g_m : nullptr, grad_x_hat ? &g_u : nullptr);
    if (grad_x_hat_m != nullptr) {
      scale_in_place(g_m, sign);
      scatter_add_rows(*grad_x_hat_m, users, g_m);
    }
    if (grad_x_hat != nullptr) {
      scale_in_place(g_u, sign);
      scatter_add_rows(*grad_x_hat, users, g_u);
    }
    return sign * value;
  };

  double total = term(partition.labeled, -1.0);
  if (!partition.unlabeled.empty()) total += term(partition.unlabeled, 1.0);
  return total;
}

double total_loss(const LossParts& parts, double beta, double lambda) {
  const std::pair<const char*, double> named[] = {
      {"l_vae", parts.l_vae}, {"l_d", parts.l_d}, {"l_gnn", parts.l_gnn}, {"l_mi", parts.l_mi}};
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) {
      throw NumericalError(std::string("total_loss: ") + name + " is not finite (" +
                           std::to_string(value) + ")");
    }
  }
  return parts.l_vae + beta * (parts.l_d + parts.l_gnn) + lambda * parts.l_mi;
}

LossBreakdown make_breakdown(double l_recon, double l_kl, double l_d, double l_gnn, double l_mi,
                             double beta, double lambda, double kl_weight) {
  LossBreakdown b;
  b.l_recon = l_recon;
  b.l_kl = l_kl;
  b.l_vae = l_recon + kl_weight * l_kl;
  b.kl_weight = kl_weight;
  b.l_d = l_d;
  b.l_gnn = l_gnn;
  b.l_mi = l_mi;
  b.beta = beta;
  b.lambda = lambda;
  b.total = total_loss({b.l_vae, l_d, l_gnn, l_mi}, beta, lambda);
  return b;
}

}  // namespace attrinfer

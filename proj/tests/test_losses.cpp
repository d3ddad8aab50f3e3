#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "attrinfer/error.hpp"
#include "attrinfer/grad_check.hpp"
#include "attrinfer/losses.hpp"
#include "attrinfer/numerics.hpp"
#include "support/test_support.hpp"

namespace attrinfer {
namespace {

using testing::random_matrix;

// Direct evaluation without any stabilization.
double infonce_oracle(const DenseMatrix& x, const DenseMatrix& y) {
  const std::size_t k = x.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double denom = 0.0;
    double pos = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) dot += x(i, c) * y(j, c);
      denom += std::exp(dot);
      if (i == j) pos = std::exp(dot);
    }
    total += std::log(pos / (denom / static_cast<double>(k)));
  }
  return total / static_cast<double>(k);
}

AttributeSchema schema_2_4() {
  const std::size_t counts[] = {2, 4};
  return AttributeSchema::from_label_counts(counts);
}

TEST(ReconLoss, ClosedFormTwoCells) {
  const AttributeSchema schema = schema_2_4();
  // cell (0,0) target label 1 at p=0.5; cell (0,1) target label 2 at p=0.25
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 0, 1, 0, 0}});
  const DenseMatrix x_hat = DenseMatrix::from_rows({{0.5, 0.5, 0.25, 0.25, 0.25, 0.25}});
  LabelMask mask(1, 2);
  mask.set(0, 0, true);
  mask.set(0, 1, true);
  EXPECT_NEAR(recon_loss(x_hat, x, mask, schema), (std::log(2.0) + std::log(4.0)) / 2.0, 1e-12);
}

TEST(ReconLoss, UniformBlockCostsLogK) {
  const AttributeSchema schema = schema_2_4();
  const DenseMatrix x = DenseMatrix::from_rows({{0, 1, 0, 0, 0, 1}});
  const DenseMatrix x_hat = DenseMatrix::from_rows({{0.5, 0.5, 0.25, 0.25, 0.25, 0.25}});
  LabelMask mask(1, 2);
  mask.set(0, 1, true);
  EXPECT_NEAR(recon_loss(x_hat, x, mask, schema), std::log(4.0), 1e-12);
}

TEST(ReconLoss, PerfectReconstructionIsZero) {
  const AttributeSchema schema = schema_2_4();
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 0, 0, 1, 0}});
  LabelMask mask(1, 2);
  mask.set(0, 0, true);
  mask.set(0, 1, true);
  EXPECT_EQ(recon_loss(x, x, mask, schema), 0.0);
}

TEST(ReconLoss, MaskedCellsAreIgnored) {
  const AttributeSchema schema = schema_2_4();
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 0, 0, 1, 0}});
  const DenseMatrix x_hat = DenseMatrix::from_rows({{0.5, 0.5, 0.9, 0.01, 0.04, 0.05}});
  LabelMask mask(1, 2);
  mask.set(0, 0, true);
  EXPECT_NEAR(recon_loss(x_hat, x, mask, schema), std::log(2.0), 1e-12);
}

TEST(ReconLoss, ErrorsForBadInputs) {
  const AttributeSchema schema = schema_2_4();
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 0, 0, 1, 0}});
  LabelMask mask(1, 2);
  mask.set(0, 0, true);
  EXPECT_THROW(recon_loss(DenseMatrix::from_rows({{0, 1, 0.25, 0.25, 0.25, 0.25}}), x, mask, schema),
               NumericalError);
  EXPECT_THROW(recon_loss(x, x, LabelMask(1, 2), schema), ConfigError);
  LabelMask missing(1, 2);
  missing.set(0, 1, true);
  EXPECT_THROW(recon_loss(x, DenseMatrix(1, 6), missing, schema), SchemaError);
}

TEST(ReconLoss, DecreasesAsTargetProbabilityGrows) {
  const AttributeSchema schema = schema_2_4();
  const DenseMatrix x = DenseMatrix::from_rows({{1, 0, 0, 1, 0, 0}});
  LabelMask mask(1, 2);
  mask.set(0, 0, true);
  mask.set(0, 1, true);
  double previous = std::numeric_limits<double>::infinity();
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double rest = (1.0 - p) / 3.0;
    const DenseMatrix x_hat = DenseMatrix::from_rows({{0.3, 0.7, rest, p, rest, rest}});
    const double l = recon_loss(x_hat, x, mask, schema);
    EXPECT_LT(l, previous);
    previous = l;
  }
}

TEST(KlGauss, PriorMatchIsZero) {
  EXPECT_EQ(kl_gauss(DenseMatrix(3, 2), DenseMatrix(3, 2)), 0.0);
}

TEST(KlGauss, UnitMeanClosedForm) {
  EXPECT_NEAR(kl_gauss(DenseMatrix::from_rows({{1.0}}), DenseMatrix::from_rows({{0.0}})), 0.5,
              1e-15);
}

TEST(KlGauss, AveragesOverUsersAndSumsOverDims) {
  const DenseMatrix mu = DenseMatrix::from_rows({{1.0, 0.0}, {0.0, 2.0}});
  const DenseMatrix lv = DenseMatrix::from_rows({{0.0, std::log(2.0)}, {0.0, 0.0}});
  const double user0 = 0.5 * (1.0 + (2.0 - 1.0 - std::log(2.0)));
  const double user1 = 0.5 * 4.0;
  EXPECT_NEAR(kl_gauss(mu, lv), (user0 + user1) / 2.0, 1e-15);
}

TEST(KlGauss, NonNegativeForRandomInputs) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const DenseMatrix mu = random_matrix(4, 3, rng, -3.0, 3.0);
    const DenseMatrix lv = random_matrix(4, 3, rng, -4.0, 4.0);
    EXPECT_GT(kl_gauss(mu, lv), 0.0);
  }
}

TEST(DiscLoss, ClosedFormExample) {
  EXPECT_NEAR(disc_loss(DenseMatrix::from_rows({{0.8}}), DenseMatrix::from_rows({{0.3}})),
              -std::log(0.8) - std::log(0.7), 1e-15);
}

TEST(DiscLoss, UninformedDiscriminatorCostsTwoLogTwo) {
  EXPECT_NEAR(disc_loss(DenseMatrix(3, 1, 0.5), DenseMatrix(7, 1, 0.5)), 2.0 * std::log(2.0), 1e-15);
}

TEST(DiscLoss, PerfectDiscriminatorApproachesZero) {
  EXPECT_LT(disc_loss(DenseMatrix(2, 1, 1.0 - 1e-9), DenseMatrix(5, 1, 1e-9)), 1e-8);
}

TEST(DiscLoss, ConstantScoreMinimizedAtHalf) {
  double best = std::numeric_limits<double>::infinity();
  double best_c = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double c = k / 100.0;
    const double l = disc_loss(DenseMatrix(4, 1, c), DenseMatrix(9, 1, c));
    EXPECT_NEAR(l, -std::log(c) - std::log(1.0 - c), 1e-12);
    if (l < best) {
      best = l;
      best_c = c;
    }
  }
  EXPECT_EQ(best_c, 0.5);
}

TEST(DiscLoss, EmptyPositivesAreConfigError) {
  EXPECT_THROW(disc_loss(DenseMatrix(0, 1), DenseMatrix(3, 1, 0.5)), ConfigError);
}

TEST(GenLoss, ClosedFormExamples) {
  EXPECT_NEAR(gen_loss(DenseMatrix::from_rows({{std::exp(-1.0)}})), 1.0, 1e-15);
  EXPECT_NEAR(gen_loss(DenseMatrix(2, 1, 0.5)), std::log(2.0), 1e-15);
  EXPECT_LT(gen_loss(DenseMatrix(3, 1, 1.0 - 1e-12)), 1e-11);
}

TEST(InfoNce, SingleRowIsExactlyZero) {
  Rng rng(2);
  EXPECT_EQ(infonce(random_matrix(1, 4, rng), random_matrix(1, 4, rng)), 0.0);
}

TEST(InfoNce, IndistinguishableRowsGiveZero) {
  const DenseMatrix x(5, 3, 0.7);
  const DenseMatrix y(5, 3, -0.2);
  EXPECT_NEAR(infonce(x, y), 0.0, 1e-15);
}

TEST(InfoNce, MatchesDirectEvaluationAndBound) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix x = random_matrix(3, 4, rng);
    const DenseMatrix y = random_matrix(3, 4, rng);
    const double v = infonce(x, y);
    EXPECT_NEAR(v, infonce_oracle(x, y), 1e-9);
    EXPECT_LE(v, std::log(3.0) + 1e-12);
  }
}

TEST(InfoNce, StableForLargeInnerProducts) {
  const DenseMatrix x = DenseMatrix::from_rows({{30.0, 0.0}, {0.0, 30.0}});
  const double v = infonce(x, x);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, std::log(2.0), 1e-9);
}

TEST(InfoNce, InvariantUnderJointRowPermutation) {
  Rng rng(4);
  const DenseMatrix x = random_matrix(6, 3, rng);
  const DenseMatrix y = random_matrix(6, 3, rng);
  const std::size_t perm[] = {3, 5, 0, 1, 4, 2};
  EXPECT_NEAR(infonce(x, y), infonce(gather_rows(x, perm), gather_rows(y, perm)), 1e-12);
}

TEST(InfoNce, ErrorsForBadShapes) {
  EXPECT_THROW(infonce(DenseMatrix(0, 3), DenseMatrix(0, 3)), ConfigError);
  EXPECT_THROW(infonce(DenseMatrix(2, 3), DenseMatrix(2, 4)), DimensionError);
}

TEST(MiConstraint, FourUserSplitMatchesComposedOracle) {
  const DenseMatrix x_hat_m =
      DenseMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}});
  const DenseMatrix x_hat = DenseMatrix::from_rows({{0.7, 0.3}, {0.1, 0.9}, {0.5, 0.5}, {0.8, 0.2}});
  UserPartition p;
  p.labeled = {0, 2};
  p.unlabeled = {1, 3};
  const DenseMatrix xl_m = DenseMatrix::from_rows({{0.9, 0.1}, {0.6, 0.4}});
  const DenseMatrix xl = DenseMatrix::from_rows({{0.7, 0.3}, {0.5, 0.5}});
  const DenseMatrix xu_m = DenseMatrix::from_rows({{0.2, 0.8}, {0.3, 0.7}});
  const DenseMatrix xu = DenseMatrix::from_rows({{0.1, 0.9}, {0.8, 0.2}});
  const double expected = -infonce_oracle(xl_m, xl) + infonce_oracle(xu_m, xu);
  EXPECT_NEAR(mi_constraint(x_hat_m, x_hat, p), expected, 1e-12);
}

TEST(MiConstraint, NoUnlabeledUsersDropsSecondTerm) {
  Rng rng(5);
  const DenseMatrix a = random_matrix(3, 2, rng);
  const DenseMatrix b = random_matrix(3, 2, rng);
  UserPartition p;
  p.labeled = {0, 1, 2};
  EXPECT_NEAR(mi_constraint(a, b, p), -infonce_oracle(a, b), 1e-12);
}

TEST(MiConstraint, EqualTermsCancel) {
  const DenseMatrix m = DenseMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}, {0.9, 0.1}, {0.2, 0.8}});
  UserPartition p;
  p.labeled = {0, 1};
  p.unlabeled = {2, 3};
  EXPECT_NEAR(mi_constraint(m, m, p), 0.0, 1e-15);
}

TEST(MiConstraint, EmptyLabeledSetIsConfigError) {
  UserPartition p;
  p.unlabeled = {0, 1};
  EXPECT_THROW(mi_constraint(DenseMatrix(2, 2), DenseMatrix(2, 2), p), ConfigError);
}

TEST(TotalLoss, ArithmeticExample) {
  EXPECT_NEAR(total_loss(LossParts{1, 2, 3, 4}, 0.3, 0.2), 3.3, 1e-12);
}

TEST(TotalLoss, ZeroWeightsReduceToVaeTerm) {
  EXPECT_EQ(total_loss(LossParts{1.25, 2, 3, 4}, 0.0, 0.0), 1.25);
}

TEST(TotalLoss, LinearInEachPart) {
  const double beta = 0.7;
  const double lambda = 0.15;
  const LossParts base{0.5, 1.5, -0.25, 2.0};
  const double t0 = total_loss(base, beta, lambda);
  LossParts p = base;
  p.l_vae += 1.0;
  EXPECT_NEAR(total_loss(p, beta, lambda) - t0, 1.0, 1e-12);
  p = base;
  p.l_d += 1.0;
  EXPECT_NEAR(total_loss(p, beta, lambda) - t0, beta, 1e-12);
  p = base;
  p.l_gnn += 1.0;
  EXPECT_NEAR(total_loss(p, beta, lambda) - t0, beta, 1e-12);
  p = base;
  p.l_mi += 1.0;
  EXPECT_NEAR(total_loss(p, beta, lambda) - t0, lambda, 1e-12);
}

TEST(TotalLoss, NonFinitePartIsNamed) {
  try {
    total_loss(LossParts{1, 2, std::numeric_limits<double>::quiet_NaN(), 4}, 0.3, 0.2);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("l_gnn"), std::string::npos) << e.what();
  }
}

TEST(Breakdown, ComposesTotal) {
  const LossBreakdown b = make_breakdown(1.0, 0.5, 2.0, 3.0, 4.0, 0.3, 0.2, 0.1);
  EXPECT_NEAR(b.l_vae, 1.05, 1e-15);
  EXPECT_NEAR(b.total, b.l_vae + 0.3 * (2.0 + 3.0) + 0.2 * 4.0, 1e-12);
  EXPECT_GE(b.l_kl, 0.0);
}

// Gradient out-parameters against finite differences.

void expect_passes(const GradCheckReport& r) {
  for (const auto& c : r.params) {
    EXPECT_TRUE(c.passed) << c.name << " rel err " << c.max_relative_error;
  }
}

TEST(LossGradients, ReconAndKl) {
  Rng rng(6);
  const AttributeSchema schema = schema_2_4();
  DenseMatrix x_hat = random_matrix(3, 6, rng, 0.1, 1.0);
  const DenseMatrix x = DenseMatrix::from_rows(
      {{1, 0, 0, 0, 1, 0}, {0, 1, 1, 0, 0, 0}, {1, 0, 0, 0, 0, 0}});
  LabelMask mask(3, 2);
  mask.set(0, 0, true);
  mask.set(0, 1, true);
  mask.set(1, 1, true);
  mask.set(2, 0, true);
  DenseMatrix* params[] = {&x_hat};
  const std::string names[] = {"x_hat"};
  expect_passes(grad_check([&] { return recon_loss(x_hat, x, mask, schema); },
                           [&] {
                             DenseMatrix g;
                             recon_loss(x_hat, x, mask, schema, &g);
                             return std::vector<DenseMatrix>{g};
                           },
                           params, names));

  DenseMatrix mu = random_matrix(4, 3, rng);
  DenseMatrix lv = random_matrix(4, 3, rng);
  DenseMatrix* kl_params[] = {&mu, &lv};
  const std::string kl_names[] = {"mu", "log_var"};
  expect_passes(grad_check([&] { return kl_gauss(mu, lv); },
                           [&] {
                             DenseMatrix gm;
                             DenseMatrix gl;
                             kl_gauss(mu, lv, &gm, &gl);
                             return std::vector<DenseMatrix>{gm, gl};
                           },
                           kl_params, kl_names));
}

TEST(LossGradients, AdversarialTerms) {
  Rng rng(7);
  DenseMatrix pos = random_matrix(3, 1, rng, 0.1, 0.9);
  DenseMatrix neg = random_matrix(5, 1, rng, 0.1, 0.9);
  DenseMatrix* params[] = {&pos, &neg};
  const std::string names[] = {"pos", "neg"};
  expect_passes(grad_check([&] { return disc_loss(pos, neg); },
                           [&] {
                             DenseMatrix gp;
                             DenseMatrix gn;
                             disc_loss(pos, neg, &gp, &gn);
                             return std::vector<DenseMatrix>{gp, gn};
                           },
                           params, names));
  DenseMatrix* gen_params[] = {&neg};
  const std::string gen_names[] = {"neg"};
  expect_passes(grad_check([&] { return gen_loss(neg); },
                           [&] {
                             DenseMatrix gn;
                             gen_loss(neg, &gn);
                             return std::vector<DenseMatrix>{gn};
                           },
                           gen_params, gen_names));
}

TEST(LossGradients, InfoNceAndMiConstraint) {
  Rng rng(8);
  DenseMatrix x = random_matrix(5, 3, rng);
  DenseMatrix y = random_matrix(5, 3, rng);
  DenseMatrix* params[] = {&x, &y};
  const std::string names[] = {"x", "y"};
  expect_passes(grad_check([&] { return infonce(x, y); },
                           [&] {
                             DenseMatrix gx;
                             DenseMatrix gy;
                             infonce(x, y, &gx, &gy);
                             return std::vector<DenseMatrix>{gx, gy};
                           },
                           params, names));
  UserPartition p;
  p.labeled = {0, 3};
  p.unlabeled = {1, 2, 4};
  expect_passes(grad_check([&] { return mi_constraint(x, y, p); },
                           [&] {
                             DenseMatrix gx;
                             DenseMatrix gy;
                             mi_constraint(x, y, p, &gx, &gy);
                             return std::vector<DenseMatrix>{gx, gy};
                           },
                           params, names));
}

}  // namespace
}  // namespace attrinfer

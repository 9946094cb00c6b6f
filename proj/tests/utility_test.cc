// Copyright 2026 The idrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idrisk/utility.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "test_support.h"

namespace idrisk {
namespace {

using ::testing::ElementsAre;

std::vector<std::vector<double>> Rows(const Eigen::MatrixXd& x) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out[i].push_back(x(i, j));
  }
  return out;
}

std::vector<double> Vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double Utility(const Eigen::VectorXd& p) {
  return PropensityScoreUtility(
      std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

TEST(DesignMatrixTest, OneContinuousVariable) {
  const Schema s({VariableSpec::Continuous("x")});
  const DesignMatrix d =
      BuildDesignMatrix(Dataset(s, {{1, 2}}), Dataset(s, {{3, 4}}));
  ASSERT_EQ(d.x.rows(), 4);
  ASSERT_EQ(d.x.cols(), 2);
  EXPECT_THAT(Vec(d.y), ElementsAre(0, 0, 1, 1));
  EXPECT_THAT(d.column_names, ElementsAre("(Intercept)", "x"));
  // Pooled mean 2.5, sample sd sqrt(5/3).
  const double sd = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(d.x(0, 1), -1.5 / sd, 1e-15);
  EXPECT_NEAR(d.x(3, 1), 1.5 / sd, 1e-15);
  EXPECT_EQ(d.x(2, 0), 1.0);
}

TEST(DesignMatrixTest, DummyCodingDropsFirstLevel) {
  const Schema s({VariableSpec::Categorical("c", {"a", "b", "z"})});
  const DesignMatrix d =
      BuildDesignMatrix(Dataset(s, {{0, 1, 2}}), Dataset(s, {{2, 1, 0}}));
  EXPECT_THAT(d.column_names, ElementsAre("(Intercept)", "c=b", "c=z"));
  EXPECT_THAT(Vec(d.x.col(2)), ElementsAre(0, 0, 1, 1, 0, 0));
}

TEST(DesignMatrixTest, ConstantColumnsDropped) {
  const Schema s({VariableSpec::Continuous("k"), VariableSpec::Continuous("x"),
                  VariableSpec::Categorical("c", {"a", "b"})});
  const Dataset orig(s, {{5, 5}, {1, 2}, {0, 0}});
  const DesignMatrix d = BuildDesignMatrix(orig, orig);
  EXPECT_THAT(d.dropped, ElementsAre("k", "c=b"));
  EXPECT_EQ(d.x.cols(), 2);
  // Identical halves.
  EXPECT_EQ(d.x.topRows(2), d.x.bottomRows(2));
  const UtilityResult u = PropensityUtility(orig, std::vector<Dataset>{orig});
  EXPECT_EQ(u.warnings.size(), 2u);
}

TEST(LogisticTest, DuplicatedHalvesGiveOneHalf) {
  const Schema s({VariableSpec::Continuous("x"),
                  VariableSpec::Categorical("c", {"a", "b", "c"})});
  const Dataset orig(s, {{1, 7, 3, 9, 2}, {0, 1, 2, 1, 0}});
  const DesignMatrix d = BuildDesignMatrix(orig, orig);
  const PropensityFit fit = FitLogistic(d.x, d.y);
  EXPECT_TRUE(fit.converged);
  for (Eigen::Index i = 0; i < fit.p_hat.size(); ++i) {
    EXPECT_NEAR(fit.p_hat[i], 0.5, 1e-6);
  }
  const UtilityResult u = PropensityUtility(orig, std::vector<Dataset>{orig});
  EXPECT_LT(u.per_dataset[0], 1e-8);
}

TEST(LogisticTest, SeparatedDataApproachesQuarter) {
  Eigen::MatrixXd x(6, 2);
  x << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  const PropensityFit fit = FitLogistic(x, y);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(fit.p_hat[i], y[i], 1e-3);
    EXPECT_GT(fit.p_hat[i], 0);
    EXPECT_LT(fit.p_hat[i], 1);
  }
  const double u = Utility(fit.p_hat);
  EXPECT_GT(u, 0.249);
  EXPECT_LE(u, 0.25);
}

TEST(LogisticTest, SixRowInstanceMatchesNewtonOracle) {
  Eigen::MatrixXd x(6, 2);
  x << 1, 0.5, 1, 1.5, 1, -0.3, 1, 2.0, 1, -1.1, 1, 0.9;
  Eigen::VectorXd y(6);
  y << 0, 1, 0, 1, 1, 0;
  const PropensityFit fit = FitLogistic(x, y);
  ASSERT_TRUE(fit.converged);
  const auto oracle = testing::NewtonLogistic(Rows(x), Vec(y), 1e-8);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(fit.coefficients[k], oracle.beta[k], 1e-6);
  }
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(fit.p_hat[i], oracle.p[i], 1e-9);
}

TEST(LogisticTest, FourPlusFourUtilityMatchesOracle) {
  const Schema s({VariableSpec::Continuous("x"),
                  VariableSpec::Categorical("g", {"a", "b"})});
  const Dataset orig(s, {{1, 2, 3, 4}, {0, 1, 0, 1}});
  const Dataset syn(s, {{2, 2.5, 4, 6}, {1, 1, 0, 1}});
  const DesignMatrix d = BuildDesignMatrix(orig, syn);
  const auto oracle = testing::NewtonLogistic(Rows(d.x), Vec(d.y), 1e-8);
  double expected = 0;
  for (double p : oracle.p) expected += (p - 0.5) * (p - 0.5);
  expected /= 8;
  const UtilityResult u = PropensityUtility(orig, std::vector<Dataset>{syn});
  EXPECT_NEAR(u.per_dataset[0], expected, 1e-6);
  EXPECT_TRUE(u.converged[0]);
}

TEST(LogisticTest, Errors) {
  Eigen::MatrixXd x(2, 1);
  x << 1, NAN;
  Eigen::VectorXd y(2);
  y << 0, 1;
  EXPECT_THROW(FitLogistic(x, y), DataError);
  x << 1, 1;
  y << 0, 2;
  EXPECT_THROW(FitLogistic(x, y), DataError);
  EXPECT_THROW(FitLogistic(x, Eigen::VectorXd::Zero(3)), DataError);

  const Schema s({VariableSpec::Continuous("x")});
  const Dataset orig(s, {{1, 2}});
  EXPECT_THROW(PropensityUtility(orig, {}), DataError);
  EXPECT_THROW(PropensityUtility(orig, std::vector<Dataset>{Dataset(s, {{1}})}),
               DataError);
}

TEST(UtilityScoreTest, Extremes) {
  EXPECT_EQ(PropensityScoreUtility(std::vector<double>{0, 1, 1, 0}), 0.25);
  EXPECT_EQ(PropensityScoreUtility(std::vector<double>{0.5, 0.5}), 0.0);
}

// Random logistic designs with overlapping classes.
struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Design RandomDesign(Rng& rng) {
  const Eigen::Index n = 12 + static_cast<Eigen::Index>(rng.UniformIndex(40));
  const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.UniformIndex(3));
  Design d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x(i, 0) = 1;
    double eta = 0.3;
    for (Eigen::Index j = 1; j < p; ++j) {
      d.x(i, j) = rng.Normal();
      eta += 0.8 * d.x(i, j) / static_cast<double>(j);
    }
    d.y[i] = rng.Uniform() < 1 / (1 + std::exp(-eta)) ? 1 : 0;
  }
  // Guarantee both classes appear in both halves of the sample.
  d.y[0] = 0;
  d.y[1] = 1;
  d.y[n - 2] = 0;
  d.y[n - 1] = 1;
  return d;
}

TEST(LogisticPropertyTest, GradientVanishesAndMatchesFiniteDifferences) {
  Rng rng(201);
  for (int trial = 0; trial < 30; ++trial) {
    const Design d = RandomDesign(rng);
    const PropensityFit fit = FitLogistic(d.x, d.y);
    const Eigen::VectorXd g =
        LogLikelihoodGradient(d.x, d.y, fit.coefficients, 1e-8);
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-6);
    // Away from the optimum, compare the analytic gradient with central
    // differences of the objective.
    Eigen::VectorXd beta(d.x.cols());
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = rng.Normal();
    const Eigen::VectorXd analytic = LogLikelihoodGradient(d.x, d.y, beta, 0.1);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      Eigen::VectorXd hi = beta, lo = beta;
      hi[j] += 1e-5;
      lo[j] -= 1e-5;
      const double numeric = (PenalizedLogLikelihood(d.x, d.y, hi, 0.1) -
                              PenalizedLogLikelihood(d.x, d.y, lo, 0.1)) /
                             2e-5;
      EXPECT_NEAR(numeric, analytic[j],
                  1e-4 * std::max(1.0, std::fabs(analytic[j])));
    }
  }
}

TEST(LogisticPropertyTest, MatchesOracleAndBounds) {
  Rng rng(202);
  for (int trial = 0; trial < 30; ++trial) {
    const Design d = RandomDesign(rng);
    const PropensityFit fit = FitLogistic(d.x, d.y);
    const auto oracle = testing::NewtonLogistic(Rows(d.x), Vec(d.y), 1e-8);
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
      EXPECT_NEAR(fit.coefficients[j], oracle.beta[j], 1e-6);
    }
    const double u = Utility(fit.p_hat);
    EXPECT_GE(u, 0);
    EXPECT_LE(u, 0.25);
    // Label swap: p -> 1 - p leaves U_p unchanged.
    const PropensityFit swapped =
        FitLogistic(d.x, (1.0 - d.y.array()).matrix());
    EXPECT_NEAR(Utility(swapped.p_hat), u, 1e-12);
  }
}

TEST(UtilityPropertyTest, RowOrderWithinHalvesIrrelevant) {
  Rng rng(203);
  for (int trial = 0; trial < 15; ++trial) {
    testing::InstanceShape shape;
    shape.max_rows = 40;
    shape.lattice = false;
    const auto inst = testing::RandomRiskInstance(rng, shape);
    if (inst.orig.num_rows() < 4) continue;
    const UtilityResult base = PropensityUtility(inst.orig, inst.syn);
    std::vector<Dataset> reversed;
    for (const auto& s : inst.syn) {
      std::vector<std::vector<double>> cols;
      for (std::size_t c = 0; c < s.num_cols(); ++c) {
        cols.emplace_back(s.column(c).rbegin(), s.column(c).rend());
      }
      reversed.emplace_back(s.schema(), cols);
    }
    const UtilityResult other = PropensityUtility(inst.orig, reversed);
    for (std::size_t k = 0; k < base.per_dataset.size(); ++k) {
      EXPECT_NEAR(other.per_dataset[k], base.per_dataset[k], 1e-9);
      EXPECT_GE(base.per_dataset[k], 0);
      EXPECT_LE(base.per_dataset[k], 0.25);
    }
  }
}

}  // namespace
}  // namespace idrisk

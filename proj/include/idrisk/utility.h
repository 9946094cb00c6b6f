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

// Propensity-score global utility.
//
// The original and synthetic rows are stacked, labelled 0/1, and a main-effects
// logistic regression predicts the label. With p_i the fitted probability,
//
//   U_p = (1 / 2n) * sum_{i=1}^{2n} (p_i - 1/2)^2
//
// U_p = 0 means the classifier cannot tell the two files apart; 0.25 means it
// separates them perfectly.

#ifndef IDRISK_UTILITY_H_
#define IDRISK_UTILITY_H_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "idrisk/dataset.h"

namespace idrisk {

struct DesignMatrix {
  Eigen::MatrixXd x;  // 2n x p, first column is the intercept
  Eigen::VectorXd y;  // 0 for original rows, 1 for synthetic rows
  std::vector<std::string> column_names;
  // Columns dropped because they were constant after pooling.
  std::vector<std::string> dropped;
};

// Stacks original then synthetic rows. Continuous variables are standardized
// by the pooled mean and sample standard deviation; categorical variables are
// dummy coded against their first level.
DesignMatrix BuildDesignMatrix(const Dataset& orig, const Dataset& syn);

struct LogisticOptions {
  double tol = 1e-8;
  int max_iter = 100;
  // L2 penalty on every coefficient, intercept included.
  double ridge = 1e-8;
};

struct PropensityFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd p_hat;
  bool converged = false;
  int iterations = 0;
};

// Maximizes  sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)] - ridge/2 * |b|^2
// by iteratively reweighted least squares with step halving. Stops when the
// largest coefficient change falls below tol. Fitted probabilities are kept
// strictly inside (0, 1).
PropensityFit FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const LogisticOptions& options = {});

// Gradient of the penalized log-likelihood at `beta`.
Eigen::VectorXd LogLikelihoodGradient(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& beta,
                                      double ridge);
double PenalizedLogLikelihood(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double ridge);

// Mean squared deviation of the scores from 1/2.
double PropensityScoreUtility(std::span<const double> p_hat);

struct UtilityResult {
  std::vector<double> per_dataset;
  std::vector<bool> converged;
  std::vector<std::string> warnings;
};

UtilityResult PropensityUtility(const Dataset& orig,
                                std::span<const Dataset> syn_list,
                                const LogisticOptions& options = {},
                                unsigned threads = 0);

}  // namespace idrisk

#endif  // IDRISK_UTILITY_H_

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

#include <algorithm>
#include <cmath>

#include "idrisk/parallel.h"

namespace idrisk {

namespace {

// Fitted probabilities are clamped to this distance from 0 and 1.
constexpr double kProbabilityFloor = 1e-15;

double Sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double Softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

Eigen::VectorXd Probabilities(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = x * beta;
  return eta.unaryExpr([](double e) { return Sigmoid(e); });
}

}  // namespace

DesignMatrix BuildDesignMatrix(const Dataset& orig, const Dataset& syn_in) {
  if (syn_in.num_rows() != orig.num_rows()) {
    throw DataError("synthetic dataset has " +
                    std::to_string(syn_in.num_rows()) +
                    " rows, original has " + std::to_string(orig.num_rows()));
  }
  const Dataset syn = syn_in.ConformTo(orig.schema());
  const Schema& schema = orig.schema();
  const std::size_t n = orig.num_rows();
  const std::size_t rows = 2 * n;

  std::vector<Eigen::VectorXd> cols;
  DesignMatrix out;
  cols.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows)));
  out.column_names.push_back("(Intercept)");

  auto pooled = [&](std::size_t c) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(rows));
    auto a = orig.column(c);
    auto b = syn.column(c);
    for (std::size_t i = 0; i < n; ++i) {
      v[static_cast<Eigen::Index>(i)] = a[i];
      v[static_cast<Eigen::Index>(n + i)] = b[i];
    }
    return v;
  };

  for (std::size_t c = 0; c < schema.size(); ++c) {
    const VariableSpec& spec = schema[c];
    const Eigen::VectorXd v = pooled(c);
    if (!spec.is_categorical()) {
      const double mean = v.mean();
      const double ss = (v.array() - mean).square().sum();
      const double sd =
          rows > 1 ? std::sqrt(ss / static_cast<double>(rows - 1)) : 0.0;
      if (!(sd > 0)) {
        out.dropped.push_back(spec.name);
        continue;
      }
      cols.push_back((v.array() - mean) / sd);
      out.column_names.push_back(spec.name);
      continue;
    }
    for (std::size_t level = 1; level < spec.levels.size(); ++level) {
      Eigen::VectorXd dummy =
          (v.array() == static_cast<double>(level)).cast<double>();
      const std::string name = spec.name + "=" + spec.levels[level];
      const double ones = dummy.sum();
      if (ones == 0 || ones == static_cast<double>(rows)) {
        out.dropped.push_back(name);
        continue;
      }
      cols.push_back(std::move(dummy));
      out.column_names.push_back(name);
    }
  }

  out.x.resize(static_cast<Eigen::Index>(rows),
               static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.x.col(static_cast<Eigen::Index>(j)) = cols[j];
  }
  out.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
  out.y.tail(static_cast<Eigen::Index>(n)).setOnes();
  return out;
}

double PenalizedLogLikelihood(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += y[i] * eta[i] - Softplus(eta[i]);
  }
  return ll - 0.5 * ridge * beta.squaredNorm();
}

Eigen::VectorXd LogLikelihoodGradient(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& beta,
                                      double ridge) {
  return x.transpose() * (y - Probabilities(x, beta)) - ridge * beta;
}

PropensityFit FitLogistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const LogisticOptions& options) {
  if (x.rows() != y.size()) {
    throw DataError("logistic fit: design has " + std::to_string(x.rows()) +
                    " rows but " + std::to_string(y.size()) + " labels");
  }
  if (!x.allFinite()) throw DataError("logistic fit: non-finite design entry");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw DataError("logistic fit: labels must be 0 or 1");
    }
  }

  const Eigen::Index p = x.cols();
  PropensityFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double objective = PenalizedLogLikelihood(x, y, beta, options.ridge);
  const Eigen::MatrixXd penalty =
      options.ridge * Eigen::MatrixXd::Identity(p, p);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    fit.iterations = iter;
    const Eigen::VectorXd prob = Probabilities(x, beta);
    const Eigen::VectorXd weights =
        (prob.array() * (1.0 - prob.array())).matrix();
    const Eigen::VectorXd gradient =
        x.transpose() * (y - prob) - options.ridge * beta;
    const Eigen::MatrixXd hessian =
        x.transpose() * weights.asDiagonal() * x + penalty;
    const Eigen::VectorXd step = hessian.ldlt().solve(gradient);
    if (!step.allFinite()) break;

    // Halve the Newton step until the penalized likelihood does not drop by
    // more than rounding.
    const double slack = 1e-12 * (1.0 + std::fabs(objective));
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double next = PenalizedLogLikelihood(x, y, candidate, options.ridge);
    while (next < objective - slack && scale > 1e-10) {
      scale *= 0.5;
      candidate = beta + scale * step;
      next = PenalizedLogLikelihood(x, y, candidate, options.ridge);
    }
    beta = std::move(candidate);
    objective = next;
    if (step.cwiseAbs().maxCoeff() < options.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.coefficients = beta;
  fit.p_hat = Probabilities(x, beta).unaryExpr([](double v) {
    return std::clamp(v, kProbabilityFloor, 1.0 - kProbabilityFloor);
  });
  return fit;
}

double PropensityScoreUtility(std::span<const double> p_hat) {
  if (p_hat.empty()) return 0.0;
  double sum = 0;
  for (double p : p_hat) sum += (p - 0.5) * (p - 0.5);
  return sum / static_cast<double>(p_hat.size());
}

UtilityResult PropensityUtility(const Dataset& orig,
                                std::span<const Dataset> syn_list,
                                const LogisticOptions& options,
                                unsigned threads) {
  if (syn_list.empty()) {
    throw DataError("at least one synthetic dataset is required");
  }
  if (orig.num_rows() == 0) {
    throw DataError("propensity utility needs at least one record");
  }
  UtilityResult result;
  const std::size_t m = syn_list.size();
  result.per_dataset.assign(m, 0.0);
  std::vector<char> converged(m, 0);
  std::vector<std::vector<std::string>> dropped(m);
  ParallelFor(m, threads, [&](std::size_t k) {
    const DesignMatrix design = BuildDesignMatrix(orig, syn_list[k]);
    const PropensityFit fit = FitLogistic(design.x, design.y, options);
    result.per_dataset[k] = PropensityScoreUtility(
        std::span<const double>(fit.p_hat.data(),
                                static_cast<std::size_t>(fit.p_hat.size())));
    converged[k] = fit.converged ? 1 : 0;
    dropped[k] = design.dropped;
  });
  for (std::size_t k = 0; k < m; ++k) {
    result.converged.push_back(converged[k] != 0);
    for (const auto& name : dropped[k]) {
      result.warnings.push_back("synthetic dataset " + std::to_string(k + 1) +
                                ": dropped constant design column '" + name +
                                "'");
    }
    if (!converged[k]) {
      result.warnings.push_back("synthetic dataset " + std::to_string(k + 1) +
                                ": logistic fit did not converge");
    }
  }
  return result;
}

}  // namespace idrisk

#pragma once

#include <span>

#include <Eigen/Dense>

#include "apm/data.hpp"
#include "apm/linmodel.hpp"

namespace apm {

// Win/loss model on draw-free data:
//   -(1/2n) sum[y log p + (1 - y) log(1 - p)] + alpha*lambda*||b||_1 + (1 - alpha)*lambda*||b||_2^2
// with p = 1 / (1 + exp(-x'b)); alpha = 0 is ridge, alpha = 1 lasso.
struct LogisticFitConfig {
  double alpha = 1.0;
  double lambda = 0.0;
  double tol = 1e-7;
  int max_iter = 10000;          // outer majorization steps
  int max_inner_sweeps = 1000;   // coordinate-descent sweeps per outer step
  double divergence_bound = 30.0;
};

inline constexpr double kProbabilityFloor = 1e-12;

double predict_prob(std::span<const double> beta, std::span<const Entry> x_row);
double predict_prob(double linear_predictor) noexcept;

// The smooth loss term (first part of the objective above).
double logistic_loss(const Dataset& ds, std::span<const double> labels, const Eigen::VectorXd& beta);
// Its gradient, -(1/2n) X'(labels - p).
Eigen::VectorXd logistic_gradient(const Dataset& ds, std::span<const double> labels,
                                  const Eigen::VectorXd& beta);
double logistic_objective(const Dataset& ds, std::span<const double> labels,
                          const Eigen::VectorXd& beta, double alpha, double lambda);
double logistic_kkt_residual(const Dataset& ds, std::span<const double> labels,
                             const Eigen::VectorXd& beta, double alpha, double lambda);

// max_j |(1/2n) x_j'(labels - 1/2)|: beta = 0 is optimal once alpha*lambda reaches it.
double binomial_lambda_max(const Dataset& ds, std::span<const double> labels);

// Proximal Newton with the fixed curvature bound p(1 - p) <= 1/4: every outer
// step minimizes the resulting quadratic majorizer plus the penalty with the
// shared coordinate-descent solver, so the objective never increases.
// `objective_trace`, when given, receives the objective after each outer step.
FitResult fit_logistic(const Dataset& ds, std::span<const double> labels,
                       const LogisticFitConfig& config, const Eigen::VectorXd& warm_start = {},
                       std::vector<double>* objective_trace = nullptr);

}  // namespace apm

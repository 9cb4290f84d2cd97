#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apm/data.hpp"

namespace apm {

enum class ModelKind {
  Ols,
  Ridge,
  ElasticNet,
  Logistic,
  LogisticRidge,
  LogisticElasticNet,
  BayesSimple,
  BayesHierarchical,
};

const char* to_string(ModelKind kind) noexcept;

// Penalized least squares in the parameterization
//   (1/2n)||y - X b||^2 + alpha*lambda*||b||_1 + (1 - alpha)*lambda*||b||_2^2
// Note the L2 term carries no 1/2: it equals a glmnet-style fit with
// lambda_glmnet = lambda * (2 - alpha) and alpha_glmnet = alpha / (2 - alpha).
struct LinearFitConfig {
  ModelKind kind = ModelKind::ElasticNet;  // Ols, Ridge or ElasticNet
  double alpha = 1.0;                       // ignored for Ols, forced to 0 for Ridge
  double lambda = 0.0;
  double tol = 1e-7;
  int max_iter = 100000;

  double effective_alpha() const noexcept { return kind == ModelKind::Ridge ? 0.0 : alpha; }
};

struct FitResult {
  ModelKind kind = ModelKind::ElasticNet;
  double alpha = 0.0;
  double lambda = 0.0;
  std::vector<PlayerId> players;
  Eigen::VectorXd coefficients;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  // Largest optimality violation at the returned point: KKT residual for
  // penalized fits, (1/n)||X'(y - Xb)||_inf for OLS.
  double residual = 0.0;
  bool separation = false;  // logistic only: divergent coefficients under lambda = 0
};

FitResult fit_linear(const Dataset& ds, const LinearFitConfig& config);

// Minimum-norm least squares, no intercept.
FitResult fit_ols(const Dataset& ds, const LinearFitConfig& config = {ModelKind::Ols});

// Cyclic coordinate descent starting from `warm_start` (zero when empty).
FitResult fit_enet(const Dataset& ds, const LinearFitConfig& config,
                   const Eigen::VectorXd& warm_start = {});

double enet_objective(const Dataset& ds, const Eigen::VectorXd& beta, double alpha,
                      double lambda);

double kkt_residual(const Dataset& ds, const Eigen::VectorXd& beta, double alpha, double lambda);

// max_j |(1/n) x_j' y|, the smallest L1 strength that zeroes every coefficient.
double gaussian_lambda_max(const Dataset& ds, std::span<const double> y);

struct CoordinateDescentResult {
  int sweeps = 0;
  bool converged = false;
  double max_change = 0.0;
};

// Shared inner solver. Minimizes
//   (weight/2n)||target - X b||^2 + alpha*lambda*||b||_1 + (1 - alpha)*lambda*||b||_2^2
// in place. On entry `residual` must equal target - X*beta; it is kept in
// sync. Coordinates are visited in column order; after each full sweep that
// moves something, the active set is iterated to convergence before the
// next full sweep.
CoordinateDescentResult coordinate_descent(const Dataset& ds, double weight, double alpha,
                                          double lambda, double tol, int max_sweeps,
                                          Eigen::VectorXd& beta, Eigen::VectorXd& residual);

inline double soft_threshold(double z, double gamma) noexcept {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace apm

#include "apm/logmodel.hpp"

#include <algorithm>
#include <cmath>

#include "apm/error.hpp"

namespace apm {

namespace {

// log(1 + exp(t)) without overflow
double softplus(double t) noexcept {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

void check_labels(const Dataset& ds, std::span<const double> labels) {
  if (labels.size() != ds.n_rows()) throw Error(ErrorCode::InvalidArgument, "labels: size mismatch");
  for (const double v : labels) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

double predict_prob(double linear_predictor) noexcept {
  if (linear_predictor >= 0.0) return 1.0 / (1.0 + std::exp(-linear_predictor));
  const double e = std::exp(linear_predictor);
  return e / (1.0 + e);
}

double predict_prob(std::span<const double> beta, std::span<const Entry> x_row) {
  double eta = 0.0;
  for (const Entry& e : x_row) {
    if (e.index >= beta.size()) throw Error(ErrorCode::InvalidArgument, "predict_prob: size mismatch");
    eta += e.sign * beta[e.index];
  }
  return predict_prob(eta);
}

double logistic_loss(const Dataset& ds, std::span<const double> labels, const Eigen::VectorXd& beta) {
  check_labels(ds, labels);
  if (ds.n_rows() == 0) return 0.0;
  const Eigen::VectorXd eta = ds.predict(beta);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const double t = eta[static_cast<Eigen::Index>(i)];
    total += softplus(t) - labels[i] * t;
  }
  return total / (2.0 * static_cast<double>(ds.n_rows()));
}

Eigen::VectorXd logistic_gradient(const Dataset& ds, std::span<const double> labels,
                                  const Eigen::VectorXd& beta) {
  check_labels(ds, labels);
  const auto p = static_cast<Eigen::Index>(ds.n_players());
  if (ds.n_rows() == 0) return Eigen::VectorXd::Zero(p);
  const Eigen::VectorXd eta = ds.predict(beta);
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    resid[i] = labels[static_cast<std::size_t>(i)] - predict_prob(eta[i]);
  }
  return -ds.transpose_times(as_span(resid)) / (2.0 * static_cast<double>(ds.n_rows()));
}

double logistic_objective(const Dataset& ds, std::span<const double> labels,
                          const Eigen::VectorXd& beta, double alpha, double lambda) {
  return logistic_loss(ds, labels, beta) + alpha * lambda * beta.lpNorm<1>() +
         (1.0 - alpha) * lambda * beta.squaredNorm();
}

double logistic_kkt_residual(const Dataset& ds, std::span<const double> labels,
                             const Eigen::VectorXd& beta, double alpha, double lambda) {
  const Eigen::VectorXd grad = logistic_gradient(ds, labels, beta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double v;
    if (beta[j] != 0.0) {
      const double sign = beta[j] > 0.0 ? 1.0 : -1.0;
      v = std::abs(-grad[j] - alpha * lambda * sign - 2.0 * (1.0 - alpha) * lambda * beta[j]);
    } else {
      v = std::max(0.0, std::abs(grad[j]) - alpha * lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double binomial_lambda_max(const Dataset& ds, std::span<const double> labels) {
  check_labels(ds, labels);
  if (ds.n_rows() == 0) return 0.0;
  std::vector<double> centered(labels.begin(), labels.end());
  for (double& v : centered) v -= 0.5;
  const Eigen::VectorXd g = ds.transpose_times(centered);
  return g.cwiseAbs().maxCoeff() / (2.0 * static_cast<double>(ds.n_rows()));
}

namespace {

// Unpenalized fits stall on separable data because the fixed curvature bound
// shrinks steps like exp(-|b|). Keep doubling the last step while the loss
// strictly drops; divergent directions then reach the bound in a few steps.
void extrapolate(const Dataset& ds, std::span<const double> labels, const Eigen::VectorXd& before,
                 Eigen::VectorXd& beta) {
  Eigen::VectorXd step = beta - before;
  double best = logistic_loss(ds, labels, beta);
  for (int k = 0; k < 60; ++k) {
    const Eigen::VectorXd candidate = beta + step;
    const double value = logistic_loss(ds, labels, candidate);
    if (!(value < best)) break;
    beta = candidate;
    best = value;
    step *= 2.0;
  }
}

}  // namespace

FitResult fit_logistic(const Dataset& ds, std::span<const double> labels,
                       const LogisticFitConfig& config, const Eigen::VectorXd& warm_start,
                       std::vector<double>* objective_trace) {
  if (ds.n_rows() == 0 || ds.n_players() == 0) {
    throw Error(ErrorCode::EmptyModel, "logistic fit needs at least one match and one player");
  }
  check_labels(ds, labels);
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a non-negative number");
  }
  if (!(config.tol > 0.0) || config.max_iter < 1 || config.max_inner_sweeps < 1) {
    throw Error(ErrorCode::InvalidArgument, "tol and iteration limits must be positive");
  }

  const auto p = static_cast<Eigen::Index>(ds.n_players());
  const auto n = static_cast<Eigen::Index>(ds.n_rows());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (warm_start.size() != 0) {
    if (warm_start.size() != p) throw Error(ErrorCode::InvalidArgument, "warm start size mismatch");
    beta = warm_start;
  }

  FitResult fit;
  fit.kind = config.lambda == 0.0 ? ModelKind::Logistic
             : config.alpha == 0.0 ? ModelKind::LogisticRidge
                                   : ModelKind::LogisticElasticNet;
  fit.alpha = config.alpha;
  fit.lambda = config.lambda;
  fit.players = ds.players();

  // Loss Hessian is (1/2n) X' W X with W <= 1/4, so the majorizer is
  // (1/16n)||u - X b||^2 with working response u = X b0 + 4 (y - p(b0)):
  // the least-squares form with weight 1/8.
  constexpr double kWeight = 1.0 / 8.0;
  Eigen::VectorXd eta = ds.predict(beta);
  Eigen::VectorXd residual(n);
  for (int outer = 0; outer < config.max_iter; ++outer) {
    for (Eigen::Index i = 0; i < n; ++i) {
      residual[i] = 4.0 * (labels[static_cast<std::size_t>(i)] - predict_prob(eta[i]));
    }
    const Eigen::VectorXd before = beta;
    coordinate_descent(ds, kWeight, config.alpha, config.lambda, config.tol,
                       config.max_inner_sweeps, beta, residual);
    ++fit.iterations;
    const double change = (beta - before).cwiseAbs().maxCoeff();
    if (config.lambda == 0.0 && change > config.tol) extrapolate(ds, labels, before, beta);
    eta = ds.predict(beta);
    if (objective_trace) {
      objective_trace->push_back(logistic_objective(ds, labels, beta, config.alpha, config.lambda));
    }
    if (!beta.allFinite()) throw Error(ErrorCode::Numerical, "logistic fit diverged");
    if (beta.cwiseAbs().maxCoeff() > config.divergence_bound) {
      if (config.lambda == 0.0) fit.separation = true;
      if (fit.separation) break;
    }
    if (change <= config.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.coefficients = std::move(beta);
  fit.objective = logistic_objective(ds, labels, fit.coefficients, config.alpha, config.lambda);
  fit.residual = logistic_kkt_residual(ds, labels, fit.coefficients, config.alpha, config.lambda);
  return fit;
}

}  // namespace apm

#include "apm/linmodel.hpp"

#include <algorithm>
#include <cmath>

#include "apm/error.hpp"

namespace apm {

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Ols: return "ols";
    case ModelKind::Ridge: return "ridge";
    case ModelKind::ElasticNet: return "enet";
    case ModelKind::Logistic: return "logit";
    case ModelKind::LogisticRidge: return "logit-ridge";
    case ModelKind::LogisticElasticNet: return "logit-enet";
    case ModelKind::BayesSimple: return "bayes";
    case ModelKind::BayesHierarchical: return "bayes-hier";
  }
  return "unknown";
}

namespace {

void check_penalty(double alpha, double lambda) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a non-negative number");
  }
}

void check_shape(const Dataset& ds) {
  if (ds.n_rows() == 0) throw Error(ErrorCode::EmptyModel, "fit needs at least one match");
  if (ds.n_players() == 0) throw Error(ErrorCode::EmptyModel, "fit needs at least one player");
}

double column_dot(const Dataset& ds, std::size_t j, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (const Entry& e : ds.column(j)) s += e.sign * v[static_cast<Eigen::Index>(e.index)];
  return s;
}

// One coordinate update; returns |change|. z is formed as (weight * x'r) / n,
// the same rounding as the lambda_max bounds, so full shrinkage is exact.
double update_coordinate(const Dataset& ds, std::size_t j, double weight, double n, double l1,
                         double l2, Eigen::VectorXd& beta, Eigen::VectorXd& residual) {
  const auto jj = static_cast<Eigen::Index>(j);
  const double norm2 = static_cast<double>(ds.appearances(j));
  const double old = beta[jj];
  const double denom = weight * norm2 / n + 2.0 * l2;
  double fresh = 0.0;
  if (denom > 0.0) {
    const double z = weight * (column_dot(ds, j, residual) + norm2 * old) / n;
    fresh = soft_threshold(z, l1) / denom;
  }
  const double delta = fresh - old;
  if (delta != 0.0) {
    beta[jj] = fresh;
    for (const Entry& e : ds.column(j)) residual[static_cast<Eigen::Index>(e.index)] -= e.sign * delta;
  }
  return std::abs(delta);
}

}  // namespace

CoordinateDescentResult coordinate_descent(const Dataset& ds, double weight, double alpha,
                                          double lambda, double tol, int max_sweeps,
                                          Eigen::VectorXd& beta, Eigen::VectorXd& residual) {
  const std::size_t p = ds.n_players();
  const double n = static_cast<double>(ds.n_rows());
  const double l1 = alpha * lambda;
  const double l2 = (1.0 - alpha) * lambda;

  CoordinateDescentResult out;
  std::vector<std::size_t> active;
  active.reserve(p);
  while (out.sweeps < max_sweeps) {
    double full_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      full_change = std::max(full_change, update_coordinate(ds, j, weight, n, l1, l2, beta, residual));
    }
    ++out.sweeps;
    out.max_change = full_change;
    if (full_change <= tol) {
      out.converged = true;
      return out;
    }

    active.clear();
    for (std::size_t j = 0; j < p; ++j) {
      if (beta[static_cast<Eigen::Index>(j)] != 0.0) active.push_back(j);
    }
    while (out.sweeps < max_sweeps) {
      double change = 0.0;
      for (const std::size_t j : active) {
        change = std::max(change, update_coordinate(ds, j, weight, n, l1, l2, beta, residual));
      }
      ++out.sweeps;
      if (change <= tol) break;
    }
  }
  return out;
}

double gaussian_lambda_max(const Dataset& ds, std::span<const double> y) {
  if (ds.n_rows() == 0) return 0.0;
  const Eigen::VectorXd xty = ds.transpose_times(y);
  return xty.cwiseAbs().maxCoeff() / static_cast<double>(ds.n_rows());
}

double enet_objective(const Dataset& ds, const Eigen::VectorXd& beta, double alpha, double lambda) {
  const Eigen::VectorXd r = ds.response() - ds.predict(beta);
  const double loss = ds.n_rows() ? r.squaredNorm() / (2.0 * static_cast<double>(ds.n_rows())) : 0.0;
  return loss + alpha * lambda * beta.lpNorm<1>() + (1.0 - alpha) * lambda * beta.squaredNorm();
}

double kkt_residual(const Dataset& ds, const Eigen::VectorXd& beta, double alpha, double lambda) {
  if (static_cast<std::size_t>(beta.size()) != ds.n_players()) {
    throw Error(ErrorCode::InvalidArgument, "kkt_residual: size mismatch");
  }
  if (ds.n_rows() == 0) return 0.0;
  const Eigen::VectorXd r = ds.response() - ds.predict(beta);
  const Eigen::VectorXd grad =
      ds.transpose_times(std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))) /
      static_cast<double>(ds.n_rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double v;
    if (beta[j] != 0.0) {
      const double sign = beta[j] > 0.0 ? 1.0 : -1.0;
      v = std::abs(grad[j] - alpha * lambda * sign - 2.0 * (1.0 - alpha) * lambda * beta[j]);
    } else {
      v = std::max(0.0, std::abs(grad[j]) - alpha * lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

FitResult fit_ols(const Dataset& ds, const LinearFitConfig& config) {
  check_shape(ds);
  const Eigen::MatrixXd x = ds.dense();
  const Eigen::VectorXd y = ds.response();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  FitResult fit;
  fit.kind = ModelKind::Ols;
  fit.players = ds.players();
  fit.coefficients = cod.solve(y);
  if (!fit.coefficients.allFinite()) throw Error(ErrorCode::Numerical, "least-squares solve failed");
  fit.iterations = 1;
  fit.objective = enet_objective(ds, fit.coefficients, 0.0, 0.0);
  fit.residual = kkt_residual(ds, fit.coefficients, 0.0, 0.0);
  fit.converged = fit.residual <= config.tol;
  return fit;
}

FitResult fit_enet(const Dataset& ds, const LinearFitConfig& config,
                   const Eigen::VectorXd& warm_start) {
  check_shape(ds);
  const double alpha = config.effective_alpha();
  check_penalty(alpha, config.lambda);
  if (!(config.tol > 0.0) || config.max_iter < 1) {
    throw Error(ErrorCode::InvalidArgument, "tol and max_iter must be positive");
  }
  const auto p = static_cast<Eigen::Index>(ds.n_players());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (warm_start.size() != 0) {
    if (warm_start.size() != p) throw Error(ErrorCode::InvalidArgument, "warm start size mismatch");
    beta = warm_start;
  }
  Eigen::VectorXd residual = ds.response() - ds.predict(beta);
  const auto cd = coordinate_descent(ds, 1.0, alpha, config.lambda, config.tol, config.max_iter,
                                     beta, residual);

  FitResult fit;
  fit.kind = config.kind == ModelKind::Ridge ? ModelKind::Ridge : ModelKind::ElasticNet;
  fit.alpha = alpha;
  fit.lambda = config.lambda;
  fit.players = ds.players();
  fit.coefficients = std::move(beta);
  fit.iterations = cd.sweeps;
  fit.converged = cd.converged;
  fit.objective = enet_objective(ds, fit.coefficients, alpha, config.lambda);
  fit.residual = kkt_residual(ds, fit.coefficients, alpha, config.lambda);
  if (!fit.coefficients.allFinite()) throw Error(ErrorCode::Numerical, "coordinate descent diverged");
  return fit;
}

FitResult fit_linear(const Dataset& ds, const LinearFitConfig& config) {
  switch (config.kind) {
    case ModelKind::Ols: return fit_ols(ds, config);
    case ModelKind::Ridge:
    case ModelKind::ElasticNet: return fit_enet(ds, config);
    default: throw Error(ErrorCode::InvalidArgument, "not a linear model kind");
  }
}

}  // namespace apm

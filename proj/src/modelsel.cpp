#include "apm/modelsel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "apm/error.hpp"
#include "apm/linmodel.hpp"
#include "apm/logmodel.hpp"
#include "apm/rng.hpp"
#include "csv.hpp"

namespace apm {

std::vector<double> alpha_grid(int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "alpha grid needs at least one point");
  if (count == 1) return {1.0};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = static_cast<double>(k) / (count - 1);
  return out;
}

CvGrid default_grid(std::uint64_t seed) {
  CvGrid grid;
  grid.alphas = alpha_grid();
  grid.seed = seed;
  return grid;
}

std::vector<double> lambda_path(const Dataset& ds, std::span<const double> response, double alpha,
                                Family family, int count) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "lambda path needs at least one point");
  const double bound = family == Family::Gaussian ? gaussian_lambda_max(ds, response)
                                                  : binomial_lambda_max(ds, response);
  // A flat response gives no scale; fall back to a unit path.
  const double scale = bound > 0.0 ? bound : 1.0;
  const double a = std::max(alpha, kAlphaFloor);
  double lambda_max = scale / a;
  // The solvers threshold at alpha * lambda; keep that product from rounding below the bound.
  while (alpha >= kAlphaFloor && alpha * lambda_max < scale) {
    lambda_max = std::nextafter(lambda_max, std::numeric_limits<double>::infinity());
  }
  const double ratio = ds.n_rows() > ds.n_players() ? 1e-4 : 1e-2;
  std::vector<double> path(static_cast<std::size_t>(count));
  path[0] = lambda_max;
  for (int k = 1; k < count; ++k) {
    path[static_cast<std::size_t>(k)] =
        lambda_max * std::pow(ratio, static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return path;
}

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least two folds");
  if (n < static_cast<std::size_t>(folds)) {
    throw Error(ErrorCode::EmptyPartition, "fewer rows than folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, "cv.folds");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(n);
  for (std::size_t k = 0; k < n; ++k) fold[order[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return fold;
}

namespace {

struct FoldData {
  Dataset train;
  Dataset test;
  std::vector<double> train_response;
  std::vector<double> test_response;
};

double clamp_prob(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double held_out_error(const FoldData& f, const Eigen::VectorXd& beta, Family family) {
  const Eigen::VectorXd pred = f.test.predict(beta);
  double total = 0.0;
  for (std::size_t i = 0; i < f.test.n_rows(); ++i) {
    const double eta = pred[static_cast<Eigen::Index>(i)];
    const double y = f.test_response[i];
    if (family == Family::Gaussian) {
      total += (y - eta) * (y - eta);
    } else {
      const double p = clamp_prob(predict_prob(eta));
      total += -2.0 * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
  }
  return total / static_cast<double>(f.test.n_rows());
}

void evaluate_alpha(const Dataset& ds, std::span<const double> response, Family family,
                    const CvGrid& grid, const CvOptions& options,
                    const std::vector<FoldData>& folds, double alpha, std::vector<CvPoint>& out) {
  const auto path = lambda_path(ds, response, alpha, family, grid.n_lambdas);
  const std::size_t k_folds = folds.size();
  std::vector<std::vector<double>> errors(path.size(), std::vector<double>(k_folds));
  for (std::size_t f = 0; f < k_folds; ++f) {
    const auto& fold = folds[f];
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.n_players()));
    for (std::size_t l = 0; l < path.size(); ++l) {
      if (family == Family::Gaussian) {
        LinearFitConfig cfg{ModelKind::ElasticNet, alpha, path[l], options.tol, options.max_iter};
        beta = fit_enet(fold.train, cfg, beta).coefficients;
      } else {
        LogisticFitConfig cfg;
        cfg.alpha = alpha;
        cfg.lambda = path[l];
        cfg.tol = options.tol;
        cfg.max_iter = options.max_iter;
        beta = fit_logistic(fold.train, fold.train_response, cfg, beta).coefficients;
      }
      errors[l][f] = held_out_error(fold, beta, family);
    }
  }
  out.resize(path.size());
  for (std::size_t l = 0; l < path.size(); ++l) {
    const auto& e = errors[l];
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(k_folds);
    double ss = 0.0;
    for (const double v : e) ss += (v - mean) * (v - mean);
    out[l] = CvPoint{alpha, path[l], mean, std::sqrt(ss / static_cast<double>(k_folds - 1))};
  }
}

}  // namespace

CvResult cross_validate(const Dataset& ds, std::span<const double> response, Family family,
                        const CvGrid& grid, const CvOptions& options) {
  const auto folds = assign_folds(ds.n_rows(), grid.folds, grid.seed);
  return cross_validate(ds, response, family, grid, folds, options);
}

CvResult cross_validate(const Dataset& ds, std::span<const double> response, Family family,
                        const CvGrid& grid, std::span<const int> fold_of, const CvOptions& options) {
  if (response.size() != ds.n_rows() || fold_of.size() != ds.n_rows()) {
    throw Error(ErrorCode::InvalidArgument, "cross_validate: size mismatch");
  }
  if (grid.alphas.empty()) throw Error(ErrorCode::InvalidArgument, "empty alpha grid");
  if (grid.folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least two folds");
  if (ds.n_rows() < static_cast<std::size_t>(grid.folds)) {
    throw Error(ErrorCode::EmptyPartition, "fewer rows than folds");
  }

  CvResult result;
  result.family = family;

  const auto k_folds = static_cast<std::size_t>(grid.folds);
  std::vector<std::vector<std::size_t>> train_rows(k_folds), test_rows(k_folds);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const int f = fold_of[i];
    if (f < 0 || f >= grid.folds) throw Error(ErrorCode::InvalidArgument, "fold index out of range");
    for (std::size_t g = 0; g < k_folds; ++g) {
      (g == static_cast<std::size_t>(f) ? test_rows[g] : train_rows[g]).push_back(i);
    }
  }
  std::vector<FoldData> folds;
  folds.reserve(k_folds);
  for (std::size_t g = 0; g < k_folds; ++g) {
    if (test_rows[g].empty() || train_rows[g].empty()) {
      throw Error(ErrorCode::EmptyPartition, "fold " + std::to_string(g) + " has no rows");
    }
    FoldData f{ds.select_rows(train_rows[g]), ds.select_rows(test_rows[g]), {}, {}};
    for (const auto i : train_rows[g]) f.train_response.push_back(response[i]);
    for (const auto i : test_rows[g]) f.test_response.push_back(response[i]);
    if (family == Family::Binomial) {
      auto single_class = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
      };
      if (single_class(f.train_response) || single_class(f.test_response)) {
        result.warnings.push_back("fold " + std::to_string(g) +
                                  " holds a single class; deviance uses clamped probabilities");
      }
    }
    folds.push_back(std::move(f));
  }

  const std::size_t n_alpha = grid.alphas.size();
  std::vector<std::vector<CvPoint>> per_alpha(n_alpha);
  std::vector<std::exception_ptr> errors(n_alpha);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t a = next++; a < n_alpha; a = next++) {
      try {
        evaluate_alpha(ds, response, family, grid, options, folds, grid.alphas[a], per_alpha[a]);
      } catch (...) {
        errors[a] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_alpha));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const auto& points : per_alpha) result.surface.insert(result.surface.end(), points.begin(), points.end());
  for (std::size_t k = 1; k < result.surface.size(); ++k) {
    const auto& c = result.surface[k];
    const auto& b = result.surface[result.best_index];
    const bool better = c.mean_error < b.mean_error ||
                        (c.mean_error == b.mean_error &&
                         (c.lambda > b.lambda || (c.lambda == b.lambda && c.alpha < b.alpha)));
    if (better) result.best_index = k;
  }
  result.best_alpha = result.best().alpha;
  result.best_lambda = result.best().lambda;
  return result;
}

void write_cv_surface(const CvResult& result, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "alpha,lambda,mean_error,sd_error\n";
  for (const auto& pt : result.surface) {
    out << csv::format(pt.alpha) << ',' << csv::format(pt.lambda) << ',' << csv::format(pt.mean_error)
        << ',' << csv::format(pt.sd_error) << '\n';
  }
  csv::close_out(out, file);
}

}  // namespace apm

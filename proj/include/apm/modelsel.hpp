#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "apm/data.hpp"

namespace apm {

enum class Family { Gaussian, Binomial };

inline constexpr int kDefaultGridSize = 100;
inline constexpr double kAlphaFloor = 0.001;

struct CvGrid {
  std::vector<double> alphas;
  int n_lambdas = kDefaultGridSize;
  int folds = 10;
  std::uint64_t seed = 0;
};

// `count` equally spaced values on [0, 1].
std::vector<double> alpha_grid(int count = kDefaultGridSize);
CvGrid default_grid(std::uint64_t seed);

// Geometric sequence from lambda_max(alpha) down to lambda_max * ratio, where
// ratio = 1e-4 when n > p and 1e-2 otherwise. alpha below 0.001 uses 0.001.
std::vector<double> lambda_path(const Dataset& ds, std::span<const double> response, double alpha,
                                Family family, int count = kDefaultGridSize);

// fold[i] in [0, folds); a shuffled round-robin so fold sizes differ by <= 1.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

struct CvPoint {
  double alpha = 0.0;
  double lambda = 0.0;
  double mean_error = 0.0;
  double sd_error = 0.0;
};

struct CvResult {
  Family family = Family::Gaussian;
  std::vector<CvPoint> surface;  // alpha-major, lambdas decreasing within alpha
  std::size_t best_index = 0;
  double best_alpha = 0.0;
  double best_lambda = 0.0;
  std::vector<std::string> warnings;

  const CvPoint& best() const { return surface.at(best_index); }
  const char* metric() const noexcept { return family == Family::Gaussian ? "mse" : "deviance"; }
};

struct CvOptions {
  double tol = 1e-6;
  int max_iter = 100000;
  int threads = 0;  // 0 = hardware concurrency
};

// K-fold CV over every (alpha, lambda) pair. Gaussian scores by mean squared
// error, binomial (response = 0/1 labels, draws removed) by mean deviance.
// The best pair minimizes mean error; ties go to larger lambda, then smaller alpha.
CvResult cross_validate(const Dataset& ds, std::span<const double> response, Family family,
                        const CvGrid& grid, const CvOptions& options = {});
CvResult cross_validate(const Dataset& ds, std::span<const double> response, Family family,
                        const CvGrid& grid, std::span<const int> folds,
                        const CvOptions& options = {});

// `alpha,lambda,mean_error,sd_error`
void write_cv_surface(const CvResult& result, const std::filesystem::path& file);

}  // namespace apm

#include <doctest.h>

#include <random>

#include "apm/error.hpp"
#include "apm/linmodel.hpp"
#include "support.hpp"

using namespace apm;
using test::from_dense;

namespace {

Dataset column_toy() {
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  return from_dense(x, Eigen::Vector2d(4, -4));
}

FitResult enet(const Dataset& ds, double alpha, double lambda, double tol = 1e-10) {
  LinearFitConfig cfg;
  cfg.kind = ModelKind::ElasticNet;
  cfg.alpha = alpha;
  cfg.lambda = lambda;
  cfg.tol = tol;
  return fit_enet(ds, cfg);
}

// Rejection-samples a full-column-rank ternary design.
Eigen::MatrixXd full_rank_ternary(int n, int p, std::mt19937_64& rng) {
  for (;;) {
    Eigen::MatrixXd x = test::random_ternary(n, p, rng);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(x).rank() == p) return x;
  }
}

}  // namespace

TEST_CASE("ols examples") {
  CHECK(fit_ols(column_toy()).coefficients[0] == doctest::Approx(4.0).epsilon(1e-14));

  Eigen::MatrixXd row(1, 2);
  row << 1, -1;
  const auto line = fit_ols(from_dense(row, Eigen::VectorXd::Constant(1, 2.0)));
  CHECK(line.coefficients[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(line.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = test::random_ternary(8, 4, rng);
  const auto zero = fit_ols(from_dense(x, Eigen::VectorXd::Zero(8)));
  CHECK(zero.coefficients.isZero());
  CHECK(zero.converged);
  CHECK(zero.kind == ModelKind::Ols);
}

TEST_CASE("enet examples on the two-row column") {
  const auto ds = column_toy();
  const auto ridge = enet(ds, 0.0, 1.0);
  CHECK(ridge.coefficients[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(ridge.converged);

  const auto lasso = enet(ds, 1.0, 1.0);
  CHECK(lasso.coefficients[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(kkt_residual(ds, Eigen::VectorXd::Constant(1, 3.0), 1.0, 1.0) == 0.0);

  const double lmax = gaussian_lambda_max(ds, ds.y());
  CHECK(lmax == 4.0);
  CHECK(enet(ds, 1.0, lmax).coefficients[0] == 0.0);
  CHECK(enet(ds, 1.0, 10 * lmax).coefficients[0] == 0.0);
  CHECK(kkt_residual(ds, Eigen::VectorXd::Zero(1), 1.0, lmax) == 0.0);
}

TEST_CASE("ridge kind forces alpha to zero") {
  LinearFitConfig cfg;
  cfg.kind = ModelKind::Ridge;
  cfg.alpha = 1.0;
  cfg.lambda = 1.0;
  cfg.tol = 1e-12;
  const auto fit = fit_linear(column_toy(), cfg);
  CHECK(fit.kind == ModelKind::Ridge);
  CHECK(fit.alpha == 0.0);
  CHECK(fit.coefficients[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("kkt residual is zero at the ols solution") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = full_rank_ternary(20, 5, rng);
  const Eigen::VectorXd y = test::random_normal(20, rng, 3.0);
  const auto ds = from_dense(x, y);
  const auto ols = fit_ols(ds);
  CHECK(kkt_residual(ds, ols.coefficients, 0.5, 0.0) < 1e-12);
}

TEST_CASE("invalid configurations") {
  const auto ds = column_toy();
  LinearFitConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(fit_enet(ds, cfg), Error);
  cfg.alpha = 0.5;
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(fit_enet(ds, cfg), Error);
  cfg.lambda = 0.1;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(fit_enet(ds, cfg), Error);
  CHECK_THROWS_AS(kkt_residual(ds, Eigen::VectorXd::Zero(3), 0.5, 0.1), Error);
}

TEST_CASE("max_iter exhaustion returns an unconverged fit") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = test::random_ternary(30, 10, rng);
  const auto ds = from_dense(x, test::random_normal(30, rng, 4.0));
  LinearFitConfig cfg;
  cfg.alpha = 0.5;
  cfg.lambda = 1e-4;
  cfg.tol = 1e-14;
  cfg.max_iter = 2;
  const auto fit = fit_enet(ds, cfg);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 2);
  CHECK(fit.coefficients.allFinite());
}

TEST_CASE("property: lambda = 0 attains the ols objective") {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 8;
    const int n = p + 5 + trial % 10;
    const Eigen::MatrixXd x = full_rank_ternary(n, p, rng);
    const Eigen::VectorXd y = test::random_normal(n, rng, 3.0);
    const auto ds = from_dense(x, y);
    const double alpha = (trial % 3) / 2.0;
    const auto fit = enet(ds, alpha, 0.0, 1e-11);
    const auto ols = fit_ols(ds);
    REQUIRE(fit.objective == doctest::Approx(ols.objective).epsilon(1e-7));
  }
}

TEST_CASE("property: ridge norm shrinks as lambda grows") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + trial % 30, p = 1 + trial % 15;
    const Eigen::MatrixXd x = test::random_ternary(n, p, rng);
    const auto ds = from_dense(x, test::random_normal(n, rng, 3.0));
    double previous = INFINITY;
    for (double lambda : {0.001, 0.01, 0.05, 0.2, 1.0, 5.0}) {
      const double norm = enet(ds, 0.0, lambda, 1e-12).coefficients.norm();
      REQUIRE(norm <= previous + 1e-9);
      previous = norm;
    }
  }
}

TEST_CASE("property: ridge matches the closed form") {
  std::mt19937_64 rng(203);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 40, p = 1 + trial % 12;
    const Eigen::MatrixXd x = test::random_ternary(n, p, rng);
    const Eigen::VectorXd y = test::random_normal(n, rng, 5.0);
    const double lambda = std::array{0.01, 0.1, 1.0}[trial % 3];
    const auto fit = enet(from_dense(x, y), 0.0, lambda, 1e-13);
    REQUIRE((fit.coefficients - test::ridge_closed_form(x, y, lambda)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("property: sign symmetry") {
  std::mt19937_64 rng(204);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 10 + trial % 20, p = 1 + trial % 8;
    const Eigen::MatrixXd x = test::random_ternary(n, p, rng);
    const Eigen::VectorXd y = test::random_normal(n, rng, 3.0);
    const double alpha = (trial % 5) / 4.0;
    const double lambda = 0.05 + 0.1 * (trial % 4);
    const auto a = enet(from_dense(x, y), alpha, lambda, 1e-12);
    // Relabeling every side negates X and y together: ratings are unchanged.
    const auto sides = enet(from_dense(-x, -y), alpha, lambda, 1e-12);
    REQUIRE((a.coefficients - sides.coefficients).cwiseAbs().maxCoeff() < 1e-9);
    // Negating only one of them negates the ratings.
    const auto resp = enet(from_dense(x, -y), alpha, lambda, 1e-12);
    REQUIRE((a.coefficients + resp.coefficients).cwiseAbs().maxCoeff() < 1e-9);
    const auto design = enet(from_dense(-x, y), alpha, lambda, 1e-12);
    REQUIRE((a.coefficients + design.coefficients).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("property: converged fits certify their kkt residual") {
  std::mt19937_64 rng(205);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + trial % 40, p = 1 + trial % 20;
    const Eigen::MatrixXd x = test::random_ternary(n, p, rng);
    const auto ds = from_dense(x, test::random_normal(n, rng, 3.0));
    const double alpha = std::array{0.25, 0.5, 1.0}[trial % 3];
    const double lambda = gaussian_lambda_max(ds, ds.y()) * std::pow(10.0, -(trial % 4));
    const double tol = 1e-7;
    const auto fit = enet(ds, alpha, lambda, tol);
    REQUIRE(fit.converged);
    REQUIRE(fit.residual <= 10 * tol);
  }
}

TEST_CASE("property: grid search never beats the fit on tiny instances") {
  std::mt19937_64 rng(206);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 2;
    const int n = 3 + trial % 6;
    const Eigen::MatrixXd x = test::random_ternary(n, p, rng);
    const Eigen::VectorXd y = test::random_normal(n, rng, 2.0);
    const double alpha = std::array{0.0, 0.25, 0.5, 1.0}[trial % 4];
    const double lambda = 0.05 + 0.2 * (trial % 3);
    const auto fit = enet(from_dense(x, y), alpha, lambda, 1e-10);
    REQUIRE(fit.coefficients.cwiseAbs().maxCoeff() < 10.0);
    REQUIRE(test::grid_search_min(x, y, alpha, lambda) >= fit.objective - 1e-5);
  }
}

TEST_CASE("warm start reaches the same solution") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = test::random_ternary(40, 10, rng);
  const auto ds = from_dense(x, test::random_normal(40, rng, 3.0));
  const auto cold = enet(ds, 0.7, 0.05, 1e-12);
  LinearFitConfig cfg;
  cfg.alpha = 0.7;
  cfg.lambda = 0.05;
  cfg.tol = 1e-12;
  const auto warm = fit_enet(ds, cfg, Eigen::VectorXd::Constant(10, 2.0));
  CHECK((cold.coefficients - warm.coefficients).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(fit_enet(ds, cfg, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("ols is minimum norm on duplicated columns") {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXd base = full_rank_ternary(25, 4, rng);
  Eigen::MatrixXd x(25, 5);
  x << base, base.col(1);
  const Eigen::VectorXd y = test::random_normal(25, rng, 2.0);
  const auto fit = fit_ols(from_dense(x, y));
  CHECK(fit.coefficients[1] == doctest::Approx(fit.coefficients[4]).epsilon(1e-10));
  const Eigen::VectorXd reduced = base.colPivHouseholderQr().solve(y);
  CHECK(fit.coefficients[1] + fit.coefficients[4] == doctest::Approx(reduced[1]).epsilon(1e-10));
}

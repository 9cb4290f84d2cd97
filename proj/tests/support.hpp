#pragma once

// Shared fixtures and independent reference computations for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "apm/data.hpp"

namespace apm::test {

inline Dataset from_dense(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::vector<PlayerId> players;
  for (Eigen::Index j = 0; j < x.cols(); ++j) players.push_back({"c" + std::to_string(j)});
  std::vector<std::int64_t> ids;
  std::vector<double> yy;
  std::vector<std::vector<Entry>> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    ids.push_back(i + 1);
    yy.push_back(y[i]);
    std::vector<Entry> row;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(i, j) != 0.0) row.push_back({static_cast<std::size_t>(j), x(i, j) > 0 ? 1 : -1});
    }
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(players), std::move(ids), std::move(yy), rows);
}

// Entries uniform on {-1, 0, +1}; every column gets at least one nonzero.
inline Eigen::MatrixXd random_ternary(int n, int p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(-1, 1);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = pick(rng);
  std::uniform_int_distribution<int> row(0, n - 1);
  for (int j = 0; j < p; ++j) {
    if (x.col(j).cwiseAbs().sum() == 0.0) x(row(rng), j) = 1.0;
  }
  return x;
}

inline Eigen::VectorXd random_normal(int n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline std::vector<PlayerId> names(int count, const std::string& prefix = "pl") {
  std::vector<PlayerId> out;
  for (int k = 0; k < count; ++k) out.push_back({prefix + std::to_string(k)});
  return out;
}

// Random legal 5v5 records over `n_players` players with scores in [0, 22].
inline std::vector<MatchRecord> random_records(int n_players, int n_matches, std::mt19937_64& rng) {
  const auto pool = names(n_players);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::uniform_int_distribution<int> score(0, 22);
  std::vector<MatchRecord> out;
  for (int m = 0; m < n_matches; ++m) {
    std::shuffle(order.begin(), order.end(), rng);
    MatchRecord r;
    r.map_id = 1000 + m;
    for (std::size_t k = 0; k < kTeamSize; ++k) {
      r.team1[k] = pool[order[k]];
      r.team2[k] = pool[order[k + kTeamSize]];
    }
    r.score1 = score(rng);
    r.score2 = score(rng);
    out.push_back(r);
  }
  return out;
}

// The three example maps with Player-1 and Player-518 on opposite sides.
inline std::vector<MatchRecord> table_one_records() {
  auto roster = [](const std::string& lead, const std::string& tag) {
    Roster r;
    r[0] = {lead};
    for (std::size_t k = 1; k < kTeamSize; ++k) r[k] = {tag + std::to_string(k)};
    return r;
  };
  const Roster a = roster("Player-1", "A");
  const Roster b = roster("Player-518", "B");
  return {
      MatchRecord{76059, a, b, 16, 12},
      MatchRecord{76060, b, a, 11, 16},
      MatchRecord{76061, a, b, 16, 9},
  };
}

// Minimizer of (1/2n)||y - Xb||^2 + lambda||b||^2.
inline Eigen::VectorXd ridge_closed_form(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         double lambda) {
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd a =
      x.transpose() * x + 2.0 * n * lambda * Eigen::MatrixXd::Identity(x.cols(), x.cols());
  return a.ldlt().solve(x.transpose() * y);
}

inline double enet_objective_dense(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& b, double alpha, double lambda) {
  const double n = static_cast<double>(x.rows());
  return (y - x * b).squaredNorm() / (2.0 * n) + alpha * lambda * b.lpNorm<1>() +
         (1.0 - alpha) * lambda * b.squaredNorm();
}

// Exhaustive search over [-10, 10]^p (p <= 2) at the given step.
inline double grid_search_min(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                              double lambda, double step = 1e-3) {
  const int steps = static_cast<int>(std::lround(20.0 / step));
  double best = INFINITY;
  Eigen::VectorXd b(x.cols());
  if (x.cols() == 1) {
    for (int a = 0; a <= steps; ++a) {
      b[0] = -10.0 + a * step;
      best = std::min(best, enet_objective_dense(x, y, b, alpha, lambda));
    }
    return best;
  }
  // For fixed b0 the objective is convex in b1, so its minimum over the b1
  // grid sits at a grid neighbour of the continuous minimizer (or an end).
  const double n = static_cast<double>(x.rows());
  const Eigen::Matrix2d g = x.transpose() * x / n;
  const Eigen::Vector2d c = x.transpose() * y / n;
  const double yy = y.squaredNorm() / n;
  auto objective = [&](double b0, double b1) {
    const double quad = g(0, 0) * b0 * b0 + 2 * g(0, 1) * b0 * b1 + g(1, 1) * b1 * b1;
    const double loss = 0.5 * (yy - 2 * (c[0] * b0 + c[1] * b1) + quad);
    return loss + alpha * lambda * (std::abs(b0) + std::abs(b1)) +
           (1.0 - alpha) * lambda * (b0 * b0 + b1 * b1);
  };
  auto on_grid = [&](int k) { return -10.0 + std::clamp(k, 0, steps) * step; };
  for (int a = 0; a <= steps; ++a) {
    const double b0 = on_grid(a);
    const double denom = g(1, 1) + 2.0 * (1.0 - alpha) * lambda;
    std::vector<int> candidates{0, steps, steps / 2};
    if (denom > 0.0) {
      const double z = c[1] - g(0, 1) * b0;
      const double gamma = alpha * lambda;
      const double star = (z > gamma ? z - gamma : z < -gamma ? z + gamma : 0.0) / denom;
      const int k = static_cast<int>(std::floor((std::clamp(star, -10.0, 10.0) + 10.0) / step));
      candidates.insert(candidates.end(), {k - 1, k, k + 1, k + 2});
    }
    for (int k : candidates) best = std::min(best, objective(b0, on_grid(k)));
  }
  return best;
}

// Two-sided Student-t tail by composite Gauss-Legendre integration of the
// density on [0, |t|]; independent of any incomplete-beta routine.
inline double t_two_sided_quadrature(double t, double df) {
  const double lognorm = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  auto density = [&](double x) { return std::exp(lognorm - (df + 1) / 2 * std::log1p(x * x / df)); };
  static const double nodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                  -0.9061798459386640, 0.9061798459386640};
  static const double weights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
  const double a = std::abs(t);
  const int panels = 20000;
  const double h = a / panels;
  double integral = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * h;
    for (int q = 0; q < 5; ++q) integral += weights[q] * density(mid + 0.5 * h * nodes[q]);
  }
  integral *= 0.5 * h;
  return 1.0 - 2.0 * integral;
}

// Average ranks with ties sharing the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

inline double pearson_plain(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_plain(average_ranks(x), average_ranks(y));
}

// Column j of every chain, concatenated.
inline std::vector<double> pooled(const std::vector<Eigen::MatrixXd>& chains, Eigen::Index j) {
  std::vector<double> out;
  for (const auto& c : chains)
    for (Eigen::Index i = 0; i < c.rows(); ++i) out.push_back(c(i, j));
  return out;
}

struct Moments {
  double mean, var, mean_se, var_se;
};

// Sample moments with batch-means standard errors, computed per chain so
// batches never straddle two chains.
inline Moments moments(const std::vector<Eigen::MatrixXd>& chains, Eigen::Index j, int batches_per_chain = 20) {
  const auto all = pooled(chains, j);
  const double n = static_cast<double>(all.size());
  double mean = 0;
  for (double v : all) mean += v;
  mean /= n;
  double var = 0;
  for (double v : all) var += (v - mean) * (v - mean);
  var /= n - 1;
  std::vector<double> bm, bv;
  for (const auto& c : chains) {
    const Eigen::Index len = c.rows() / batches_per_chain;
    for (int b = 0; b < batches_per_chain; ++b) {
      double m = 0, s = 0;
      for (Eigen::Index i = b * len; i < (b + 1) * len; ++i) m += c(i, j);
      m /= static_cast<double>(len);
      for (Eigen::Index i = b * len; i < (b + 1) * len; ++i) s += (c(i, j) - mean) * (c(i, j) - mean);
      bm.push_back(m);
      bv.push_back(s / static_cast<double>(len));
    }
  }
  auto se = [](const std::vector<double>& v) {
    const double k = static_cast<double>(v.size());
    double m = 0, s = 0;
    for (double x : v) m += x;
    m /= k;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (k - 1) / k);
  };
  return {mean, var, se(bm), se(bv)};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("apm_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream(file, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace apm::test

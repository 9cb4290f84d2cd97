#include "apm/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "apm/error.hpp"
#include "apm/rng.hpp"
#include "csv.hpp"

namespace apm {

namespace {

Eigen::VectorXd aligned_prior_mean(const Dataset& ds, const RatingPrior& prior) {
  if (prior.players.size() != prior.s_rating2.size()) {
    throw Error(ErrorCode::InvalidArgument, "rating prior: size mismatch");
  }
  std::unordered_map<PlayerId, double, PlayerIdHash> by_player;
  for (std::size_t k = 0; k < prior.players.size(); ++k) {
    by_player.emplace(prior.players[k], prior.s_rating2[k]);
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(ds.n_players()));
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    const auto it = by_player.find(ds.players()[j]);
    if (it == by_player.end()) {
      throw Error(ErrorCode::MissingPrior, "no prior mean for player " + ds.players()[j].token);
    }
    r[static_cast<Eigen::Index>(j)] = it->second;
  }
  return r;
}

void check_config(const BayesConfig& c) {
  if (!(c.sigma2 > 0.0) || !(c.tau2 > 0.0) || !std::isfinite(c.sigma2) || !std::isfinite(c.tau2)) {
    throw Error(ErrorCode::InvalidArgument, "sigma2 and tau2 must be positive");
  }
  if (c.n_chains < 1 || c.n_samples < 1 || c.n_warmup < 0) {
    throw Error(ErrorCode::InvalidArgument, "chains and samples must be positive");
  }
}

Eigen::LLT<Eigen::MatrixXd> factor_precision(const Dataset& ds, double sigma2, double tau2) {
  Eigen::MatrixXd q = ds.gram() / sigma2;
  q.diagonal().array() += 1.0 / tau2;
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "posterior precision is not positive definite");
  }
  return llt;
}

Eigen::VectorXd draw_normal(Rng& rng, Eigen::Index size) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(size);
  for (Eigen::Index k = 0; k < size; ++k) z[k] = normal(rng);
  return z;
}

template <typename ChainFn>
void run_chains(int n_chains, ChainFn&& fn) {
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));
  workers.reserve(static_cast<std::size_t>(n_chains));
  for (int k = 0; k < n_chains; ++k) {
    workers.emplace_back([&, k] {
      try {
        fn(k);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  // linear interpolation between order statistics (type 7)
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  halves.reserve(2 * chains.size());
  for (const auto& c : chains) {
    const Eigen::Index h = c.size() / 2;
    halves.emplace_back(c.head(h));
    halves.emplace_back(c.tail(h));
  }
  return halves;
}

void check_chains(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2) throw Error(ErrorCode::NeedTwoChains, "diagnostics need two or more chains");
  const Eigen::Index n = chains.front().size();
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "diagnostics need four or more draws per chain");
  for (const auto& c : chains) {
    if (c.size() != n) throw Error(ErrorCode::InvalidArgument, "chains differ in length");
  }
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::MatrixXd> conjugate_posterior(const Dataset& ds,
                                                                const Eigen::VectorXd& prior_mean,
                                                                double sigma2, double tau2) {
  const auto llt = factor_precision(ds, sigma2, tau2);
  const Eigen::VectorXd b =
      ds.transpose_times(ds.y()) / sigma2 + prior_mean / tau2;
  const auto p = static_cast<Eigen::Index>(ds.n_players());
  return {llt.solve(b), llt.solve(Eigen::MatrixXd::Identity(p, p))};
}

PosteriorSummary fit_bayes_simple(const Dataset& ds, const RatingPrior& prior, BayesConfig config) {
  config.model = BayesModel::Simple;
  return fit_bayes(ds, prior, config);
}

PosteriorSummary fit_bayes_hierarchical(const Dataset& ds, const RatingPrior& prior,
                                        BayesConfig config) {
  config.model = BayesModel::Hierarchical;
  return fit_bayes(ds, prior, config);
}

PosteriorSummary fit_bayes(const Dataset& ds, const RatingPrior& prior, const BayesConfig& config) {
  check_config(config);
  if (ds.n_players() == 0) throw Error(ErrorCode::EmptyModel, "no players to rate");
  const Eigen::VectorXd r = aligned_prior_mean(ds, prior);
  const auto p = static_cast<Eigen::Index>(ds.n_players());
  const auto llt = factor_precision(ds, config.sigma2, config.tau2);
  const Eigen::VectorXd data_term = ds.transpose_times(ds.y()) / config.sigma2;
  const bool hierarchical = config.model == BayesModel::Hierarchical;

  PosteriorSummary out;
  out.model = config.model;
  out.players = ds.players();
  const auto chains = static_cast<std::size_t>(config.n_chains);
  out.beta_chains.assign(chains, Eigen::MatrixXd(config.n_samples, p));
  if (hierarchical) out.eta_chains.assign(chains, Eigen::MatrixXd(config.n_samples, p));

  // eta_j | beta_j has precision 1 + r_j^2 / tau2
  const Eigen::ArrayXd eta_precision = 1.0 + r.array().square() / config.tau2;
  const Eigen::ArrayXd eta_sd = eta_precision.rsqrt();
  const Eigen::VectorXd simple_mean = llt.solve(data_term + r / config.tau2);

  run_chains(config.n_chains, [&](int k) {
    auto rng = make_rng(config.seed, "bayes.chain." + std::to_string(k));
    std::normal_distribution<double> normal;
    auto& beta_draws = out.beta_chains[static_cast<std::size_t>(k)];
    Eigen::VectorXd eta(p);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (hierarchical) {
      for (Eigen::Index j = 0; j < p; ++j) eta[j] = config.init_eta_sd * normal(rng);
    }
    const int total = config.n_warmup + config.n_samples;
    for (int it = 0; it < total; ++it) {
      const Eigen::VectorXd noise = llt.matrixU().solve(draw_normal(rng, p));
      if (hierarchical) {
        beta = llt.solve(data_term + (eta.array() * r.array()).matrix() / config.tau2) + noise;
        for (Eigen::Index j = 0; j < p; ++j) {
          const double mean = r[j] * beta[j] / config.tau2 / eta_precision[j];
          eta[j] = mean + eta_sd[j] * normal(rng);
        }
      } else {
        beta = simple_mean + noise;
      }
      const int s = it - config.n_warmup;
      if (s >= 0) {
        beta_draws.row(s) = beta.transpose();
        if (hierarchical) out.eta_chains[static_cast<std::size_t>(k)].row(s) = eta.transpose();
      }
    }
  });

  out.beta = summarize_draws(out.beta_chains);
  if (hierarchical) out.eta = summarize_draws(out.eta_chains);
  if (config.n_chains >= 2 && config.n_samples >= 4) {
    out.beta_diagnostics = diagnostics(out.beta_chains);
    if (hierarchical) out.eta_diagnostics = diagnostics(out.eta_chains);
  }
  if (!out.beta.mean.allFinite()) throw Error(ErrorCode::Numerical, "non-finite posterior mean");
  return out;
}

MarginalSummary summarize_draws(const std::vector<Eigen::MatrixXd>& chains) {
  MarginalSummary s;
  if (chains.empty()) return s;
  const Eigen::Index p = chains.front().cols();
  Eigen::Index total = 0;
  for (const auto& c : chains) total += c.rows();
  s.mean.resize(p);
  s.sd.resize(p);
  s.q05.resize(p);
  s.q50.resize(p);
  s.q95.resize(p);
  std::vector<double> column(static_cast<std::size_t>(total));
  for (Eigen::Index j = 0; j < p; ++j) {
    std::size_t k = 0;
    for (const auto& c : chains) {
      for (Eigen::Index i = 0; i < c.rows(); ++i) column[k++] = c(i, j);
    }
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(total);
    double ss = 0.0;
    for (const double v : column) ss += (v - mean) * (v - mean);
    s.mean[j] = mean;
    s.sd[j] = total > 1 ? std::sqrt(ss / static_cast<double>(total - 1)) : 0.0;
    std::sort(column.begin(), column.end());
    s.q05[j] = quantile_sorted(column, 0.05);
    s.q50[j] = quantile_sorted(column, 0.50);
    s.q95[j] = quantile_sorted(column, 0.95);
  }
  return s;
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  check_chains(chains);
  const auto halves = split_halves(chains);
  const auto m = static_cast<double>(halves.size());
  const auto n = static_cast<double>(halves.front().size());
  Eigen::VectorXd means(static_cast<Eigen::Index>(halves.size()));
  double within = 0.0;
  for (std::size_t k = 0; k < halves.size(); ++k) {
    const double mu = halves[k].mean();
    means[static_cast<Eigen::Index>(k)] = mu;
    within += (halves[k].array() - mu).square().sum() / (n - 1.0);
  }
  within /= m;
  const double between = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
  if (!(within > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  check_chains(chains);
  const auto halves = split_halves(chains);
  const auto m = halves.size();
  const Eigen::Index n = halves.front().size();
  const auto nd = static_cast<double>(n);

  std::vector<Eigen::VectorXd> centered;
  centered.reserve(m);
  Eigen::VectorXd means(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    means[static_cast<Eigen::Index>(k)] = halves[k].mean();
    centered.emplace_back(halves[k].array() - means[static_cast<Eigen::Index>(k)]);
  }
  // mean over chains of the biased lag-t autocovariance
  auto mean_acov = [&](Eigen::Index t) {
    double s = 0.0;
    for (const auto& c : centered) s += c.head(n - t).dot(c.tail(n - t)) / nd;
    return s / static_cast<double>(m);
  };

  const double acov0 = mean_acov(0);
  const double within = acov0 * nd / (nd - 1.0);
  double var_plus = within * (nd - 1.0) / nd;
  if (m > 1) var_plus += (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1);
  if (!(within > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  auto rho = [&](Eigen::Index t) { return 1.0 - (within - mean_acov(t)) / var_plus; };

  // Geyer's initial monotone sequence over pairs of lags
  std::vector<double> pairs;
  double even = 1.0;
  double odd = rho(1);
  Eigen::Index t = 0;
  while (t + 1 < n && even + odd > 0.0) {
    pairs.push_back(even + odd);
    t += 2;
    if (t + 1 >= n) break;
    even = rho(t);
    odd = rho(t + 1);
  }
  for (std::size_t k = 1; k < pairs.size(); ++k) pairs[k] = std::min(pairs[k], pairs[k - 1]);
  double tau = -1.0;
  for (const double v : pairs) tau += 2.0 * v;
  const double total = static_cast<double>(m) * nd;
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

DiagnosticReport diagnostics(const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.size() < 2) throw Error(ErrorCode::NeedTwoChains, "diagnostics need two or more chains");
  const Eigen::Index p = chains.front().cols();
  DiagnosticReport report;
  report.rhat.resize(p);
  report.ess.resize(p);
  report.max_rhat = 0.0;
  report.min_ess = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> columns(chains.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < chains.size(); ++k) columns[k] = chains[k].col(j);
    const double rhat = split_rhat(columns);
    const double ess = effective_sample_size(columns);
    report.rhat[j] = rhat;
    report.ess[j] = ess;
    if (std::isnan(rhat)) {
      report.degenerate = true;
    } else {
      report.max_rhat = std::max(report.max_rhat, rhat);
    }
    if (!std::isnan(ess)) report.min_ess = std::min(report.min_ess, ess);
  }
  if (p == 0) report.min_ess = 0.0;
  report.pass = !report.degenerate && report.max_rhat < 1.05;
  return report;
}

DiagnosticReport diagnostics(const PosteriorSummary& summary) {
  return diagnostics(summary.beta_chains);
}

void write_chains(const PosteriorSummary& summary, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "chain,iter,param,value\n";
  auto dump = [&](const std::vector<Eigen::MatrixXd>& chains, const char* name) {
    for (std::size_t k = 0; k < chains.size(); ++k) {
      const auto& c = chains[k];
      for (Eigen::Index i = 0; i < c.rows(); ++i) {
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
          out << k << ',' << i << ',' << name << '[' << summary.players[static_cast<std::size_t>(j)].token
              << "]," << csv::format(c(i, j)) << '\n';
        }
      }
    }
  };
  dump(summary.beta_chains, "beta");
  dump(summary.eta_chains, "eta");
  csv::close_out(out, file);
}

void write_posterior_summary(const PosteriorSummary& summary, const std::filesystem::path& file) {
  const bool hier = !summary.eta_chains.empty();
  auto out = csv::open_out(file);
  out << "player_id,mean,sd,q05,q50,q95,rhat,ess";
  if (hier) out << ",eta_mean,eta_sd,eta_q05,eta_q50,eta_q95,eta_rhat,eta_ess";
  out << '\n';
  auto cells = [&](const MarginalSummary& m, const DiagnosticReport& d, Eigen::Index j) {
    out << ',' << csv::format(m.mean[j]) << ',' << csv::format(m.sd[j]) << ','
        << csv::format(m.q05[j]) << ',' << csv::format(m.q50[j]) << ',' << csv::format(m.q95[j]);
    out << ',';
    if (d.rhat.size() > j) out << csv::format(d.rhat[j]);
    out << ',';
    if (d.ess.size() > j) out << csv::format(d.ess[j]);
  };
  for (std::size_t j = 0; j < summary.players.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out << summary.players[j].token;
    cells(summary.beta, summary.beta_diagnostics, jj);
    if (hier) cells(summary.eta, summary.eta_diagnostics, jj);
    out << '\n';
  }
  csv::close_out(out, file);
}

}  // namespace apm

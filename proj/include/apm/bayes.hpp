#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "apm/data.hpp"

namespace apm {

enum class BayesModel { Simple, Hierarchical };

// y | b ~ N(X b, sigma2 I)
//   simple:        b ~ N(r, tau2 I)
//   hierarchical:  b | eta ~ N(eta .* r, tau2 I),  eta ~ N(0, I)
// with r the standardized Rating2.0 vector. Variances are fixed.
struct BayesConfig {
  BayesModel model = BayesModel::Simple;
  double sigma2 = 1.0;
  double tau2 = 1.0;
  int n_chains = 4;
  int n_warmup = 1000;
  int n_samples = 2000;
  std::uint64_t seed = 0;
  double init_eta_sd = 2.0;
};

struct DiagnosticReport {
  Eigen::VectorXd rhat;  // split-Rhat per coordinate, NaN when undefined
  Eigen::VectorXd ess;
  double max_rhat = 0.0;
  double min_ess = 0.0;
  bool degenerate = false;  // some coordinate has zero within-chain variance
  bool pass = false;        // every Rhat < 1.05 and nothing degenerate
};

struct MarginalSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd q05;
  Eigen::VectorXd q50;
  Eigen::VectorXd q95;
};

struct PosteriorSummary {
  BayesModel model = BayesModel::Simple;
  std::vector<PlayerId> players;
  // Post-warmup draws, one n_samples x p matrix per chain.
  std::vector<Eigen::MatrixXd> beta_chains;
  std::vector<Eigen::MatrixXd> eta_chains;  // hierarchical only
  MarginalSummary beta;
  MarginalSummary eta;
  DiagnosticReport beta_diagnostics;
  DiagnosticReport eta_diagnostics;
};

PosteriorSummary fit_bayes(const Dataset& ds, const RatingPrior& prior, const BayesConfig& config);
PosteriorSummary fit_bayes_simple(const Dataset& ds, const RatingPrior& prior, BayesConfig config);
PosteriorSummary fit_bayes_hierarchical(const Dataset& ds, const RatingPrior& prior,
                                        BayesConfig config);

// Closed-form posterior of the simple model: mean and covariance.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> conjugate_posterior(const Dataset& ds,
                                                                const Eigen::VectorXd& prior_mean,
                                                                double sigma2, double tau2);

MarginalSummary summarize_draws(const std::vector<Eigen::MatrixXd>& chains);

// Split-Rhat and bulk ESS for every column of the chains; needs two or more.
DiagnosticReport diagnostics(const std::vector<Eigen::MatrixXd>& chains);
DiagnosticReport diagnostics(const PosteriorSummary& summary);

double split_rhat(const std::vector<Eigen::VectorXd>& chains);
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

// `chain,iter,param,value` rows for beta (and eta when present).
void write_chains(const PosteriorSummary& summary, const std::filesystem::path& file);

// player_id,mean,sd,q05,q50,q95,rhat,ess; hierarchical fits add the same
// columns for eta with an eta_ prefix.
void write_posterior_summary(const PosteriorSummary& summary, const std::filesystem::path& file);

}  // namespace apm

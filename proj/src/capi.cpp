#include "apm/apm.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "apm/bayes.hpp"
#include "apm/data.hpp"
#include "apm/error.hpp"
#include "apm/eval.hpp"
#include "apm/linmodel.hpp"
#include "apm/logmodel.hpp"
#include "apm/modelsel.hpp"
#include "apm/rng.hpp"
#include "apm/synth.hpp"

struct apm_matches {
  std::vector<apm::MatchRecord> records;
  std::vector<std::string> warnings;
};

struct apm_dataset {
  apm::Dataset data;
};

struct apm_ratings {
  apm::RatingTable table;
};

struct apm_fit {
  apm::FitResult result;
};

struct apm_posterior {
  apm::PosteriorSummary summary;
};

struct apm_cv {
  apm::CvResult result;
};

struct apm_report {
  apm::RatingReport report;
};

struct apm_synth {
  apm::SynthData data;
  apm_matches matches;
};

namespace {

thread_local std::string last_error;

apm_status status_of(apm::ErrorCode code) {
  using apm::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return APM_E_INVALID_ARGUMENT;
    case ErrorCode::Io: return APM_E_IO;
    case ErrorCode::MalformedCsv: return APM_E_MALFORMED_CSV;
    case ErrorCode::RosterSizeViolation: return APM_E_ROSTER_SIZE;
    case ErrorCode::PlayerOnBothTeams: return APM_E_PLAYER_ON_BOTH_TEAMS;
    case ErrorCode::DuplicateMapId: return APM_E_DUPLICATE_MAP_ID;
    case ErrorCode::EmptyModel: return APM_E_EMPTY_MODEL;
    case ErrorCode::EmptyPartition: return APM_E_EMPTY_PARTITION;
    case ErrorCode::MissingPrior: return APM_E_MISSING_PRIOR;
    case ErrorCode::ZeroVariance: return APM_E_ZERO_VARIANCE;
    case ErrorCode::TooFewPoints: return APM_E_TOO_FEW_POINTS;
    case ErrorCode::NeedTwoChains: return APM_E_NEED_TWO_CHAINS;
    case ErrorCode::Numerical: return APM_E_NUMERICAL;
  }
  return APM_E_INTERNAL;
}

apm_status fail(apm_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename Fn>
apm_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return APM_OK;
  } catch (const apm::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(APM_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(APM_E_INTERNAL, e.what());
  } catch (...) {
    return fail(APM_E_INTERNAL, "unknown error");
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw apm::Error(apm::ErrorCode::InvalidArgument, message);
}

template <typename T, typename Src>
void copy_out(const Src& src, T* out, std::size_t capacity) {
  require(out != nullptr || src.size() == 0, "output buffer is NULL");
  require(capacity >= static_cast<std::size_t>(src.size()), "output buffer too small");
  for (std::size_t k = 0; k < static_cast<std::size_t>(src.size()); ++k) out[k] = static_cast<T>(src[k]);
}

std::vector<double> labels_of(const apm::Dataset& ds) {
  std::vector<double> labels;
  labels.reserve(ds.n_rows());
  for (const double y : ds.y()) {
    require(y != 0.0, "dataset contains draws; binarize it first");
    labels.push_back(y > 0.0 ? 1.0 : 0.0);
  }
  return labels;
}

bool is_logistic(apm_model m) {
  return m == APM_MODEL_LOGIT || m == APM_MODEL_LOGIT_RIDGE || m == APM_MODEL_LOGIT_ENET;
}

apm_model model_of(apm::ModelKind kind) {
  using apm::ModelKind;
  switch (kind) {
    case ModelKind::Ols: return APM_MODEL_OLS;
    case ModelKind::Ridge: return APM_MODEL_RIDGE;
    case ModelKind::ElasticNet: return APM_MODEL_ENET;
    case ModelKind::Logistic: return APM_MODEL_LOGIT;
    case ModelKind::LogisticRidge: return APM_MODEL_LOGIT_RIDGE;
    case ModelKind::LogisticElasticNet: return APM_MODEL_LOGIT_ENET;
    case ModelKind::BayesSimple: return APM_MODEL_BAYES;
    case ModelKind::BayesHierarchical: return APM_MODEL_BAYES_HIER;
  }
  return APM_MODEL_OLS;
}

constexpr const char* kModelNames[] = {"ols",         "ridge",      "enet",  "logit",
                                       "logit-ridge", "logit-enet", "bayes", "bayes-hier"};

}  // namespace

extern "C" {

const char* apm_version(void) { return "1.0.0"; }

const char* apm_status_name(apm_status status) {
  switch (status) {
    case APM_OK: return "OK";
    case APM_E_INVALID_ARGUMENT: return "InvalidArgument";
    case APM_E_IO: return "Io";
    case APM_E_MALFORMED_CSV: return "MalformedCsv";
    case APM_E_ROSTER_SIZE: return "RosterSizeViolation";
    case APM_E_PLAYER_ON_BOTH_TEAMS: return "PlayerOnBothTeams";
    case APM_E_DUPLICATE_MAP_ID: return "DuplicateMapId";
    case APM_E_EMPTY_MODEL: return "EmptyModel";
    case APM_E_EMPTY_PARTITION: return "EmptyPartition";
    case APM_E_MISSING_PRIOR: return "MissingPrior";
    case APM_E_ZERO_VARIANCE: return "ZeroVariance";
    case APM_E_TOO_FEW_POINTS: return "TooFewPoints";
    case APM_E_NEED_TWO_CHAINS: return "NeedTwoChains";
    case APM_E_NUMERICAL: return "Numerical";
    case APM_E_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* apm_last_error(void) { return last_error.c_str(); }

const char* apm_model_name(apm_model model) {
  const auto k = static_cast<int>(model);
  return k >= 0 && k < 8 ? kModelNames[k] : "unknown";
}

apm_status apm_model_parse(const char* name, apm_model* out) {
  if (!name || !out) return fail(APM_E_INVALID_ARGUMENT, "NULL argument");
  for (int k = 0; k < 8; ++k) {
    if (std::strcmp(name, kModelNames[k]) == 0) {
      *out = static_cast<apm_model>(k);
      return APM_OK;
    }
  }
  return fail(APM_E_INVALID_ARGUMENT, std::string("unknown model '") + name + "'");
}

uint64_t apm_derive_seed(uint64_t seed, const char* label) {
  return apm::derive_seed(seed, label ? label : "");
}

/* ---- matches ---- */

apm_status apm_matches_load(const char* matches_csv, const char* rosters_csv, apm_matches** out) {
  return guarded([&] {
    require(matches_csv && rosters_csv && out, "NULL argument");
    auto m = std::make_unique<apm_matches>();
    m->records = apm::load_matches(matches_csv, rosters_csv, &m->warnings);
    *out = m.release();
  });
}

void apm_matches_free(apm_matches* matches) { delete matches; }

size_t apm_matches_count(const apm_matches* matches) { return matches ? matches->records.size() : 0; }

size_t apm_matches_warning_count(const apm_matches* matches) {
  return matches ? matches->warnings.size() : 0;
}

const char* apm_matches_warning(const apm_matches* matches, size_t index) {
  if (!matches || index >= matches->warnings.size()) return nullptr;
  return matches->warnings[index].c_str();
}

apm_status apm_matches_write(const apm_matches* matches, const char* matches_csv,
                             const char* rosters_csv) {
  return guarded([&] {
    require(matches && matches_csv && rosters_csv, "NULL argument");
    apm::write_matches(matches->records, matches_csv, rosters_csv);
  });
}

/* ---- datasets ---- */

apm_status apm_dataset_build(const apm_matches* matches, apm_dataset** out) {
  return guarded([&] {
    require(matches && out, "NULL argument");
    *out = new apm_dataset{apm::build_dataset(matches->records)};
  });
}

void apm_dataset_free(apm_dataset* ds) { delete ds; }

size_t apm_dataset_rows(const apm_dataset* ds) { return ds ? ds->data.n_rows() : 0; }

size_t apm_dataset_players(const apm_dataset* ds) { return ds ? ds->data.n_players() : 0; }

const char* apm_dataset_player_id(const apm_dataset* ds, size_t index) {
  if (!ds || index >= ds->data.n_players()) return nullptr;
  return ds->data.players()[index].token.c_str();
}

apm_status apm_dataset_response(const apm_dataset* ds, double* out, size_t capacity) {
  return guarded([&] {
    require(ds, "NULL dataset");
    copy_out(ds->data.y(), out, capacity);
  });
}

apm_status apm_dataset_appearances(const apm_dataset* ds, size_t* out, size_t capacity) {
  return guarded([&] {
    require(ds, "NULL dataset");
    std::vector<std::size_t> counts(ds->data.n_players());
    for (std::size_t j = 0; j < counts.size(); ++j) counts[j] = ds->data.appearances(j);
    copy_out(counts, out, capacity);
  });
}

apm_status apm_dataset_filter_min_matches(const apm_dataset* ds, size_t min_matches,
                                          apm_dataset** out) {
  return guarded([&] {
    require(ds && out, "NULL argument");
    *out = new apm_dataset{apm::filter_min_matches(ds->data, min_matches)};
  });
}

apm_status apm_dataset_split(const apm_dataset* ds, double train_fraction, uint64_t seed,
                             apm_dataset** train, apm_dataset** test) {
  return guarded([&] {
    require(ds && train && test, "NULL argument");
    auto [a, b] = apm::split(ds->data, train_fraction, seed);
    auto ta = std::make_unique<apm_dataset>(apm_dataset{std::move(a)});
    auto tb = std::make_unique<apm_dataset>(apm_dataset{std::move(b)});
    *train = ta.release();
    *test = tb.release();
  });
}

apm_status apm_dataset_binarize(const apm_dataset* ds, apm_dataset** out) {
  return guarded([&] {
    require(ds && out, "NULL argument");
    *out = new apm_dataset{apm::binarize_for_logistic(ds->data).data};
  });
}

apm_status apm_dataset_labels(const apm_dataset* ds, double* out, size_t capacity) {
  return guarded([&] {
    require(ds, "NULL dataset");
    copy_out(labels_of(ds->data), out, capacity);
  });
}

apm_status apm_dataset_plus_minus(const apm_dataset* ds, double* pm, size_t capacity) {
  return guarded([&] {
    require(ds, "NULL dataset");
    copy_out(apm::plus_minus(ds->data).pm, pm, capacity);
  });
}

apm_status apm_dataset_write_plus_minus(const apm_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds && path, "NULL argument");
    apm::write_plus_minus(apm::plus_minus(ds->data), path);
  });
}

apm_status apm_dataset_response_variance(const apm_dataset* ds, double* out) {
  return guarded([&] {
    require(ds && out, "NULL argument");
    const auto y = ds->data.response();
    if (y.size() < 2) throw apm::Error(apm::ErrorCode::ZeroVariance, "fewer than two matches");
    const double var = (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
    if (!(var > 0.0)) throw apm::Error(apm::ErrorCode::ZeroVariance, "constant response");
    *out = var;
  });
}

/* ---- ratings ---- */

apm_status apm_ratings_load(const char* ratings_csv, apm_ratings** out) {
  return guarded([&] {
    require(ratings_csv && out, "NULL argument");
    *out = new apm_ratings{apm::load_rating_table(ratings_csv)};
  });
}

void apm_ratings_free(apm_ratings* ratings) { delete ratings; }

apm_status apm_ratings_check_coverage(const apm_ratings* ratings, const apm_dataset* ds) {
  return guarded([&] {
    require(ratings && ds, "NULL argument");
    for (const auto& p : ds->data.players()) {
      if (!ratings->table.count(p)) {
        throw apm::Error(apm::ErrorCode::MissingPrior, "no Rating2.0 value for player " + p.token);
      }
    }
  });
}

apm_status apm_ratings_standardized(const apm_ratings* ratings, const apm_dataset* ds, double* out,
                                    size_t capacity) {
  return guarded([&] {
    require(ratings && ds, "NULL argument");
    copy_out(apm::restrict_rating_prior(ratings->table, ds->data.players()).s_rating2, out, capacity);
  });
}

/* ---- fits ---- */

void apm_fit_options_init(apm_fit_options* options, apm_model model) {
  if (!options) return;
  options->model = model;
  options->alpha = (model == APM_MODEL_RIDGE || model == APM_MODEL_LOGIT_RIDGE) ? 0.0 : 1.0;
  options->lambda = 0.0;
  options->tol = 1e-7;
  options->max_iter = 0;
}

apm_status apm_fit_create(const apm_dataset* ds, const apm_fit_options* options, apm_fit** out) {
  return guarded([&] {
    require(ds && options && out, "NULL argument");
    const apm_model m = options->model;
    const double tol = options->tol > 0.0 ? options->tol : 1e-7;
    auto fit = std::make_unique<apm_fit>();
    if (is_logistic(m)) {
      const auto bin = apm::binarize_for_logistic(ds->data);
      apm::LogisticFitConfig cfg;
      cfg.alpha = m == APM_MODEL_LOGIT_RIDGE ? 0.0 : options->alpha;
      cfg.lambda = m == APM_MODEL_LOGIT ? 0.0 : options->lambda;
      cfg.tol = tol;
      if (options->max_iter > 0) cfg.max_iter = options->max_iter;
      fit->result = apm::fit_logistic(bin.data, bin.labels, cfg);
    } else {
      apm::LinearFitConfig cfg;
      switch (m) {
        case APM_MODEL_OLS: cfg.kind = apm::ModelKind::Ols; break;
        case APM_MODEL_RIDGE: cfg.kind = apm::ModelKind::Ridge; break;
        case APM_MODEL_ENET: cfg.kind = apm::ModelKind::ElasticNet; break;
        default: require(false, "model is not a point-estimate fit");
      }
      cfg.alpha = options->alpha;
      cfg.lambda = options->lambda;
      cfg.tol = tol;
      if (options->max_iter > 0) cfg.max_iter = options->max_iter;
      fit->result = apm::fit_linear(ds->data, cfg);
    }
    *out = fit.release();
  });
}

void apm_fit_free(apm_fit* fit) { delete fit; }

apm_status apm_fit_get_info(const apm_fit* fit, apm_fit_info* out) {
  return guarded([&] {
    require(fit && out, "NULL argument");
    const auto& r = fit->result;
    *out = apm_fit_info{model_of(r.kind), r.alpha,     r.lambda,    r.iterations,
                        r.converged ? 1 : 0, r.separation ? 1 : 0, r.objective, r.residual};
  });
}

size_t apm_fit_coefficient_count(const apm_fit* fit) {
  return fit ? static_cast<size_t>(fit->result.coefficients.size()) : 0;
}

apm_status apm_fit_coefficients(const apm_fit* fit, double* out, size_t capacity) {
  return guarded([&] {
    require(fit, "NULL fit");
    copy_out(fit->result.coefficients, out, capacity);
  });
}

apm_status apm_kkt_residual(const apm_dataset* ds, const double* beta, size_t p, double alpha,
                            double lambda, double* out) {
  return guarded([&] {
    require(ds && beta && out, "NULL argument");
    require(p == ds->data.n_players(), "coefficient count mismatch");
    *out = apm::kkt_residual(ds->data, Eigen::Map<const Eigen::VectorXd>(beta, static_cast<Eigen::Index>(p)),
                             alpha, lambda);
  });
}

/* ---- Bayes ---- */

void apm_bayes_options_init(apm_bayes_options* options, apm_model model) {
  if (!options) return;
  *options = apm_bayes_options{model, 0.0, 1.0, 4, 1000, 2000, 0};
}

apm_status apm_posterior_create(const apm_dataset* ds, const apm_ratings* ratings,
                                const apm_bayes_options* options, apm_posterior** out) {
  return guarded([&] {
    require(ds && options && out, "NULL argument");
    require(options->model == APM_MODEL_BAYES || options->model == APM_MODEL_BAYES_HIER,
            "model is not Bayesian");
    if (!ratings) throw apm::Error(apm::ErrorCode::MissingPrior, "Bayesian models need Rating2.0 data");
    const auto prior = apm::restrict_rating_prior(ratings->table, ds->data.players());
    apm::BayesConfig cfg;
    cfg.model = options->model == APM_MODEL_BAYES ? apm::BayesModel::Simple : apm::BayesModel::Hierarchical;
    cfg.sigma2 = options->sigma2;
    if (!(cfg.sigma2 > 0.0)) {
      const auto y = ds->data.response();
      if (y.size() < 2) throw apm::Error(apm::ErrorCode::ZeroVariance, "fewer than two matches");
      cfg.sigma2 = (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
      if (!(cfg.sigma2 > 0.0)) throw apm::Error(apm::ErrorCode::ZeroVariance, "constant response");
    }
    cfg.tau2 = options->tau2;
    cfg.n_chains = options->chains;
    cfg.n_warmup = options->warmup;
    cfg.n_samples = options->samples;
    cfg.seed = options->seed;
    *out = new apm_posterior{apm::fit_bayes(ds->data, prior, cfg)};
  });
}

void apm_posterior_free(apm_posterior* post) { delete post; }

size_t apm_posterior_count(const apm_posterior* post) { return post ? post->summary.players.size() : 0; }

apm_status apm_posterior_summary(const apm_posterior* post, int which, double* out, size_t capacity) {
  return guarded([&] {
    require(post, "NULL posterior");
    const auto& b = post->summary.beta;
    switch (which) {
      case 0: copy_out(b.mean, out, capacity); break;
      case 1: copy_out(b.sd, out, capacity); break;
      case 2: copy_out(b.q05, out, capacity); break;
      case 3: copy_out(b.q50, out, capacity); break;
      case 4: copy_out(b.q95, out, capacity); break;
      default: require(false, "summary selector must be 0..4");
    }
  });
}

apm_status apm_posterior_get_diagnostics(const apm_posterior* post, apm_diagnostics* out) {
  return guarded([&] {
    require(post && out, "NULL argument");
    const auto& s = post->summary;
    if (s.beta_chains.size() < 2) {
      throw apm::Error(apm::ErrorCode::NeedTwoChains, "diagnostics need two or more chains");
    }
    const auto& d = s.beta_diagnostics;
    apm_diagnostics r{d.max_rhat, d.min_ess, d.degenerate ? 1 : 0, d.pass ? 1 : 0};
    if (!s.eta_chains.empty()) {
      const auto& e = s.eta_diagnostics;
      r.max_rhat = std::max(r.max_rhat, e.max_rhat);
      r.min_ess = std::min(r.min_ess, e.min_ess);
      r.degenerate = r.degenerate || e.degenerate;
      r.pass = r.pass && e.pass;
    }
    *out = r;
  });
}

apm_status apm_posterior_write_chains(const apm_posterior* post, const char* path) {
  return guarded([&] {
    require(post && path, "NULL argument");
    apm::write_chains(post->summary, path);
  });
}

apm_status apm_posterior_write_summary(const apm_posterior* post, const char* path) {
  return guarded([&] {
    require(post && path, "NULL argument");
    apm::write_posterior_summary(post->summary, path);
  });
}

/* ---- CV ---- */

void apm_cv_options_init(apm_cv_options* options, apm_family family) {
  if (!options) return;
  *options = apm_cv_options{family, nullptr, 0, 0, 0, 0, 0.0, 0, 0};
}

apm_status apm_cv_run(const apm_dataset* ds, const apm_cv_options* options, apm_cv** out) {
  return guarded([&] {
    require(ds && options && out, "NULL argument");
    apm::CvGrid grid;
    if (options->alphas) {
      require(options->n_alphas > 0, "alpha list is empty");
      grid.alphas.assign(options->alphas, options->alphas + options->n_alphas);
    } else {
      grid.alphas = apm::alpha_grid(options->n_alphas > 0 ? static_cast<int>(options->n_alphas)
                                                          : apm::kDefaultGridSize);
    }
    if (options->n_lambdas > 0) grid.n_lambdas = options->n_lambdas;
    if (options->folds > 0) grid.folds = options->folds;
    grid.seed = options->seed;
    apm::CvOptions cv;
    if (options->tol > 0.0) cv.tol = options->tol;
    if (options->max_iter > 0) cv.max_iter = options->max_iter;
    cv.threads = options->threads;
    auto result = std::make_unique<apm_cv>();
    if (options->family == APM_FAMILY_BINOMIAL) {
      const auto bin = apm::binarize_for_logistic(ds->data);
      result->result = apm::cross_validate(bin.data, bin.labels, apm::Family::Binomial, grid, cv);
    } else {
      result->result = apm::cross_validate(ds->data, ds->data.y(), apm::Family::Gaussian, grid, cv);
    }
    *out = result.release();
  });
}

void apm_cv_free(apm_cv* cv) { delete cv; }

apm_status apm_cv_best(const apm_cv* cv, double* alpha, double* lambda, double* mean_error) {
  return guarded([&] {
    require(cv, "NULL cv");
    const auto& b = cv->result.best();
    if (alpha) *alpha = b.alpha;
    if (lambda) *lambda = b.lambda;
    if (mean_error) *mean_error = b.mean_error;
  });
}

size_t apm_cv_warning_count(const apm_cv* cv) { return cv ? cv->result.warnings.size() : 0; }

const char* apm_cv_warning(const apm_cv* cv, size_t index) {
  if (!cv || index >= cv->result.warnings.size()) return nullptr;
  return cv->result.warnings[index].c_str();
}

apm_status apm_cv_write_surface(const apm_cv* cv, const char* path) {
  return guarded([&] {
    require(cv && path, "NULL argument");
    apm::write_cv_surface(cv->result, path);
  });
}

apm_status apm_lambda_path(const apm_dataset* ds, apm_family family, double alpha, double* out,
                           size_t count) {
  return guarded([&] {
    require(ds && out && count > 0, "invalid argument");
    std::vector<double> path;
    if (family == APM_FAMILY_BINOMIAL) {
      const auto bin = apm::binarize_for_logistic(ds->data);
      path = apm::lambda_path(bin.data, bin.labels, alpha, apm::Family::Binomial, static_cast<int>(count));
    } else {
      path = apm::lambda_path(ds->data, ds->data.y(), alpha, apm::Family::Gaussian, static_cast<int>(count));
    }
    copy_out(path, out, count);
  });
}

/* ---- evaluation ---- */

apm_status apm_pearson_test(const double* x, const double* y, size_t n, apm_pearson* out) {
  return guarded([&] {
    require(x && y && out, "NULL argument");
    const auto t = apm::pearson_test(std::span<const double>(x, n), std::span<const double>(y, n));
    *out = apm_pearson{t.r, t.t_stat, t.df, t.p_value};
  });
}

apm_status apm_rank(const double* ratings, size_t n, uint64_t seed, int* ranks) {
  return guarded([&] {
    require((ratings && ranks) || n == 0, "NULL argument");
    const auto r = apm::rank_players(std::span<const double>(ratings, n), seed);
    for (std::size_t k = 0; k < n; ++k) ranks[k] = r[k];
  });
}

apm_status apm_evaluate(const apm_dataset* ds, const double* beta, size_t p, int win_rates,
                        const char* scatter_csv, apm_pearson* out) {
  return guarded([&] {
    require(ds && beta && out, "NULL argument");
    require(p == ds->data.n_players(), "coefficient count mismatch");
    const std::span<const double> b(beta, p);
    std::vector<apm::ScatterRow> rows;
    if (win_rates) {
      const auto bin = apm::binarize_for_logistic(ds->data);
      rows = apm::win_rate_scatter(bin.data, bin.labels, b);
    } else {
      rows = apm::plus_minus_scatter(ds->data, b);
    }
    if (scatter_csv) apm::write_scatter(rows, win_rates != 0, scatter_csv);
    const auto t = apm::scatter_test(rows);
    *out = apm_pearson{t.r, t.t_stat, t.df, t.p_value};
  });
}

apm_status apm_report_create(const apm_dataset* ds, const char* model, const double* ratings,
                             size_t p, int l1_active, const apm_ratings* rating2, uint64_t seed,
                             apm_report** out) {
  return guarded([&] {
    require(ds && model && ratings && out, "NULL argument");
    require(p == ds->data.n_players(), "rating count mismatch");
    const auto pm = apm::plus_minus(ds->data);
    *out = new apm_report{apm::build_rating_report(model, pm, std::span<const double>(ratings, p),
                                                   l1_active != 0, rating2 ? &rating2->table : nullptr,
                                                   seed)};
  });
}

void apm_report_free(apm_report* report) { delete report; }

namespace {
std::vector<apm::RatingReport> collect(const apm_report* const* reports, size_t n) {
  require(reports || n == 0, "NULL report list");
  std::vector<apm::RatingReport> out;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    require(reports[k], "NULL report");
    out.push_back(reports[k]->report);
  }
  return out;
}
}  // namespace

apm_status apm_report_write(const apm_report* const* reports, size_t n, const char* path) {
  return guarded([&] {
    require(path, "NULL path");
    apm::write_ratings(collect(reports, n), path);
  });
}

apm_status apm_report_write_comparison(const apm_report* const* reports, size_t n, size_t k,
                                       const char* path) {
  return guarded([&] {
    require(path, "NULL path");
    const auto all = collect(reports, n);
    apm::write_comparison(apm::comparison_table(all, k), all, path);
  });
}

apm_status apm_write_pearson_report(const char* const* models, const apm_pearson* tests, size_t n,
                                    const char* path) {
  return guarded([&] {
    require(path && ((models && tests) || n == 0), "NULL argument");
    std::vector<apm::NamedTest> rows;
    for (size_t k = 0; k < n; ++k) {
      require(models[k], "NULL model name");
      rows.push_back({models[k], apm::PearsonTest{tests[k].r, tests[k].t, tests[k].df, tests[k].p_value}});
    }
    apm::write_pearson_report(rows, path);
  });
}

/* ---- synth ---- */

void apm_synth_options_init(apm_synth_options* options) {
  if (!options) return;
  const apm::SynthConfig d;
  *options = apm_synth_options{d.n_players, d.n_matches, d.strength_sd, d.noise_sd,
                               d.allow_draws ? 1 : 0, d.seed};
}

apm_status apm_synth_generate(const apm_synth_options* options, apm_synth** out) {
  return guarded([&] {
    require(options && out, "NULL argument");
    apm::SynthConfig cfg{options->n_players, options->n_matches, options->strength_sd,
                         options->noise_sd,  options->allow_draws != 0, options->seed};
    auto s = std::make_unique<apm_synth>();
    s->data = apm::generate(cfg);
    s->matches.records = s->data.records;
    s->matches.warnings = apm::result_diff_warnings(s->matches.records);
    *out = s.release();
  });
}

void apm_synth_free(apm_synth* synth) { delete synth; }

const apm_matches* apm_synth_matches(const apm_synth* synth) { return synth ? &synth->matches : nullptr; }

apm_status apm_synth_truth(const apm_synth* synth, double* out, size_t capacity) {
  return guarded([&] {
    require(synth, "NULL synth");
    copy_out(synth->data.strengths, out, capacity);
  });
}

apm_status apm_synth_write_truth(const apm_synth* synth, const char* path) {
  return guarded([&] {
    require(synth && path, "NULL argument");
    apm::write_truth(synth->data, path);
  });
}

}  // extern "C"

/*
 * C interface to the adjusted plus/minus rating engine.
 *
 * Objects are opaque handles created by apm_*_create/load/fit functions and
 * released with the matching apm_*_free. Every fallible call returns an
 * apm_status; on failure apm_last_error() describes it (thread-local, valid
 * until the next failing call on the same thread). Output pointers are left
 * untouched on failure.
 *
 * Vector outputs use caller-provided buffers: pass `capacity` elements, the
 * call fails with APM_E_INVALID_ARGUMENT when the buffer is too small. Query
 * sizes first with the *_count accessors.
 */
#ifndef APM_APM_H
#define APM_APM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(APM_BUILDING_LIBRARY)
#    define APM_API __declspec(dllexport)
#  else
#    define APM_API __declspec(dllimport)
#  endif
#else
#  define APM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum apm_status {
  APM_OK = 0,
  APM_E_INVALID_ARGUMENT = 1,
  APM_E_IO = 2,
  APM_E_MALFORMED_CSV = 3,
  APM_E_ROSTER_SIZE = 4,
  APM_E_PLAYER_ON_BOTH_TEAMS = 5,
  APM_E_DUPLICATE_MAP_ID = 6,
  APM_E_EMPTY_MODEL = 7,
  APM_E_EMPTY_PARTITION = 8,
  APM_E_MISSING_PRIOR = 9,
  APM_E_ZERO_VARIANCE = 10,
  APM_E_TOO_FEW_POINTS = 11,
  APM_E_NEED_TWO_CHAINS = 12,
  APM_E_NUMERICAL = 13,
  APM_E_INTERNAL = 14
} apm_status;

typedef enum apm_model {
  APM_MODEL_OLS = 0,
  APM_MODEL_RIDGE = 1,
  APM_MODEL_ENET = 2,
  APM_MODEL_LOGIT = 3,
  APM_MODEL_LOGIT_RIDGE = 4,
  APM_MODEL_LOGIT_ENET = 5,
  APM_MODEL_BAYES = 6,
  APM_MODEL_BAYES_HIER = 7
} apm_model;

typedef enum apm_family { APM_FAMILY_GAUSSIAN = 0, APM_FAMILY_BINOMIAL = 1 } apm_family;

typedef struct apm_matches apm_matches;
typedef struct apm_dataset apm_dataset;
typedef struct apm_ratings apm_ratings;
typedef struct apm_fit apm_fit;
typedef struct apm_posterior apm_posterior;
typedef struct apm_cv apm_cv;
typedef struct apm_report apm_report;
typedef struct apm_synth apm_synth;

APM_API const char* apm_version(void);
APM_API const char* apm_status_name(apm_status status);
APM_API const char* apm_last_error(void);

APM_API const char* apm_model_name(apm_model model);
/* Parses "ols", "ridge", "enet", "logit", "logit-ridge", "logit-enet", "bayes", "bayes-hier". */
APM_API apm_status apm_model_parse(const char* name, apm_model* out);

/* Labelled substream of a top-level seed. */
APM_API uint64_t apm_derive_seed(uint64_t seed, const char* label);

/* ---- match records ---------------------------------------------------- */

APM_API apm_status apm_matches_load(const char* matches_csv, const char* rosters_csv,
                                    apm_matches** out);
APM_API void apm_matches_free(apm_matches* matches);
APM_API size_t apm_matches_count(const apm_matches* matches);
/* Validation warnings gathered while loading (result differences of +/-1). */
APM_API size_t apm_matches_warning_count(const apm_matches* matches);
APM_API const char* apm_matches_warning(const apm_matches* matches, size_t index);
APM_API apm_status apm_matches_write(const apm_matches* matches, const char* matches_csv,
                                     const char* rosters_csv);

/* ---- datasets --------------------------------------------------------- */

APM_API apm_status apm_dataset_build(const apm_matches* matches, apm_dataset** out);
APM_API void apm_dataset_free(apm_dataset* ds);
APM_API size_t apm_dataset_rows(const apm_dataset* ds);
APM_API size_t apm_dataset_players(const apm_dataset* ds);
/* Borrowed string, valid while `ds` lives; NULL when out of range. */
APM_API const char* apm_dataset_player_id(const apm_dataset* ds, size_t index);
APM_API apm_status apm_dataset_response(const apm_dataset* ds, double* out, size_t capacity);
APM_API apm_status apm_dataset_appearances(const apm_dataset* ds, size_t* out, size_t capacity);
APM_API apm_status apm_dataset_filter_min_matches(const apm_dataset* ds, size_t min_matches,
                                                  apm_dataset** out);
APM_API apm_status apm_dataset_split(const apm_dataset* ds, double train_fraction, uint64_t seed,
                                     apm_dataset** train, apm_dataset** test);
/* Removes drawn matches; labels (1 = team 1 won) come from apm_dataset_labels. */
APM_API apm_status apm_dataset_binarize(const apm_dataset* ds, apm_dataset** out);
APM_API apm_status apm_dataset_labels(const apm_dataset* ds, double* out, size_t capacity);
APM_API apm_status apm_dataset_plus_minus(const apm_dataset* ds, double* pm, size_t capacity);
/* plus_minus.csv: player_id,matches,pm */
APM_API apm_status apm_dataset_write_plus_minus(const apm_dataset* ds, const char* path);
/* Sample variance of the response (n - 1 denominator). */
APM_API apm_status apm_dataset_response_variance(const apm_dataset* ds, double* out);

/* ---- Rating2.0 -------------------------------------------------------- */

APM_API apm_status apm_ratings_load(const char* ratings_csv, apm_ratings** out);
APM_API void apm_ratings_free(apm_ratings* ratings);
/* Fails with APM_E_MISSING_PRIOR unless every player of `ds` is rated. */
APM_API apm_status apm_ratings_check_coverage(const apm_ratings* ratings, const apm_dataset* ds);
/* Standardized (z-score) prior means aligned with the players of `ds`. */
APM_API apm_status apm_ratings_standardized(const apm_ratings* ratings, const apm_dataset* ds,
                                            double* out, size_t capacity);

/* ---- point-estimate fits ---------------------------------------------- */

typedef struct apm_fit_options {
  apm_model model; /* OLS, RIDGE, ENET, LOGIT, LOGIT_RIDGE, LOGIT_ENET */
  double alpha;    /* forced to 0 for the ridge kinds */
  double lambda;   /* forced to 0 for OLS and LOGIT */
  double tol;      /* <= 0 selects the default 1e-7 */
  int max_iter;    /* <= 0 selects the model default */
} apm_fit_options;

typedef struct apm_fit_info {
  apm_model model;
  double alpha;
  double lambda;
  int iterations;
  int converged;
  int separation;
  double objective;
  double residual;
} apm_fit_info;

APM_API void apm_fit_options_init(apm_fit_options* options, apm_model model);
/* Logistic kinds drop drawn matches internally. */
APM_API apm_status apm_fit_create(const apm_dataset* ds, const apm_fit_options* options,
                                  apm_fit** out);
APM_API void apm_fit_free(apm_fit* fit);
APM_API apm_status apm_fit_get_info(const apm_fit* fit, apm_fit_info* out);
APM_API size_t apm_fit_coefficient_count(const apm_fit* fit);
APM_API apm_status apm_fit_coefficients(const apm_fit* fit, double* out, size_t capacity);
APM_API apm_status apm_kkt_residual(const apm_dataset* ds, const double* beta, size_t p,
                                    double alpha, double lambda, double* out);

/* ---- Bayesian fits ---------------------------------------------------- */

typedef struct apm_bayes_options {
  apm_model model; /* BAYES or BAYES_HIER */
  double sigma2;   /* <= 0: sample variance of the response */
  double tau2;
  int chains;
  int warmup;
  int samples;
  uint64_t seed;
} apm_bayes_options;

typedef struct apm_diagnostics {
  double max_rhat;
  double min_ess;
  int degenerate;
  int pass;
} apm_diagnostics;

APM_API void apm_bayes_options_init(apm_bayes_options* options, apm_model model);
APM_API apm_status apm_posterior_create(const apm_dataset* ds, const apm_ratings* ratings,
                                        const apm_bayes_options* options, apm_posterior** out);
APM_API void apm_posterior_free(apm_posterior* post);
APM_API size_t apm_posterior_count(const apm_posterior* post);
/* Posterior summaries of beta: which = 0 mean, 1 sd, 2 q05, 3 q50, 4 q95. */
APM_API apm_status apm_posterior_summary(const apm_posterior* post, int which, double* out,
                                         size_t capacity);
APM_API apm_status apm_posterior_get_diagnostics(const apm_posterior* post, apm_diagnostics* out);
/* CSV chain,iter,param,value */
APM_API apm_status apm_posterior_write_chains(const apm_posterior* post, const char* path);
/* CSV player_id,mean,sd,q05,q50,q95,rhat,ess (plus eta_* columns when hierarchical) */
APM_API apm_status apm_posterior_write_summary(const apm_posterior* post, const char* path);

/* ---- cross-validation ------------------------------------------------- */

typedef struct apm_cv_options {
  apm_family family;
  const double* alphas; /* NULL: `n_alphas` equally spaced points on [0, 1] */
  size_t n_alphas;      /* 0 selects 100 */
  int n_lambdas;        /* <= 0 selects 100 */
  int folds;            /* <= 0 selects 10 */
  uint64_t seed;
  double tol;           /* <= 0 selects 1e-6 */
  int max_iter;         /* <= 0 selects 100000 */
  int threads;          /* <= 0: hardware concurrency */
} apm_cv_options;

APM_API void apm_cv_options_init(apm_cv_options* options, apm_family family);
/* Binomial CV drops drawn matches internally. */
APM_API apm_status apm_cv_run(const apm_dataset* ds, const apm_cv_options* options, apm_cv** out);
APM_API void apm_cv_free(apm_cv* cv);
APM_API apm_status apm_cv_best(const apm_cv* cv, double* alpha, double* lambda, double* mean_error);
APM_API size_t apm_cv_warning_count(const apm_cv* cv);
APM_API const char* apm_cv_warning(const apm_cv* cv, size_t index);
/* CSV alpha,lambda,mean_error,sd_error */
APM_API apm_status apm_cv_write_surface(const apm_cv* cv, const char* path);
APM_API apm_status apm_lambda_path(const apm_dataset* ds, apm_family family, double alpha,
                                   double* out, size_t count);

/* ---- evaluation ------------------------------------------------------- */

typedef struct apm_pearson {
  double r;
  double t;
  int df;
  double p_value;
} apm_pearson;

APM_API apm_status apm_pearson_test(const double* x, const double* y, size_t n, apm_pearson* out);
APM_API apm_status apm_rank(const double* ratings, size_t n, uint64_t seed, int* ranks);

/* Scatter of true vs predicted plus/minus (or actual vs predicted win rate
 * when `win_rates` is nonzero; drawn matches are then dropped) over the rows
 * of `ds`, written to `scatter_csv` when non-NULL, with its Pearson test. */
APM_API apm_status apm_evaluate(const apm_dataset* ds, const double* beta, size_t p, int win_rates,
                                const char* scatter_csv, apm_pearson* out);

APM_API apm_status apm_report_create(const apm_dataset* ds, const char* model, const double* ratings,
                                     size_t p, int l1_active, const apm_ratings* rating2,
                                     uint64_t seed, apm_report** out);
APM_API void apm_report_free(apm_report* report);
/* CSV player_id,model,rating,model_rank,pm,pm_rank,rating2_rank,excluded_by_l1 */
APM_API apm_status apm_report_write(const apm_report* const* reports, size_t n, const char* path);
/* Top-k by plus/minus rank, one rating/rank column pair per report. */
APM_API apm_status apm_report_write_comparison(const apm_report* const* reports, size_t n, size_t k,
                                               const char* path);
/* CSV model,r,t,df,p_value */
APM_API apm_status apm_write_pearson_report(const char* const* models, const apm_pearson* tests,
                                            size_t n, const char* path);

/* ---- synthetic data --------------------------------------------------- */

typedef struct apm_synth_options {
  int n_players;
  int n_matches;
  double strength_sd;
  double noise_sd;
  int allow_draws;
  uint64_t seed;
} apm_synth_options;

APM_API void apm_synth_options_init(apm_synth_options* options);
APM_API apm_status apm_synth_generate(const apm_synth_options* options, apm_synth** out);
APM_API void apm_synth_free(apm_synth* synth);
/* Borrowed; valid while `synth` lives. */
APM_API const apm_matches* apm_synth_matches(const apm_synth* synth);
APM_API apm_status apm_synth_truth(const apm_synth* synth, double* out, size_t capacity);
/* CSV player_id,true_strength */
APM_API apm_status apm_synth_write_truth(const apm_synth* synth, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* APM_APM_H */

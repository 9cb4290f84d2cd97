// apm: adjusted plus/minus ratings from match appearance data.
//
//   apm pm    --matches M --rosters R [--min-matches N] --out DIR
//   apm fit   --matches M --rosters R [--ratings RT] --model ridge,logit-enet,... --out DIR
//   apm synth [--n-players P --n-matches N ...] --out DIR
//
// Exit status: 0 success, 1 usage error, 2 data validation error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apm/apm.h"
#include "run_config.hpp"

namespace fs = std::filesystem;
using apm::cli::ConfigError;
using apm::cli::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct ApiFailure {
  apm_status status;
  std::string message;
};

void check(apm_status status) {
  if (status != APM_OK) throw ApiFailure{status, apm_last_error()};
}

int exit_code_for(apm_status status) {
  switch (status) {
    case APM_E_INVALID_ARGUMENT: return kExitUsage;
    case APM_E_NUMERICAL:
    case APM_E_INTERNAL: return kExitNumerical;
    default: return kExitData;
  }
}

template <auto Free>
struct Deleter {
  template <typename T>
  void operator()(T* p) const noexcept {
    Free(p);
  }
};

using MatchesPtr = std::unique_ptr<apm_matches, Deleter<apm_matches_free>>;
using DatasetPtr = std::unique_ptr<apm_dataset, Deleter<apm_dataset_free>>;
using RatingsPtr = std::unique_ptr<apm_ratings, Deleter<apm_ratings_free>>;
using FitPtr = std::unique_ptr<apm_fit, Deleter<apm_fit_free>>;
using PosteriorPtr = std::unique_ptr<apm_posterior, Deleter<apm_posterior_free>>;
using CvPtr = std::unique_ptr<apm_cv, Deleter<apm_cv_free>>;
using ReportPtr = std::unique_ptr<apm_report, Deleter<apm_report_free>>;
using SynthPtr = std::unique_ptr<apm_synth, Deleter<apm_synth_free>>;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out) / name).string();
}

void require_input(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required ") + flag);
}

DatasetPtr load_filtered(const RunConfig& cfg) {
  require_input(cfg.matches, "--matches");
  require_input(cfg.rosters, "--rosters");
  apm_matches* raw_matches = nullptr;
  check(apm_matches_load(cfg.matches.c_str(), cfg.rosters.c_str(), &raw_matches));
  MatchesPtr matches(raw_matches);
  for (size_t k = 0; k < apm_matches_warning_count(matches.get()); ++k) {
    std::cerr << "warning: " << apm_matches_warning(matches.get(), k) << '\n';
  }
  apm_dataset* raw = nullptr;
  check(apm_dataset_build(matches.get(), &raw));
  DatasetPtr full(raw);
  apm_dataset* filtered = nullptr;
  check(apm_dataset_filter_min_matches(full.get(), cfg.min_matches, &filtered));
  return DatasetPtr(filtered);
}

void prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw ApiFailure{APM_E_IO, "cannot create output directory " + cfg.out};
}

int cmd_pm(const RunConfig& cfg) {
  auto ds = load_filtered(cfg);
  prepare_out(cfg);
  check(apm_dataset_write_plus_minus(ds.get(), path_in(cfg, "plus_minus.csv").c_str()));
  cfg.save(path_in(cfg, "config.txt"));
  std::cout << "plus/minus for " << apm_dataset_players(ds.get()) << " players over "
            << apm_dataset_rows(ds.get()) << " matches\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg) {
  apm_synth_options opts;
  apm_synth_options_init(&opts);
  opts.n_players = cfg.n_players;
  opts.n_matches = cfg.n_matches;
  opts.strength_sd = cfg.strength_sd;
  opts.noise_sd = cfg.noise_sd;
  opts.allow_draws = cfg.allow_draws ? 1 : 0;
  opts.seed = apm_derive_seed(cfg.seed, "synth");
  apm_synth* raw = nullptr;
  check(apm_synth_generate(&opts, &raw));
  SynthPtr synth(raw);
  prepare_out(cfg);
  check(apm_matches_write(apm_synth_matches(synth.get()), path_in(cfg, "matches.csv").c_str(),
                          path_in(cfg, "rosters.csv").c_str()));
  check(apm_synth_write_truth(synth.get(), path_in(cfg, "truth.csv").c_str()));
  cfg.save(path_in(cfg, "config.txt"));
  std::cout << "wrote " << cfg.n_matches << " matches for " << cfg.n_players << " players\n";
  return kExitOk;
}

bool is_logistic(apm_model m) {
  return m == APM_MODEL_LOGIT || m == APM_MODEL_LOGIT_RIDGE || m == APM_MODEL_LOGIT_ENET;
}

bool is_bayes(apm_model m) { return m == APM_MODEL_BAYES || m == APM_MODEL_BAYES_HIER; }

bool is_penalized(apm_model m) {
  return m == APM_MODEL_RIDGE || m == APM_MODEL_ENET || m == APM_MODEL_LOGIT_RIDGE ||
         m == APM_MODEL_LOGIT_ENET;
}

bool is_ridge(apm_model m) { return m == APM_MODEL_RIDGE || m == APM_MODEL_LOGIT_RIDGE; }

struct ModelRun {
  std::string name;
  apm_model model = APM_MODEL_OLS;
  std::vector<double> beta;
  bool l1_active = false;
  std::vector<std::pair<std::string, std::string>> summary;
};

std::vector<double> coefficients(const apm_fit* fit) {
  std::vector<double> beta(apm_fit_coefficient_count(fit));
  check(apm_fit_coefficients(fit, beta.data(), beta.size()));
  return beta;
}

ModelRun run_point_model(const RunConfig& cfg, apm_model model, const apm_dataset* train) {
  ModelRun run;
  run.model = model;
  run.name = apm_model_name(model);

  double alpha = is_ridge(model) ? 0.0 : cfg.alpha.value_or(1.0);
  double lambda = cfg.lambda.value_or(0.0);
  const bool needs_cv = is_penalized(model) &&
                        (cfg.cv || !cfg.lambda || (!is_ridge(model) && !cfg.alpha));
  if (needs_cv) {
    apm_cv_options opts;
    apm_cv_options_init(&opts, is_logistic(model) ? APM_FAMILY_BINOMIAL : APM_FAMILY_GAUSSIAN);
    std::vector<double> alphas;
    if (is_ridge(model)) {
      alphas = {0.0};
    } else if (cfg.alpha) {
      alphas = {*cfg.alpha};
    }
    if (!alphas.empty()) {
      opts.alphas = alphas.data();
      opts.n_alphas = alphas.size();
    } else {
      opts.n_alphas = static_cast<size_t>(cfg.n_alphas);
    }
    opts.n_lambdas = cfg.n_lambdas;
    opts.folds = cfg.folds;
    opts.seed = apm_derive_seed(cfg.seed, ("cv." + run.name).c_str());
    opts.tol = cfg.cv_tol;
    opts.threads = cfg.threads;
    apm_cv* raw = nullptr;
    check(apm_cv_run(train, &opts, &raw));
    CvPtr cv(raw);
    for (size_t k = 0; k < apm_cv_warning_count(cv.get()); ++k) {
      std::cerr << "warning: " << run.name << ": " << apm_cv_warning(cv.get(), k) << '\n';
    }
    double best_error = 0.0;
    check(apm_cv_best(cv.get(), &alpha, &lambda, &best_error));
    check(apm_cv_write_surface(cv.get(), path_in(cfg, "cv_" + run.name + ".csv").c_str()));
    run.summary.push_back({"cv_folds", std::to_string(cfg.folds)});
    run.summary.push_back({"cv_best_alpha", fmt(alpha)});
    run.summary.push_back({"cv_best_lambda", fmt(lambda)});
    run.summary.push_back({"cv_best_error", fmt(best_error)});
  }

  apm_fit_options opts;
  apm_fit_options_init(&opts, model);
  opts.alpha = alpha;
  opts.lambda = lambda;
  opts.tol = cfg.tol;
  apm_fit* raw = nullptr;
  check(apm_fit_create(train, &opts, &raw));
  FitPtr fit(raw);
  apm_fit_info info;
  check(apm_fit_get_info(fit.get(), &info));
  run.beta = coefficients(fit.get());
  run.l1_active = info.alpha > 0.0 && info.lambda > 0.0;
  run.summary.insert(run.summary.begin(),
                     {{"alpha", fmt(info.alpha)},
                      {"lambda", fmt(info.lambda)},
                      {"iterations", std::to_string(info.iterations)},
                      {"converged", info.converged ? "true" : "false"},
                      {"objective", fmt(info.objective)},
                      {"optimality_residual", fmt(info.residual)}});
  if (is_logistic(model)) run.summary.push_back({"separation", info.separation ? "true" : "false"});
  if (!info.converged) std::cerr << "warning: " << run.name << " did not converge\n";
  if (info.separation) std::cerr << "warning: " << run.name << ": separation detected\n";
  return run;
}

ModelRun run_bayes_model(const RunConfig& cfg, apm_model model, const apm_dataset* train,
                         const apm_ratings* ratings) {
  ModelRun run;
  run.model = model;
  run.name = apm_model_name(model);
  apm_bayes_options opts;
  apm_bayes_options_init(&opts, model);
  opts.sigma2 = cfg.sigma2.value_or(0.0);
  opts.tau2 = cfg.tau2;
  opts.chains = cfg.chains;
  opts.warmup = cfg.warmup;
  opts.samples = cfg.samples;
  opts.seed = apm_derive_seed(cfg.seed, ("bayes." + run.name).c_str());
  double sigma2 = opts.sigma2;
  if (!(sigma2 > 0.0)) check(apm_dataset_response_variance(train, &sigma2));
  opts.sigma2 = sigma2;
  apm_posterior* raw = nullptr;
  check(apm_posterior_create(train, ratings, &opts, &raw));
  PosteriorPtr post(raw);
  run.beta.resize(apm_posterior_count(post.get()));
  check(apm_posterior_summary(post.get(), 0, run.beta.data(), run.beta.size()));
  check(apm_posterior_write_summary(post.get(), path_in(cfg, "posterior_" + run.name + ".csv").c_str()));
  if (cfg.dump_chains) {
    check(apm_posterior_write_chains(post.get(), path_in(cfg, "chains_" + run.name + ".csv").c_str()));
  }
  run.summary = {{"sigma2", fmt(sigma2)},
                 {"tau2", fmt(cfg.tau2)},
                 {"chains", std::to_string(cfg.chains)},
                 {"warmup", std::to_string(cfg.warmup)},
                 {"samples", std::to_string(cfg.samples)}};
  if (cfg.chains >= 2) {
    apm_diagnostics diag;
    check(apm_posterior_get_diagnostics(post.get(), &diag));
    run.summary.push_back({"max_rhat", fmt(diag.max_rhat)});
    run.summary.push_back({"min_ess", fmt(diag.min_ess)});
    run.summary.push_back({"diagnostics_pass", diag.pass ? "true" : "false"});
    if (!diag.pass) std::cerr << "warning: " << run.name << ": chains failed the split-Rhat check\n";
  }
  return run;
}

// Returns NaN statistics when the test is undefined (e.g. all predictions equal).
apm_pearson evaluate_split(const RunConfig& cfg, const ModelRun& run, const apm_dataset* split,
                           const char* label) {
  const std::string scatter = path_in(cfg, "scatter_" + run.name + "_" + label + ".csv");
  apm_pearson test{NAN, NAN, 0, NAN};
  const apm_status status = apm_evaluate(split, run.beta.data(), run.beta.size(),
                                         is_logistic(run.model) ? 1 : 0, scatter.c_str(), &test);
  if (status == APM_E_ZERO_VARIANCE || status == APM_E_TOO_FEW_POINTS) {
    std::cerr << "warning: " << run.name << " (" << label << "): Pearson test undefined: "
              << apm_last_error() << '\n';
    return apm_pearson{NAN, NAN, 0, NAN};
  }
  check(status);
  return test;
}

void write_summary(const RunConfig& cfg, const ModelRun& run) {
  std::string text = "model=" + run.name + "\n";
  for (const auto& [k, v] : run.summary) text += k + "=" + v + "\n";
  const auto file = path_in(cfg, "fit_" + run.name + ".txt");
  std::FILE* f = std::fopen(file.c_str(), "wb");
  if (!f) throw ApiFailure{APM_E_IO, "cannot write " + file};
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

int cmd_fit(const RunConfig& cfg) {
  std::vector<apm_model> models;
  for (const auto& name : cfg.models) {
    apm_model m;
    if (apm_model_parse(name.c_str(), &m) != APM_OK) throw ConfigError("unknown model '" + name + "'");
    models.push_back(m);
  }
  RatingsPtr ratings;
  if (!cfg.ratings.empty()) {
    apm_ratings* raw = nullptr;
    check(apm_ratings_load(cfg.ratings.c_str(), &raw));
    ratings.reset(raw);
  }
  for (const auto m : models) {
    if (is_bayes(m) && !ratings) {
      throw ApiFailure{APM_E_MISSING_PRIOR, std::string(apm_model_name(m)) + " needs --ratings"};
    }
  }

  auto ds = load_filtered(cfg);
  for (const auto m : models) {
    if (is_bayes(m)) check(apm_ratings_check_coverage(ratings.get(), ds.get()));
  }
  apm_dataset* raw_train = nullptr;
  apm_dataset* raw_test = nullptr;
  check(apm_dataset_split(ds.get(), cfg.train_fraction, apm_derive_seed(cfg.seed, "split"),
                          &raw_train, &raw_test));
  DatasetPtr train(raw_train);
  DatasetPtr test(raw_test);
  prepare_out(cfg);

  std::vector<ReportPtr> reports;
  std::vector<std::string> names;
  std::vector<apm_pearson> tests;
  for (const auto m : models) {
    ModelRun run = is_bayes(m) ? run_bayes_model(cfg, m, train.get(), ratings.get())
                               : run_point_model(cfg, m, train.get());
    const apm_pearson train_test = evaluate_split(cfg, run, train.get(), "train");
    const apm_pearson held_out = evaluate_split(cfg, run, test.get(), "test");
    run.summary.push_back({"train_r", fmt(train_test.r)});
    run.summary.push_back({"train_p_value", fmt(train_test.p_value)});
    run.summary.push_back({"test_r", fmt(held_out.r)});
    run.summary.push_back({"test_p_value", fmt(held_out.p_value)});

    apm_report* raw = nullptr;
    check(apm_report_create(ds.get(), run.name.c_str(), run.beta.data(), run.beta.size(),
                            run.l1_active ? 1 : 0, ratings.get(), cfg.seed, &raw));
    ReportPtr report(raw);
    const apm_report* single[] = {report.get()};
    check(apm_report_write(single, 1, path_in(cfg, "ratings_" + run.name + ".csv").c_str()));
    write_summary(cfg, run);
    reports.push_back(std::move(report));
    names.push_back(run.name);
    tests.push_back(held_out);
    std::cout << run.name << ": test r=" << fmt(held_out.r) << " p=" << fmt(held_out.p_value) << '\n';
  }

  std::vector<const apm_report*> all;
  for (const auto& r : reports) all.push_back(r.get());
  check(apm_report_write(all.data(), all.size(), path_in(cfg, "ratings.csv").c_str()));
  check(apm_report_write_comparison(all.data(), all.size(), static_cast<size_t>(std::max(cfg.top_k, 0)),
                                    path_in(cfg, "comparison.csv").c_str()));
  std::vector<const char*> name_ptrs;
  for (const auto& n : names) name_ptrs.push_back(n.c_str());
  check(apm_write_pearson_report(name_ptrs.data(), tests.data(), tests.size(),
                                 path_in(cfg, "pearson.csv").c_str()));
  cfg.save(path_in(cfg, "config.txt"));
  return kExitOk;
}

struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
};

void add_common(CLI::App* cmd, FlagSet& flags, std::string& config_file) {
  cmd->add_option("--config", config_file, "key=value config file (flags override it)");
  for (const char* key : {"out", "seed"}) {
    cmd->add_option(std::string("--") + key, flags.values[key]);
  }
}

void add_data(CLI::App* cmd, FlagSet& flags) {
  for (const char* key : {"matches", "rosters", "min-matches"}) {
    cmd->add_option(std::string("--") + key, flags.values[key]);
  }
}

RunConfig resolve(const CLI::App* cmd, const FlagSet& flags, const std::string& config_file) {
  RunConfig cfg;
  if (!config_file.empty()) cfg.merge_file(config_file);
  for (const auto& [key, value] : flags.values) {
    if (cmd->get_option("--" + key)->count() > 0) cfg.set(key, value);
  }
  for (const auto& [key, on] : flags.switches) {
    if (cmd->get_option("--" + key)->count() > 0) cfg.set(key, on ? "true" : "false");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjusted plus/minus player ratings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(apm_version()));

  std::string pm_config, fit_config, synth_config;
  FlagSet pm_flags, fit_flags, synth_flags;

  auto* pm = app.add_subcommand("pm", "Write raw plus/minus values");
  add_common(pm, pm_flags, pm_config);
  add_data(pm, pm_flags);

  auto* fit = app.add_subcommand("fit", "Fit rating models and evaluate them on a held-out split");
  add_common(fit, fit_flags, fit_config);
  add_data(fit, fit_flags);
  for (const char* key : {"ratings", "train-fraction", "model", "alpha", "lambda", "folds",
                          "n-alphas", "n-lambdas", "cv-tol", "tol", "threads", "top-k", "sigma2",
                          "tau2", "chains", "warmup", "samples"}) {
    fit->add_option(std::string("--") + key, fit_flags.values[key]);
  }
  fit->add_flag("--cv", fit_flags.switches["cv"], "Select (alpha, lambda) by cross-validation");
  fit->add_flag("--dump-chains", fit_flags.switches["dump-chains"], "Write Gibbs chains");

  auto* synth = app.add_subcommand("synth", "Generate synthetic matches with planted strengths");
  add_common(synth, synth_flags, synth_config);
  for (const char* key : {"n-players", "n-matches", "strength-sd", "noise-sd"}) {
    synth->add_option(std::string("--") + key, synth_flags.values[key]);
  }
  synth->add_option("--allow-draws", synth_flags.values["allow-draws"], "true or false");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pm->parsed()) return cmd_pm(resolve(pm, pm_flags, pm_config));
    if (fit->parsed()) return cmd_fit(resolve(fit, fit_flags, fit_config));
    if (synth->parsed()) return cmd_synth(resolve(synth, synth_flags, synth_config));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ApiFailure& e) {
    std::cerr << "error: " << apm_status_name(e.status) << ": " << e.message << '\n';
    return exit_code_for(e.status);
  }
  return kExitUsage;
}

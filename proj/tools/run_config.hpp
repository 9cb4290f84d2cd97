#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apm::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a run depends on. Serialized as flat `key=value` lines; a run
// records its resolved config next to its outputs so it can be replayed.
struct RunConfig {
  std::string matches;
  std::string rosters;
  std::string ratings;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t min_matches = 50;
  double train_fraction = 0.8;

  std::vector<std::string> models{"ridge"};
  std::optional<double> alpha;
  std::optional<double> lambda;
  bool cv = false;
  int folds = 10;
  int n_alphas = 100;
  int n_lambdas = 100;
  double cv_tol = 1e-6;
  double tol = 1e-7;
  int threads = 0;
  int top_k = 10;

  std::optional<double> sigma2;
  double tau2 = 1.0;
  int chains = 4;
  int warmup = 1000;
  int samples = 2000;
  bool dump_chains = false;

  int n_players = 50;
  int n_matches = 2000;
  double strength_sd = 0.5;
  double noise_sd = 4.0;
  bool allow_draws = true;

  // Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string serialize() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
  void merge_file(const std::filesystem::path& file);
};

std::vector<std::string> config_keys();

}  // namespace apm::cli

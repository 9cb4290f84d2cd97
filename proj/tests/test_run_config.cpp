#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "run_config.hpp"

using apm::cli::ConfigError;
using apm::cli::RunConfig;

TEST_CASE("defaults") {
  const RunConfig cfg;
  CHECK(cfg.min_matches == 50);
  CHECK(cfg.train_fraction == 0.8);
  CHECK(cfg.folds == 10);
  CHECK_FALSE(cfg.alpha.has_value());
  CHECK_FALSE(cfg.lambda.has_value());
  CHECK(cfg.models == std::vector<std::string>{"ridge"});
}

TEST_CASE("serialize and parse round trip") {
  RunConfig cfg;
  cfg.matches = "data/m.csv";
  cfg.rosters = "data/r.csv";
  cfg.seed = 18446744073709551615ull;
  cfg.min_matches = 0;
  cfg.train_fraction = 0.1 + 0.2;
  cfg.models = {"ridge", "logit-enet", "bayes-hier"};
  cfg.alpha = 1.0 / 3.0;
  cfg.lambda = 1e-300;
  cfg.cv = true;
  cfg.sigma2 = 2.5;
  cfg.allow_draws = false;
  const auto text = cfg.serialize();
  const auto back = RunConfig::parse(text);
  CHECK(back.serialize() == text);
  CHECK(back.seed == cfg.seed);
  CHECK(back.train_fraction == cfg.train_fraction);
  CHECK(*back.alpha == *cfg.alpha);
  CHECK(*back.lambda == *cfg.lambda);
  CHECK(back.models == cfg.models);
  CHECK(back.cv);
  CHECK_FALSE(back.allow_draws);
  CHECK_FALSE(RunConfig::parse(RunConfig{}.serialize()).alpha.has_value());
}

TEST_CASE("every key appears once in the serialized form") {
  const auto keys = apm::cli::config_keys();
  CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
  const auto text = "\n" + RunConfig{}.serialize();
  for (const auto& k : keys) CHECK(text.find("\n" + k + "=") != std::string::npos);
}

TEST_CASE("parsing details") {
  const auto cfg = RunConfig::parse("# comment\n\n min-matches = 7 \r\nmodel=ridge, enet\nlambda=\ncv=yes\n");
  CHECK(cfg.min_matches == 7);
  CHECK(cfg.models == std::vector<std::string>{"ridge", "enet"});
  CHECK_FALSE(cfg.lambda.has_value());
  CHECK(cfg.cv);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(RunConfig::parse("colour=blue\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed=-1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("folds=3.5\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("alpha=abc\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("cv=maybe\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("model=\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("file save, load and merge") {
  const auto dir = std::filesystem::temp_directory_path() / "apm_test_run_config";
  std::filesystem::create_directories(dir);
  RunConfig cfg;
  cfg.seed = 77;
  cfg.tau2 = 0.25;
  cfg.save(dir / "config.txt");
  CHECK(RunConfig::load(dir / "config.txt").serialize() == cfg.serialize());

  std::ofstream(dir / "partial.txt", std::ios::binary) << "\xEF\xBB\xBF" << "folds=5\n";
  RunConfig merged = cfg;
  merged.merge_file(dir / "partial.txt");
  CHECK(merged.folds == 5);
  CHECK(merged.seed == 77);
  std::filesystem::remove_all(dir);
}

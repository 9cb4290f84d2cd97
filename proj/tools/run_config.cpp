#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace apm::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  T out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (value.empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);
  auto opt_double = [&](std::optional<double>& slot) {
    if (value.empty()) {
      slot.reset();
    } else {
      slot = parse_value<double>(key, value);
    }
  };

  if (key == "matches") matches = value;
  else if (key == "rosters") rosters = value;
  else if (key == "ratings") ratings = value;
  else if (key == "out") out = value;
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, value);
  else if (key == "min_matches") min_matches = parse_value<std::size_t>(key, value);
  else if (key == "train_fraction") train_fraction = parse_value<double>(key, value);
  else if (key == "model" || key == "models") {
    models = split_list(value);
    if (models.empty()) throw ConfigError("no model given");
  }
  else if (key == "alpha") opt_double(alpha);
  else if (key == "lambda") opt_double(lambda);
  else if (key == "cv") cv = parse_bool(key, value);
  else if (key == "folds") folds = parse_value<int>(key, value);
  else if (key == "n_alphas") n_alphas = parse_value<int>(key, value);
  else if (key == "n_lambdas") n_lambdas = parse_value<int>(key, value);
  else if (key == "cv_tol") cv_tol = parse_value<double>(key, value);
  else if (key == "tol") tol = parse_value<double>(key, value);
  else if (key == "threads") threads = parse_value<int>(key, value);
  else if (key == "top_k") top_k = parse_value<int>(key, value);
  else if (key == "sigma2") opt_double(sigma2);
  else if (key == "tau2") tau2 = parse_value<double>(key, value);
  else if (key == "chains") chains = parse_value<int>(key, value);
  else if (key == "warmup") warmup = parse_value<int>(key, value);
  else if (key == "samples") samples = parse_value<int>(key, value);
  else if (key == "dump_chains") dump_chains = parse_bool(key, value);
  else if (key == "n_players") n_players = parse_value<int>(key, value);
  else if (key == "n_matches") n_matches = parse_value<int>(key, value);
  else if (key == "strength_sd") strength_sd = parse_value<double>(key, value);
  else if (key == "noise_sd") noise_sd = parse_value<double>(key, value);
  else if (key == "allow_draws") allow_draws = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + raw_key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  std::string model_list;
  for (const auto& m : models) model_list += (model_list.empty() ? "" : ",") + m;
  return {
      {"matches", matches},
      {"rosters", rosters},
      {"ratings", ratings},
      {"out", out},
      {"seed", std::to_string(seed)},
      {"min_matches", std::to_string(min_matches)},
      {"train_fraction", format_double(train_fraction)},
      {"models", model_list},
      {"alpha", opt(alpha)},
      {"lambda", opt(lambda)},
      {"cv", flag(cv)},
      {"folds", std::to_string(folds)},
      {"n_alphas", std::to_string(n_alphas)},
      {"n_lambdas", std::to_string(n_lambdas)},
      {"cv_tol", format_double(cv_tol)},
      {"tol", format_double(tol)},
      {"threads", std::to_string(threads)},
      {"top_k", std::to_string(top_k)},
      {"sigma2", opt(sigma2)},
      {"tau2", format_double(tau2)},
      {"chains", std::to_string(chains)},
      {"warmup", std::to_string(warmup)},
      {"samples", std::to_string(samples)},
      {"dump_chains", flag(dump_chains)},
      {"n_players", std::to_string(n_players)},
      {"n_matches", std::to_string(n_matches)},
      {"strength_sd", format_double(strength_sd)},
      {"noise_sd", format_double(noise_sd)},
      {"allow_draws", flag(allow_draws)},
  };
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : RunConfig{}.entries()) keys.push_back(k);
  return keys;
}

std::string RunConfig::serialize() const {
  std::string text;
  for (const auto& [k, v] : entries()) text += k + "=" + v + "\n";
  return text;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

void RunConfig::merge_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  RunConfig cfg;
  cfg.merge_file(file);
  return cfg;
}

void RunConfig::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << serialize();
  if (!out) throw ConfigError("error writing " + file.string());
}

}  // namespace apm::cli

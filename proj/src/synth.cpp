#include "apm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "apm/error.hpp"
#include "apm/rng.hpp"
#include "csv.hpp"

namespace apm {

void validate(const SynthConfig& config) {
  if (config.n_players < static_cast<int>(2 * kTeamSize)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic data needs at least 10 players");
  }
  if (config.n_matches < 1) throw Error(ErrorCode::InvalidArgument, "n_matches must be positive");
  if (!(config.strength_sd >= 0.0) || !(config.noise_sd >= 0.0) ||
      !std::isfinite(config.strength_sd) || !std::isfinite(config.noise_sd)) {
    throw Error(ErrorCode::InvalidArgument, "standard deviations must be non-negative");
  }
}

std::vector<PlayerId> synth_players(int n_players) {
  const int width = std::max(3, static_cast<int>(std::to_string(n_players).size()));
  std::vector<PlayerId> out;
  out.reserve(static_cast<std::size_t>(n_players));
  for (int j = 1; j <= n_players; ++j) {
    auto digits = std::to_string(j);
    out.push_back(PlayerId{"p" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits});
  }
  return out;
}

SynthData generate(const SynthConfig& config) {
  validate(config);
  auto rng = make_rng(config.seed, "synth.strengths");
  std::normal_distribution<double> normal;
  Eigen::VectorXd strengths(config.n_players);
  for (int j = 0; j < config.n_players; ++j) strengths[j] = config.strength_sd * normal(rng);
  return generate_matches(config, strengths);
}

SynthData generate_matches(const SynthConfig& config, const Eigen::VectorXd& strengths) {
  validate(config);
  if (strengths.size() != config.n_players) {
    throw Error(ErrorCode::InvalidArgument, "strength vector does not match n_players");
  }
  SynthData data;
  data.players = synth_players(config.n_players);
  data.strengths = strengths;
  data.records.reserve(static_cast<std::size_t>(config.n_matches));

  auto rng = make_rng(config.seed, "synth.matches");
  std::normal_distribution<double> normal;
  std::vector<std::size_t> order(static_cast<std::size_t>(config.n_players));
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int m = 0; m < config.n_matches; ++m) {
    // partial Fisher-Yates: the first ten slots become the two rosters
    for (std::size_t k = 0; k < 2 * kTeamSize; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    MatchRecord r;
    r.map_id = m + 1;
    double margin = 0.0;
    for (std::size_t k = 0; k < kTeamSize; ++k) {
      r.team1[k] = data.players[order[k]];
      r.team2[k] = data.players[order[k + kTeamSize]];
      margin += strengths[static_cast<Eigen::Index>(order[k])] -
                strengths[static_cast<Eigen::Index>(order[k + kTeamSize])];
    }
    margin += config.noise_sd * normal(rng);

    const double rounded = std::round(margin);
    if (std::abs(rounded) <= 1.0) {
      if (config.allow_draws && rounded == 0.0) {
        r.score1 = r.score2 = 15;
      } else {
        bool team1_wins = margin > 0.0;
        if (margin == 0.0) team1_wins = std::bernoulli_distribution(0.5)(rng);
        r.score1 = team1_wins ? 19 : 15;
        r.score2 = team1_wins ? 15 : 19;
      }
    } else {
      const int loser = static_cast<int>(std::clamp(std::round(15.0 - std::abs(margin)), 0.0, 14.0));
      r.score1 = margin > 0.0 ? 16 : loser;
      r.score2 = margin > 0.0 ? loser : 16;
    }
    data.records.push_back(std::move(r));
  }
  return data;
}

void write_truth(const SynthData& data, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "player_id,true_strength\n";
  for (std::size_t j = 0; j < data.players.size(); ++j) {
    out << data.players[j].token << ',' << csv::format(data.strengths[static_cast<Eigen::Index>(j)]) << '\n';
  }
  csv::close_out(out, file);
}

}  // namespace apm

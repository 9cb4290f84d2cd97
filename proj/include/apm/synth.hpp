#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "apm/data.hpp"

namespace apm {

struct SynthConfig {
  int n_players = 50;
  int n_matches = 2000;
  double strength_sd = 0.5;
  double noise_sd = 4.0;
  bool allow_draws = true;
  std::uint64_t seed = 0;
};

struct SynthData {
  std::vector<PlayerId> players;
  Eigen::VectorXd strengths;
  std::vector<MatchRecord> records;
};

void validate(const SynthConfig& config);

// Planted strengths ~ N(0, strength_sd^2); see generate_matches for scores.
SynthData generate(const SynthConfig& config);

// Each match pits two disjoint random rosters; the latent margin
// m = sum(team 1) - sum(team 2) + N(0, noise_sd^2) becomes a score: the winner
// takes 16 and the loser clamp(round(15 - |m|), 0, 14), except that
// |round(m)| <= 1 goes to overtime (19-15) or, with draws allowed and
// round(m) = 0, ends 15-15.
SynthData generate_matches(const SynthConfig& config, const Eigen::VectorXd& strengths);

std::vector<PlayerId> synth_players(int n_players);

// player_id,true_strength
void write_truth(const SynthData& data, const std::filesystem::path& file);

}  // namespace apm

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apm/data.hpp"

namespace apm {

// 1-based ranks in descending rating order. Equal ratings are ordered by a
// seeded random permutation.
std::vector<int> rank_players(std::span<const double> ratings, std::uint64_t seed);

// Mean over each player's matches of the signed fitted margin x_i'b; empty
// for players without appearances in `ds`.
std::vector<std::optional<double>> predicted_plus_minus(const Dataset& ds,
                                                        std::span<const double> beta);

struct WinRate {
  double predicted = 0.0;
  double actual = 0.0;
};

std::vector<std::optional<WinRate>> predicted_win_rate(const Dataset& ds,
                                                       std::span<const double> labels,
                                                       std::span<const double> beta);

struct PearsonTest {
  double r = 0.0;
  double t_stat = 0.0;
  int df = 0;
  double p_value = 1.0;  // two-sided
};

PearsonTest pearson_test(std::span<const double> x, std::span<const double> y);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

struct RatingRow {
  PlayerId player;
  double rating = 0.0;
  int model_rank = 0;
  double pm = 0.0;
  int pm_rank = 0;
  std::optional<int> rating2_rank;
  bool excluded_by_l1 = false;
};

struct RatingReport {
  std::string model;
  std::vector<RatingRow> rows;  // in the dataset's player order
};

// Ranks are drawn from labelled substreams of `seed`; PM and Rating2.0 ranks
// use model-independent labels so every report agrees on them. Rating2.0 ranks
// cover the players present in `rating2`.
RatingReport build_rating_report(const std::string& model, const PlusMinusTable& pm,
                                 std::span<const double> ratings, bool l1_active,
                                 const RatingTable* rating2, std::uint64_t seed);

struct ComparisonEntry {
  std::optional<double> rating;  // empty when the L1 penalty removed the player
  int rank = 0;
};

struct ComparisonRow {
  PlayerId player;
  double pm = 0.0;
  int pm_rank = 0;
  std::optional<int> rating2_rank;
  std::vector<ComparisonEntry> models;  // parallel to the reports argument
};

// Top-k players by PM rank, with each report's rating and rank.
std::vector<ComparisonRow> comparison_table(std::span<const RatingReport> reports, std::size_t k);

struct ScatterRow {
  PlayerId player;
  double truth = 0.0;
  double predicted = 0.0;
};

std::vector<ScatterRow> plus_minus_scatter(const Dataset& ds, std::span<const double> beta);
std::vector<ScatterRow> win_rate_scatter(const Dataset& ds, std::span<const double> labels,
                                         std::span<const double> beta);
PearsonTest scatter_test(std::span<const ScatterRow> rows);

// ratings: player_id,model,rating,model_rank,pm,pm_rank,rating2_rank,excluded_by_l1
void write_ratings(std::span<const RatingReport> reports, const std::filesystem::path& file);
// header `player_id,true_pm,predicted_pm` or `player_id,actual_rate,predicted_rate`
void write_scatter(std::span<const ScatterRow> rows, bool win_rates,
                   const std::filesystem::path& file);
struct NamedTest {
  std::string model;
  PearsonTest test;
};
// model,r,t,df,p_value
void write_pearson_report(std::span<const NamedTest> tests, const std::filesystem::path& file);
void write_comparison(std::span<const ComparisonRow> rows, std::span<const RatingReport> reports,
                      const std::filesystem::path& file);

}  // namespace apm

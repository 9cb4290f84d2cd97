#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace apm {

// A player handle as it appears in the source data; compared byte for byte.
struct PlayerId {
  std::string token;

  friend bool operator==(const PlayerId&, const PlayerId&) = default;
  friend auto operator<=>(const PlayerId&, const PlayerId&) = default;
};

struct PlayerIdHash {
  std::size_t operator()(const PlayerId& id) const noexcept {
    return std::hash<std::string>{}(id.token);
  }
};

inline constexpr std::size_t kTeamSize = 5;

using Roster = std::array<PlayerId, kTeamSize>;

// One played map: two disjoint five-player rosters and the rounds won by each.
struct MatchRecord {
  std::int64_t map_id = 0;
  Roster team1;
  Roster team2;
  int score1 = 0;
  int score2 = 0;

  int result_diff() const noexcept { return score1 - score2; }
};

// Non-zero entry of the ternary appearance matrix.
struct Entry {
  std::size_t index = 0;  // column in a row view, row in a column view
  int sign = 0;           // +1 team 1, -1 team 2
};

// Response vector plus the sparse {-1, 0, +1} appearance matrix, stored both
// row- and column-major. Immutable once built.
class Dataset {
 public:
  Dataset() = default;

  // rows[i] lists the (player column, side) entries of match i.
  Dataset(std::vector<PlayerId> players, std::vector<std::int64_t> map_ids,
          std::vector<double> y, const std::vector<std::vector<Entry>>& rows);

  std::size_t n_rows() const noexcept { return y_.size(); }
  std::size_t n_players() const noexcept { return players_.size(); }
  std::size_t nnz() const noexcept { return row_entries_.size(); }

  const std::vector<PlayerId>& players() const noexcept { return players_; }
  const std::vector<std::int64_t>& map_ids() const noexcept { return map_ids_; }
  std::span<const double> y() const noexcept { return y_; }
  Eigen::VectorXd response() const;

  std::span<const Entry> row(std::size_t i) const;
  std::span<const Entry> column(std::size_t j) const;
  std::size_t appearances(std::size_t j) const { return column(j).size(); }

  std::optional<std::size_t> index_of(const PlayerId& id) const;

  // x_i' beta
  double row_dot(std::size_t i, std::span<const double> beta) const;
  Eigen::VectorXd predict(std::span<const double> beta) const;
  Eigen::VectorXd predict(const Eigen::VectorXd& beta) const;
  // X' v
  Eigen::VectorXd transpose_times(std::span<const double> v) const;
  // X' X, dense p x p
  Eigen::MatrixXd gram() const;
  Eigen::MatrixXd dense() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset with_response(std::vector<double> y) const;

 private:
  std::vector<PlayerId> players_;
  std::unordered_map<PlayerId, std::size_t, PlayerIdHash> lookup_;
  std::vector<std::int64_t> map_ids_;
  std::vector<double> y_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> row_entries_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<Entry> col_entries_;
};

struct PlusMinusTable {
  std::vector<PlayerId> players;
  std::vector<std::size_t> matches_played;
  std::vector<double> pm;
};

struct RatingPrior {
  std::vector<PlayerId> players;
  std::vector<double> avg_rating2;
  std::vector<double> s_rating2;  // z-scores over the listed players

  Eigen::VectorXd standardized() const;
};

struct BinaryDataset {
  Dataset data;
  std::vector<double> labels;  // 1 when team 1 won, else 0
};

// Validated records from matches.csv / rosters.csv. Result differences of
// +/-1 are accepted but reported through `warnings` when given.
std::vector<MatchRecord> load_matches(const std::filesystem::path& matches_file,
                                      const std::filesystem::path& rosters_file,
                                      std::vector<std::string>* warnings = nullptr);

void validate_record(const MatchRecord& record);
std::vector<std::string> result_diff_warnings(std::span<const MatchRecord> records);

void write_matches(std::span<const MatchRecord> records,
                   const std::filesystem::path& matches_file,
                   const std::filesystem::path& rosters_file);

// Players are indexed in order of first appearance.
Dataset build_dataset(std::span<const MatchRecord> records);

PlusMinusTable plus_minus(const Dataset& ds);
void write_plus_minus(const PlusMinusTable& table, const std::filesystem::path& file);

// Drops player columns with fewer than `min_matches` appearances; rows stay.
Dataset filter_min_matches(const Dataset& ds, std::size_t min_matches);

// Row-disjoint random partition; the training side gets round(fraction * n).
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

BinaryDataset binarize_for_logistic(const Dataset& ds);

using RatingTable = std::unordered_map<PlayerId, double, PlayerIdHash>;

// Raw `player_id,avg_rating2` rows, without coverage requirements.
RatingTable load_rating_table(const std::filesystem::path& ratings_file);

RatingPrior make_rating_prior(std::vector<PlayerId> players, std::vector<double> avg_rating2);
RatingPrior load_rating_prior(const std::filesystem::path& ratings_file,
                              std::span<const PlayerId> players);
RatingPrior restrict_rating_prior(const RatingTable& table, std::span<const PlayerId> players);

}  // namespace apm

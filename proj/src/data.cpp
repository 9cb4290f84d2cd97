#include "apm/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "apm/error.hpp"
#include "apm/rng.hpp"
#include "csv.hpp"

namespace apm {

Dataset::Dataset(std::vector<PlayerId> players, std::vector<std::int64_t> map_ids,
                 std::vector<double> y, const std::vector<std::vector<Entry>>& rows)
    : players_(std::move(players)), map_ids_(std::move(map_ids)), y_(std::move(y)) {
  if (y_.size() != rows.size() || map_ids_.size() != rows.size()) {
    throw Error(ErrorCode::InvalidArgument, "dataset: row count mismatch");
  }
  const std::size_t p = players_.size();
  lookup_.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (players_[j].token.empty()) throw Error(ErrorCode::InvalidArgument, "empty player id");
    if (!lookup_.emplace(players_[j], j).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate player id " + players_[j].token);
    }
  }

  std::vector<std::size_t> col_count(p, 0);
  std::vector<std::size_t> seen(p, static_cast<std::size_t>(-1));
  row_ptr_.reserve(rows.size() + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : rows[i]) {
      if (e.index >= p) throw Error(ErrorCode::InvalidArgument, "dataset: column out of range");
      if (e.sign != 1 && e.sign != -1) {
        throw Error(ErrorCode::InvalidArgument, "dataset: entries must be +1 or -1");
      }
      if (seen[e.index] == i) {
        throw Error(ErrorCode::InvalidArgument, "dataset: player listed twice in one row");
      }
      seen[e.index] = i;
      row_entries_.push_back(e);
      ++col_count[e.index];
    }
    row_ptr_.push_back(row_entries_.size());
  }

  col_ptr_.resize(p + 1, 0);
  for (std::size_t j = 0; j < p; ++j) col_ptr_[j + 1] = col_ptr_[j] + col_count[j];
  col_entries_.resize(row_entries_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : row(i)) col_entries_[fill[e.index]++] = Entry{i, e.sign};
  }
}

Eigen::VectorXd Dataset::response() const {
  return Eigen::Map<const Eigen::VectorXd>(y_.data(), static_cast<Eigen::Index>(y_.size()));
}

std::span<const Entry> Dataset::row(std::size_t i) const {
  return std::span<const Entry>(row_entries_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

std::span<const Entry> Dataset::column(std::size_t j) const {
  return std::span<const Entry>(col_entries_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
}

std::optional<std::size_t> Dataset::index_of(const PlayerId& id) const {
  const auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double Dataset::row_dot(std::size_t i, std::span<const double> beta) const {
  double s = 0.0;
  for (const Entry& e : row(i)) s += e.sign * beta[e.index];
  return s;
}

Eigen::VectorXd Dataset::predict(std::span<const double> beta) const {
  if (beta.size() != n_players()) throw Error(ErrorCode::InvalidArgument, "predict: size mismatch");
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_rows()));
  for (std::size_t i = 0; i < n_rows(); ++i) out[static_cast<Eigen::Index>(i)] = row_dot(i, beta);
  return out;
}

Eigen::VectorXd Dataset::predict(const Eigen::VectorXd& beta) const {
  return predict(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size())));
}

Eigen::VectorXd Dataset::transpose_times(std::span<const double> v) const {
  if (v.size() != n_rows()) throw Error(ErrorCode::InvalidArgument, "X'v: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_players()));
  for (std::size_t j = 0; j < n_players(); ++j) {
    double s = 0.0;
    for (const Entry& e : column(j)) s += e.sign * v[e.index];
    out[static_cast<Eigen::Index>(j)] = s;
  }
  return out;
}

Eigen::MatrixXd Dataset::gram() const {
  const auto p = static_cast<Eigen::Index>(n_players());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t i = 0; i < n_rows(); ++i) {
    const auto r = row(i);
    for (const Entry& a : r) {
      for (const Entry& b : r) {
        g(static_cast<Eigen::Index>(a.index), static_cast<Eigen::Index>(b.index)) += a.sign * b.sign;
      }
    }
  }
  return g;
}

Eigen::MatrixXd Dataset::dense() const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows()),
                                            static_cast<Eigen::Index>(n_players()));
  for (std::size_t i = 0; i < n_rows(); ++i) {
    for (const Entry& e : row(i)) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.index)) = e.sign;
    }
  }
  return x;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::int64_t> ids;
  std::vector<double> y;
  std::vector<std::vector<Entry>> entries;
  ids.reserve(rows.size());
  y.reserve(rows.size());
  entries.reserve(rows.size());
  for (const std::size_t i : rows) {
    if (i >= n_rows()) throw Error(ErrorCode::InvalidArgument, "select_rows: row out of range");
    ids.push_back(map_ids_[i]);
    y.push_back(y_[i]);
    const auto r = row(i);
    entries.emplace_back(r.begin(), r.end());
  }
  return Dataset(players_, std::move(ids), std::move(y), entries);
}

Dataset Dataset::with_response(std::vector<double> y) const {
  if (y.size() != n_rows()) throw Error(ErrorCode::InvalidArgument, "with_response: size mismatch");
  std::vector<std::vector<Entry>> entries;
  entries.reserve(n_rows());
  for (std::size_t i = 0; i < n_rows(); ++i) {
    const auto r = row(i);
    entries.emplace_back(r.begin(), r.end());
  }
  return Dataset(players_, map_ids_, std::move(y), entries);
}

void validate_record(const MatchRecord& record) {
  const auto id = std::to_string(record.map_id);
  if (record.score1 < 0 || record.score2 < 0) {
    throw Error(ErrorCode::MalformedCsv, "map " + id + ": negative score");
  }
  std::unordered_set<std::string> team1;
  for (const auto& p : record.team1) {
    if (p.token.empty()) throw Error(ErrorCode::RosterSizeViolation, "map " + id + ": empty slot");
    if (!team1.insert(p.token).second) {
      throw Error(ErrorCode::RosterSizeViolation, "map " + id + ": " + p.token + " listed twice");
    }
  }
  std::unordered_set<std::string> team2;
  for (const auto& p : record.team2) {
    if (p.token.empty()) throw Error(ErrorCode::RosterSizeViolation, "map " + id + ": empty slot");
    if (team1.count(p.token)) {
      throw Error(ErrorCode::PlayerOnBothTeams, "map " + id + ": " + p.token + " on both teams");
    }
    if (!team2.insert(p.token).second) {
      throw Error(ErrorCode::RosterSizeViolation, "map " + id + ": " + p.token + " listed twice");
    }
  }
}

std::vector<std::string> result_diff_warnings(std::span<const MatchRecord> records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::abs(r.result_diff()) == 1) {
      out.push_back("map " + std::to_string(r.map_id) + ": result difference " +
                    std::to_string(r.result_diff()) + " cannot occur in regulation CS:GO");
    }
  }
  return out;
}

std::vector<MatchRecord> load_matches(const std::filesystem::path& matches_file,
                                      const std::filesystem::path& rosters_file,
                                      std::vector<std::string>* warnings) {
  const auto matches = csv::read(matches_file, {"map_id", "score1", "score2"});
  const auto rosters = csv::read(rosters_file, {"map_id", "player_id", "side"});

  std::vector<MatchRecord> records;
  records.reserve(matches.rows.size());
  std::unordered_map<std::int64_t, std::size_t> by_id;
  for (std::size_t k = 0; k < matches.rows.size(); ++k) {
    const auto& f = matches.rows[k];
    const auto line = matches.line_numbers[k];
    MatchRecord r;
    r.map_id = csv::parse_number<std::int64_t>(f[0], matches_file, line);
    r.score1 = csv::parse_number<int>(f[1], matches_file, line);
    r.score2 = csv::parse_number<int>(f[2], matches_file, line);
    if (r.score1 < 0 || r.score2 < 0) {
      throw Error(ErrorCode::MalformedCsv,
                  matches_file.string() + ":" + std::to_string(line) + ": negative score");
    }
    if (!by_id.emplace(r.map_id, records.size()).second) {
      throw Error(ErrorCode::DuplicateMapId, "duplicate map_id " + f[0]);
    }
    records.push_back(std::move(r));
  }

  std::vector<std::size_t> filled1(records.size(), 0);
  std::vector<std::size_t> filled2(records.size(), 0);
  for (std::size_t k = 0; k < rosters.rows.size(); ++k) {
    const auto& f = rosters.rows[k];
    const auto line = rosters.line_numbers[k];
    const auto map_id = csv::parse_number<std::int64_t>(f[0], rosters_file, line);
    const auto side = csv::parse_number<int>(f[2], rosters_file, line);
    if (f[1].empty()) {
      throw Error(ErrorCode::MalformedCsv,
                  rosters_file.string() + ":" + std::to_string(line) + ": empty player_id");
    }
    const auto it = by_id.find(map_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::MalformedCsv,
                  rosters_file.string() + ":" + std::to_string(line) + ": unknown map_id " + f[0]);
    }
    auto& record = records[it->second];
    if (side == 1) {
      if (filled1[it->second] >= kTeamSize) {
        throw Error(ErrorCode::RosterSizeViolation, "map " + f[0] + ": more than 5 on team 1");
      }
      record.team1[filled1[it->second]++] = PlayerId{f[1]};
    } else if (side == -1) {
      if (filled2[it->second] >= kTeamSize) {
        throw Error(ErrorCode::RosterSizeViolation, "map " + f[0] + ": more than 5 on team 2");
      }
      record.team2[filled2[it->second]++] = PlayerId{f[1]};
    } else {
      throw Error(ErrorCode::MalformedCsv,
                  rosters_file.string() + ":" + std::to_string(line) + ": side must be 1 or -1");
    }
  }

  for (std::size_t k = 0; k < records.size(); ++k) {
    if (filled1[k] != kTeamSize || filled2[k] != kTeamSize) {
      throw Error(ErrorCode::RosterSizeViolation,
                  "map " + std::to_string(records[k].map_id) + ": rosters have " +
                      std::to_string(filled1[k]) + " and " + std::to_string(filled2[k]) +
                      " players, expected 5 per side");
    }
    validate_record(records[k]);
  }

  if (warnings) {
    auto w = result_diff_warnings(records);
    warnings->insert(warnings->end(), w.begin(), w.end());
  }
  return records;
}

void write_matches(std::span<const MatchRecord> records, const std::filesystem::path& matches_file,
                   const std::filesystem::path& rosters_file) {
  auto m = csv::open_out(matches_file);
  m << "map_id,score1,score2\n";
  for (const auto& r : records) m << r.map_id << ',' << r.score1 << ',' << r.score2 << '\n';
  csv::close_out(m, matches_file);

  auto ro = csv::open_out(rosters_file);
  ro << "map_id,player_id,side\n";
  for (const auto& r : records) {
    for (const auto& p : r.team1) ro << r.map_id << ',' << p.token << ",1\n";
    for (const auto& p : r.team2) ro << r.map_id << ',' << p.token << ",-1\n";
  }
  csv::close_out(ro, rosters_file);
}

Dataset build_dataset(std::span<const MatchRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyModel, "no matches to build a dataset from");
  std::vector<PlayerId> players;
  std::unordered_map<PlayerId, std::size_t, PlayerIdHash> index;
  auto column_of = [&](const PlayerId& id) {
    const auto [it, inserted] = index.emplace(id, players.size());
    if (inserted) players.push_back(id);
    return it->second;
  };

  std::vector<std::int64_t> ids;
  std::vector<double> y;
  std::vector<std::vector<Entry>> rows;
  ids.reserve(records.size());
  y.reserve(records.size());
  rows.reserve(records.size());
  for (const auto& r : records) {
    validate_record(r);
    std::vector<Entry> row;
    row.reserve(2 * kTeamSize);
    for (const auto& p : r.team1) row.push_back({column_of(p), +1});
    for (const auto& p : r.team2) row.push_back({column_of(p), -1});
    ids.push_back(r.map_id);
    y.push_back(static_cast<double>(r.result_diff()));
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(players), std::move(ids), std::move(y), rows);
}

PlusMinusTable plus_minus(const Dataset& ds) {
  PlusMinusTable t;
  t.players = ds.players();
  t.matches_played.resize(ds.n_players());
  t.pm.resize(ds.n_players());
  const auto y = ds.y();
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    const auto col = ds.column(j);
    double total = 0.0;
    for (const Entry& e : col) total += e.sign * y[e.index];
    t.matches_played[j] = col.size();
    t.pm[j] = col.empty() ? 0.0 : total / static_cast<double>(col.size());
  }
  return t;
}

void write_plus_minus(const PlusMinusTable& table, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "player_id,matches,pm\n";
  for (std::size_t j = 0; j < table.players.size(); ++j) {
    out << table.players[j].token << ',' << table.matches_played[j] << ','
        << csv::format(table.pm[j]) << '\n';
  }
  csv::close_out(out, file);
}

Dataset filter_min_matches(const Dataset& ds, std::size_t min_matches) {
  std::vector<std::size_t> remap(ds.n_players(), static_cast<std::size_t>(-1));
  std::vector<PlayerId> kept;
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    if (ds.appearances(j) >= min_matches) {
      remap[j] = kept.size();
      kept.push_back(ds.players()[j]);
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::EmptyModel, "no player has at least " + std::to_string(min_matches) +
                                           " matches");
  }
  std::vector<std::vector<Entry>> rows(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (const Entry& e : ds.row(i)) {
      if (remap[e.index] != static_cast<std::size_t>(-1)) rows[i].push_back({remap[e.index], e.sign});
    }
  }
  const auto y = ds.y();
  return Dataset(std::move(kept), ds.map_ids(), std::vector<double>(y.begin(), y.end()), rows);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.n_rows();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw Error(ErrorCode::EmptyPartition, "split of " + std::to_string(n) +
                                               " rows leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {ds.select_rows(train), ds.select_rows(test)};
}

BinaryDataset binarize_for_logistic(const Dataset& ds) {
  std::vector<std::size_t> keep;
  const auto y = ds.y();
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (y[i] != 0.0) keep.push_back(i);
  }
  if (keep.empty()) throw Error(ErrorCode::EmptyModel, "every match is a draw");
  BinaryDataset out{ds.select_rows(keep), {}};
  out.labels.reserve(keep.size());
  for (const std::size_t i : keep) out.labels.push_back(y[i] > 0.0 ? 1.0 : 0.0);
  return out;
}

Eigen::VectorXd RatingPrior::standardized() const {
  return Eigen::Map<const Eigen::VectorXd>(s_rating2.data(),
                                           static_cast<Eigen::Index>(s_rating2.size()));
}

RatingPrior make_rating_prior(std::vector<PlayerId> players, std::vector<double> avg_rating2) {
  if (players.size() != avg_rating2.size()) {
    throw Error(ErrorCode::InvalidArgument, "rating prior: size mismatch");
  }
  const std::size_t n = players.size();
  if (n < 2) throw Error(ErrorCode::ZeroVariance, "standardizing fewer than two ratings");
  const double mean = std::accumulate(avg_rating2.begin(), avg_rating2.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : avg_rating2) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "all ratings are equal");
  RatingPrior prior;
  prior.players = std::move(players);
  prior.s_rating2.reserve(n);
  for (const double v : avg_rating2) prior.s_rating2.push_back((v - mean) / sd);
  prior.avg_rating2 = std::move(avg_rating2);
  return prior;
}

RatingTable load_rating_table(const std::filesystem::path& ratings_file) {
  const auto table = csv::read(ratings_file, {"player_id", "avg_rating2"});
  RatingTable out;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& f = table.rows[k];
    const double v = csv::parse_number<double>(f[1], ratings_file, table.line_numbers[k]);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::MalformedCsv, ratings_file.string() + ": non-finite rating");
    }
    if (!out.emplace(PlayerId{f[0]}, v).second) {
      throw Error(ErrorCode::MalformedCsv, ratings_file.string() + ": duplicate player " + f[0]);
    }
  }
  return out;
}

RatingPrior restrict_rating_prior(const RatingTable& table, std::span<const PlayerId> players) {
  std::vector<double> values;
  values.reserve(players.size());
  for (const auto& p : players) {
    const auto it = table.find(p);
    if (it == table.end()) {
      throw Error(ErrorCode::MissingPrior, "no Rating2.0 value for player " + p.token);
    }
    values.push_back(it->second);
  }
  return make_rating_prior(std::vector<PlayerId>(players.begin(), players.end()), std::move(values));
}

RatingPrior load_rating_prior(const std::filesystem::path& ratings_file,
                              std::span<const PlayerId> players) {
  return restrict_rating_prior(load_rating_table(ratings_file), players);
}

}  // namespace apm

#include "apm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "apm/error.hpp"
#include "apm/logmodel.hpp"
#include "apm/rng.hpp"
#include "csv.hpp"

namespace apm {

std::vector<int> rank_players(std::span<const double> ratings, std::uint64_t seed) {
  const std::size_t n = ratings.size();
  for (const double v : ratings) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "ratings must be finite");
  }
  std::vector<std::size_t> tie_key(n);
  std::iota(tie_key.begin(), tie_key.end(), std::size_t{0});
  auto rng = make_rng(seed, "rank");
  std::shuffle(tie_key.begin(), tie_key.end(), rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ratings[a] != ratings[b]) return ratings[a] > ratings[b];
    return tie_key[a] < tie_key[b];
  });
  std::vector<int> ranks(n);
  for (std::size_t k = 0; k < n; ++k) ranks[order[k]] = static_cast<int>(k + 1);
  return ranks;
}

std::vector<std::optional<double>> predicted_plus_minus(const Dataset& ds,
                                                        std::span<const double> beta) {
  const Eigen::VectorXd fitted = ds.predict(beta);
  std::vector<std::optional<double>> out(ds.n_players());
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    const auto col = ds.column(j);
    if (col.empty()) continue;
    double total = 0.0;
    for (const Entry& e : col) total += e.sign * fitted[static_cast<Eigen::Index>(e.index)];
    out[j] = total / static_cast<double>(col.size());
  }
  return out;
}

std::vector<std::optional<WinRate>> predicted_win_rate(const Dataset& ds,
                                                       std::span<const double> labels,
                                                       std::span<const double> beta) {
  if (labels.size() != ds.n_rows()) throw Error(ErrorCode::InvalidArgument, "labels: size mismatch");
  const Eigen::VectorXd eta = ds.predict(beta);
  std::vector<std::optional<WinRate>> out(ds.n_players());
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    const auto col = ds.column(j);
    if (col.empty()) continue;
    double predicted = 0.0;
    double actual = 0.0;
    for (const Entry& e : col) {
      const double p = predict_prob(eta[static_cast<Eigen::Index>(e.index)]);
      const double won = labels[e.index];
      predicted += e.sign > 0 ? p : 1.0 - p;
      actual += e.sign > 0 ? won : 1.0 - won;
    }
    const auto n = static_cast<double>(col.size());
    out[j] = WinRate{predicted / n, actual / n};
  }
  return out;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

PearsonTest pearson_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "pearson_test: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::TooFewPoints, "pearson_test needs at least three points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "pearson_test: an input has zero variance");
  }
  PearsonTest out;
  out.df = static_cast<int>(n) - 2;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(out.r) == 1.0) {
    out.t_stat = std::copysign(std::numeric_limits<double>::infinity(), out.r);
    out.p_value = 0.0;
    return out;
  }
  out.t_stat = out.r * std::sqrt(out.df / (1.0 - out.r * out.r));
  out.p_value = student_t_two_sided(out.t_stat, out.df);
  return out;
}

RatingReport build_rating_report(const std::string& model, const PlusMinusTable& pm,
                                 std::span<const double> ratings, bool l1_active,
                                 const RatingTable* rating2, std::uint64_t seed) {
  const std::size_t p = pm.players.size();
  if (ratings.size() != p) throw Error(ErrorCode::InvalidArgument, "report: rating count mismatch");
  const auto model_ranks = rank_players(ratings, derive_seed(seed, "rank.model." + model));
  const auto pm_ranks = rank_players(pm.pm, derive_seed(seed, "rank.pm"));

  std::vector<std::optional<int>> r2_ranks(p);
  if (rating2) {
    std::vector<std::size_t> rated;
    std::vector<double> values;
    for (std::size_t j = 0; j < p; ++j) {
      const auto it = rating2->find(pm.players[j]);
      if (it == rating2->end()) continue;
      rated.push_back(j);
      values.push_back(it->second);
    }
    const auto ranks = rank_players(values, derive_seed(seed, "rank.rating2"));
    for (std::size_t k = 0; k < rated.size(); ++k) r2_ranks[rated[k]] = ranks[k];
  }

  RatingReport report;
  report.model = model;
  report.rows.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    report.rows.push_back(RatingRow{pm.players[j], ratings[j], model_ranks[j], pm.pm[j], pm_ranks[j],
                                    r2_ranks[j], l1_active && ratings[j] == 0.0});
  }
  return report;
}

std::vector<ComparisonRow> comparison_table(std::span<const RatingReport> reports, std::size_t k) {
  std::vector<ComparisonRow> out;
  if (reports.empty() || k == 0) return out;
  const auto& base = reports.front().rows;
  std::vector<std::unordered_map<PlayerId, const RatingRow*, PlayerIdHash>> lookup(reports.size());
  for (std::size_t m = 0; m < reports.size(); ++m) {
    for (const auto& row : reports[m].rows) lookup[m].emplace(row.player, &row);
  }
  std::vector<const RatingRow*> by_pm;
  by_pm.reserve(base.size());
  for (const auto& row : base) by_pm.push_back(&row);
  std::sort(by_pm.begin(), by_pm.end(), [](const RatingRow* a, const RatingRow* b) {
    return a->pm_rank < b->pm_rank;
  });
  by_pm.resize(std::min(k, by_pm.size()));
  for (const RatingRow* row : by_pm) {
    ComparisonRow c{row->player, row->pm, row->pm_rank, row->rating2_rank, {}};
    for (std::size_t m = 0; m < reports.size(); ++m) {
      const auto it = lookup[m].find(row->player);
      if (it == lookup[m].end()) {
        throw Error(ErrorCode::InvalidArgument, "reports do not share a player universe");
      }
      const RatingRow& r = *it->second;
      c.models.push_back(ComparisonEntry{
          r.excluded_by_l1 ? std::nullopt : std::optional<double>(r.rating), r.model_rank});
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ScatterRow> plus_minus_scatter(const Dataset& ds, std::span<const double> beta) {
  const auto truth = plus_minus(ds);
  const auto predicted = predicted_plus_minus(ds, beta);
  std::vector<ScatterRow> out;
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    if (!predicted[j]) continue;
    out.push_back(ScatterRow{ds.players()[j], truth.pm[j], *predicted[j]});
  }
  return out;
}

std::vector<ScatterRow> win_rate_scatter(const Dataset& ds, std::span<const double> labels,
                                         std::span<const double> beta) {
  const auto rates = predicted_win_rate(ds, labels, beta);
  std::vector<ScatterRow> out;
  for (std::size_t j = 0; j < ds.n_players(); ++j) {
    if (!rates[j]) continue;
    out.push_back(ScatterRow{ds.players()[j], rates[j]->actual, rates[j]->predicted});
  }
  return out;
}

PearsonTest scatter_test(std::span<const ScatterRow> rows) {
  std::vector<double> truth, predicted;
  truth.reserve(rows.size());
  predicted.reserve(rows.size());
  for (const auto& r : rows) {
    truth.push_back(r.truth);
    predicted.push_back(r.predicted);
  }
  return pearson_test(truth, predicted);
}

void write_ratings(std::span<const RatingReport> reports, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "player_id,model,rating,model_rank,pm,pm_rank,rating2_rank,excluded_by_l1\n";
  for (const auto& report : reports) {
    for (const auto& r : report.rows) {
      out << r.player.token << ',' << report.model << ',' << csv::format(r.rating) << ','
          << r.model_rank << ',' << csv::format(r.pm) << ',' << r.pm_rank << ',';
      if (r.rating2_rank) out << *r.rating2_rank;
      out << ',' << (r.excluded_by_l1 ? 1 : 0) << '\n';
    }
  }
  csv::close_out(out, file);
}

void write_scatter(std::span<const ScatterRow> rows, bool win_rates, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << (win_rates ? "player_id,actual_rate,predicted_rate\n" : "player_id,true_pm,predicted_pm\n");
  for (const auto& r : rows) {
    out << r.player.token << ',' << csv::format(r.truth) << ',' << csv::format(r.predicted) << '\n';
  }
  csv::close_out(out, file);
}

void write_pearson_report(std::span<const NamedTest> tests, const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "model,r,t,df,p_value\n";
  for (const auto& t : tests) {
    out << t.model << ',' << csv::format(t.test.r) << ',' << csv::format(t.test.t_stat) << ','
        << t.test.df << ',' << csv::format(t.test.p_value) << '\n';
  }
  csv::close_out(out, file);
}

void write_comparison(std::span<const ComparisonRow> rows, std::span<const RatingReport> reports,
                      const std::filesystem::path& file) {
  auto out = csv::open_out(file);
  out << "player_id,pm,pm_rank,rating2_rank";
  for (const auto& r : reports) out << ',' << r.model << "_rating," << r.model << "_rank";
  out << '\n';
  for (const auto& row : rows) {
    out << row.player.token << ',' << csv::format(row.pm) << ',' << row.pm_rank << ',';
    if (row.rating2_rank) out << *row.rating2_rank;
    for (const auto& m : row.models) {
      out << ',' << (m.rating ? csv::format(*m.rating) : std::string("-")) << ',' << m.rank;
    }
    out << '\n';
  }
  csv::close_out(out, file);
}

}  // namespace apm

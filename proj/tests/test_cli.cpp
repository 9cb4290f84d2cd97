#include <doctest.h>

#include <sys/wait.h>

#include <map>
#include <set>
#include <sstream>

#include "apm/data.hpp"
#include "support.hpp"

using namespace apm;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + APM_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(test::read_text(file));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

std::map<std::string, std::string> read_keys(const fs::path& file) {
  std::map<std::string, std::string> out;
  std::istringstream in(test::read_text(file));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

// Four maps between fixed rosters a1..a5 and b1..b5 with alternating sides, a winning 16-12 each time.
void write_mirrored(const test::TempDir& dir) {
  std::vector<MatchRecord> records;
  for (int m = 0; m < 4; ++m) {
    MatchRecord r;
    r.map_id = m + 1;
    Roster a, b;
    for (std::size_t k = 0; k < kTeamSize; ++k) {
      a[k] = {"a" + std::to_string(k + 1)};
      b[k] = {"b" + std::to_string(k + 1)};
    }
    r.team1 = m % 2 ? b : a;
    r.team2 = m % 2 ? a : b;
    r.score1 = m % 2 ? 12 : 16;
    r.score2 = m % 2 ? 16 : 12;
    records.push_back(r);
  }
  write_matches(records, dir / "matches.csv", dir / "rosters.csv");
}

std::string data_flags(const test::TempDir& dir) {
  return "--matches " + q(dir / "matches.csv") + " --rosters " + q(dir / "rosters.csv");
}

}  // namespace

TEST_CASE("usage errors exit with status 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("pm --no-such-flag") == 1);
  CHECK(run_cli("--help") == 0);
  test::TempDir dir("cli_usage");
  write_mirrored(dir);
  CHECK(run_cli("fit " + data_flags(dir) + " --model lasso --out " + q(dir / "o")) == 1);
  CHECK(run_cli("fit " + data_flags(dir) + " --min-matches lots --out " + q(dir / "o")) == 1);
  test::write_text(dir / "bad.txt", "colour=blue\n");
  CHECK(run_cli("pm --config " + q(dir / "bad.txt")) == 1);
}

TEST_CASE("plus/minus on the example maps") {
  test::TempDir dir("cli_pm");
  write_matches(test::table_one_records(), dir / "matches.csv", dir / "rosters.csv");
  REQUIRE(run_cli("pm " + data_flags(dir) + " --min-matches 0 --out " + q(dir / "out")) == 0);
  const auto rows = read_csv(dir / "out" / "plus_minus.csv");
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == std::vector<std::string>{"player_id", "matches", "pm"});
  bool found = false;
  for (const auto& r : rows) {
    if (r[0] != "Player-1") continue;
    found = true;
    CHECK(r[1] == "3");
    CHECK(std::stod(r[2]) == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
  }
  CHECK(found);
  CHECK(fs::exists(dir / "out" / "config.txt"));

  SUBCASE("empty input fails") {
    test::write_text(dir / "matches.csv", "map_id,score1,score2\n");
    test::write_text(dir / "rosters.csv", "map_id,player_id,side\n");
    CHECK(run_cli("pm " + data_flags(dir) + " --min-matches 0 --out " + q(dir / "empty")) == 2);
  }
  SUBCASE("malformed input fails") {
    test::write_text(dir / "matches.csv", "map_id,score1,score2\n76059,x,12\n");
    CHECK(run_cli("pm " + data_flags(dir) + " --out " + q(dir / "bad")) == 2);
  }
  SUBCASE("missing files fail") {
    CHECK(run_cli("pm --matches " + q(dir / "nope.csv") + " --rosters " + q(dir / "nope2.csv")) == 2);
  }
}

TEST_CASE("ridge on mirrored maps recovers the closed form") {
  test::TempDir dir("cli_ridge");
  write_mirrored(dir);
  REQUIRE(run_cli("fit " + data_flags(dir) + " --min-matches 0 --train-fraction 0.5 --model ridge " +
                  "--lambda 1 --alpha 0 --tol 1e-13 --out " + q(dir / "out")) == 0);
  const auto rows = read_csv(dir / "out" / "ratings_ridge.csv");
  REQUIRE(rows.size() == 11);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double expect = rows[i][0][0] == 'a' ? 1.0 / 3.0 : -1.0 / 3.0;
    CHECK(std::stod(rows[i][2]) == doctest::Approx(expect).epsilon(1e-10));
  }
  const auto fit = read_keys(dir / "out" / "fit_ridge.txt");
  CHECK(fit.at("converged") == "true");
  CHECK(fit.count("cv_best_lambda") == 0);
  for (const char* f : {"scatter_ridge_train.csv", "scatter_ridge_test.csv", "pearson.csv", "ratings.csv",
                        "comparison.csv", "config.txt"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
}

TEST_CASE("bayesian models without ratings fail with a data error") {
  test::TempDir dir("cli_bayes");
  write_mirrored(dir);
  CHECK(run_cli("fit " + data_flags(dir) + " --min-matches 0 --model bayes --out " + q(dir / "out")) == 2);
  CHECK_FALSE(fs::exists(dir / "out" / "ratings.csv"));
  test::write_text(dir / "ratings.csv", "player_id,avg_rating2\na1,1.1\n");
  CHECK(run_cli("fit " + data_flags(dir) + " --min-matches 0 --model bayes --ratings " +
                q(dir / "ratings.csv") + " --out " + q(dir / "out")) == 2);
}

TEST_CASE("synth writes consistent, reproducible files") {
  test::TempDir dir("cli_synth");
  const std::string base = "synth --n-players 20 --n-matches 200 --seed 13 --out ";
  REQUIRE(run_cli(base + q(dir / "a")) == 0);
  REQUIRE(run_cli(base + q(dir / "b")) == 0);
  REQUIRE(run_cli("synth --n-players 20 --n-matches 200 --seed 14 --out " + q(dir / "c")) == 0);
  for (const char* f : {"matches.csv", "rosters.csv", "truth.csv"}) {
    CHECK(test::read_text(dir / "a" / f) == test::read_text(dir / "b" / f));
  }
  CHECK(test::read_text(dir / "a" / "truth.csv") != test::read_text(dir / "c" / "truth.csv"));

  std::set<std::string> match_ids, roster_ids;
  const auto matches = read_csv(dir / "a" / "matches.csv");
  for (std::size_t i = 1; i < matches.size(); ++i) match_ids.insert(matches[i][0]);
  const auto rosters = read_csv(dir / "a" / "rosters.csv");
  for (std::size_t i = 1; i < rosters.size(); ++i) roster_ids.insert(rosters[i][0]);
  CHECK(match_ids.size() == 200);
  CHECK(match_ids == roster_ids);
  CHECK(rosters.size() == 1 + 200 * 10);
  CHECK(read_csv(dir / "a" / "truth.csv").size() == 21);

  REQUIRE(run_cli("synth --strength-sd 0 --n-matches 10 --out " + q(dir / "z")) == 0);
  const auto truth = read_csv(dir / "z" / "truth.csv");
  REQUIRE(truth.size() == 51);
  for (std::size_t i = 1; i < truth.size(); ++i) CHECK(std::stod(truth[i][1]) == 0.0);

  CHECK(run_cli("synth --n-players 5 --out " + q(dir / "small")) == 1);
}

TEST_CASE("replaying a resolved config reproduces the outputs") {
  test::TempDir dir("cli_replay");
  REQUIRE(run_cli("synth --n-players 30 --n-matches 400 --seed 5 --out " + q(dir / "data")) == 0);
  const std::string data = "--matches " + q(dir / "data" / "matches.csv") + " --rosters " +
                           q(dir / "data" / "rosters.csv");
  REQUIRE(run_cli("fit " + data + " --min-matches 40 --model ridge,enet,logit-enet --n-alphas 3 " +
                  "--n-lambdas 8 --folds 4 --seed 21 --out " + q(dir / "one")) == 0);
  REQUIRE(run_cli("fit --config " + q(dir / "one" / "config.txt") + " --out " + q(dir / "two")) == 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "one")) {
    const auto name = entry.path().filename().string();
    if (name == "config.txt") continue;
    REQUIRE(fs::exists(dir / "two" / name));
    CHECK_MESSAGE(test::read_text(entry.path()) == test::read_text(dir / "two" / name), name);
    ++compared;
  }
  CHECK(compared >= 10);
  auto one = read_keys(dir / "one" / "config.txt"), two = read_keys(dir / "two" / "config.txt");
  CHECK(one.at("out") != two.at("out"));
  one.erase("out");
  two.erase("out");
  CHECK(one == two);

  const auto enet = read_keys(dir / "one" / "fit_logit-enet.txt");
  CHECK(enet.count("cv_best_alpha") == 1);
  CHECK(enet.count("cv_best_lambda") == 1);
  CHECK(enet.count("test_p_value") == 1);
  const auto pearson = read_csv(dir / "one" / "pearson.csv");
  bool has_row = false;
  for (const auto& r : pearson) has_row |= r[0] == "logit-enet";
  CHECK(has_row);
  CHECK(fs::exists(dir / "one" / "cv_logit-enet.csv"));
}

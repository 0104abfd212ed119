#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcgame/error.hpp"
#include "pcgame/harness.hpp"

using namespace pcgame;
using nlohmann::json;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.trials = 6;
  s.num_bins = 6;
  s.budgets = {20, 20};
  s.solver.grid_step = 1.0;
  s.master_seed = 17;
  return s;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_trials_csv(os, r.records);
  return os.str();
}

}  // namespace

TEST_CASE("empirical cdf") {
  const std::vector<double> v{1, 2, 3};
  const std::vector<double> g{0.5, 1, 2, 2.5, 3, 9};
  const auto c = empirical_cdf(v, g);
  REQUIRE(c.size() == 6);
  CHECK(c[0].fraction == 0.0);
  CHECK(c[1].fraction == doctest::Approx(1.0 / 3));
  CHECK(c[2].fraction == doctest::Approx(2.0 / 3));
  CHECK(c[3].fraction == doctest::Approx(2.0 / 3));
  CHECK(c[4].fraction == 1.0);
  CHECK(c[5].fraction == 1.0);
  CHECK(c[2].threshold == 2.0);
  CHECK_THROWS_AS(empirical_cdf(std::vector<double>{}, g), std::invalid_argument);
}

TEST_CASE("a single trial reruns identically") {
  const auto s = small_spec();
  const auto a = run_trial(s, 3);
  const auto b = run_trial(s, 3);
  CHECK(a.seed == b.seed);
  CHECK(a.rate_ne == b.rate_ne);
  CHECK(a.rate_sg == b.rate_sg);
  CHECK(a.rejections == b.rejections);
  CHECK(a.trial == 3);
}

TEST_CASE("experiment output does not depend on the thread count") {
  auto s = small_spec();
  const auto one = run_experiment(s);
  s.threads = 3;
  const auto three = run_experiment(s);
  CHECK(csv_of(one) == csv_of(three));
  for (std::size_t i = 0; i < one.records.size(); ++i) CHECK(one.records[i].trial == i);
}

TEST_CASE("records are internally consistent") {
  const auto r = run_experiment(small_spec());
  for (const auto& t : r.records) {
    REQUIRE(t.error.empty());
    for (std::size_t k = 0; k < 2; ++k) CHECK(t.ratio[k] == t.rate_sg[k] / t.rate_ne[k]);
    if (t.converged()) CHECK(t.ratio[0] >= 1.0 - 1e-6);
  }
}

TEST_CASE("summary is recomputable from the csv") {
  const auto r = run_experiment(small_spec());
  std::istringstream in(csv_of(r));
  const auto back = read_trials_csv(in);
  REQUIRE(back.size() == r.records.size());
  const auto s = summarize(back, 2);
  CHECK(s.trials == r.summary.trials);
  CHECK(s.n_converged == r.summary.n_converged);
  CHECK(s.mean_rejections == r.summary.mean_rejections);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(s.users[k].mean_ratio == r.summary.users[k].mean_ratio);
    CHECK(s.users[k].median_ratio == r.summary.users[k].median_ratio);
    CHECK(s.users[k].frac_improved == r.summary.users[k].frac_improved);
    CHECK(s.users[k].n_converged == r.summary.users[k].n_converged);
  }
}

TEST_CASE("summary statistics by hand") {
  std::vector<TrialRecord> recs(4);
  const double ratios[] = {1.5, 1.0, 2.0, 9.0};
  for (std::size_t i = 0; i < 4; ++i) {
    recs[i].trial = i;
    recs[i].rate_ne = {1.0};
    recs[i].rate_sg = {ratios[i]};
    recs[i].ratio = {ratios[i]};
    recs[i].ne_converged = recs[i].sg_converged = true;
  }
  recs[3].error = "boom";
  const auto s = summarize(recs, 1);
  CHECK(s.n_converged == 3);
  CHECK(s.n_failed == 1);
  CHECK(s.users[0].mean_ratio == doctest::Approx(1.5));
  CHECK(s.users[0].median_ratio == 1.5);
  CHECK(s.users[0].frac_improved == doctest::Approx(2.0 / 3));
  CHECK(converged_ratios(recs, 0) == std::vector<double>{1.5, 1.0, 2.0});

  recs[3].error.clear();
  recs[3].sg_converged = false;
  CHECK(summarize(recs, 1).n_converged == 3);
  CHECK(summarize(recs, 1).n_failed == 0);
}

TEST_CASE("csv layout") {
  const auto r = run_experiment(small_spec());
  const auto text = csv_of(r);
  CHECK(text.rfind("trial,seed,rejections,user,rate_ne_bits,rate_sg_bits,ratio,converged\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 1 + 2 * r.records.size());
}

TEST_CASE("spec from json") {
  const auto s = spec_from_json(json::parse(R"({"trials": 5, "budget": 50, "num_users": 3,
      "profile": {"num_rays": 2}, "solver": {"grid_step": 0.5}})"));
  CHECK(s.trials == 5);
  CHECK(s.budgets == std::vector<double>{50, 50, 50});
  CHECK(s.profile.num_rays == 2);
  CHECK(s.solver.grid_step == 0.5);
  CHECK(s.num_bins == 20);

  const auto t = spec_from_json(json::parse(R"({"budget": [1, 2]})"));
  CHECK(t.budgets == std::vector<double>{1, 2});

  const auto round = spec_from_json(spec_to_json(s));
  CHECK(spec_to_json(round) == spec_to_json(s));

  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"trails": 5})")), FormatError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"trials": "many"})")), FormatError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"trials": 0})")), FormatError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"budget": [1, 2, 3]})")), FormatError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"solver": {"grid": 1}})")), FormatError);
}

TEST_CASE("experiment files") {
  const auto dir = std::filesystem::temp_directory_path() / "pcgame_harness_test";
  std::filesystem::remove_all(dir);
  auto s = small_spec();
  s.trials = 2;
  const auto r = run_experiment(s);
  write_experiment(dir, s, r);
  CHECK(std::filesystem::exists(dir / "trials.csv"));
  CHECK(std::filesystem::exists(dir / "cdf_user0.csv"));
  CHECK(std::filesystem::exists(dir / "cdf_user1.csv"));
  std::ifstream js(dir / "summary.json");
  const auto doc = json::parse(js);
  CHECK(doc["users"].size() == 2);
  CHECK(doc["users"][0].contains("mean_ratio"));
  CHECK(doc["users"][0].contains("median_ratio"));
  CHECK(doc["users"][0].contains("frac_improved"));
  CHECK(doc["users"][0].contains("n_converged"));
  std::ifstream cdf(dir / "cdf_user0.csv");
  std::string header;
  std::getline(cdf, header);
  CHECK(header == "threshold,fraction");
  std::filesystem::remove_all(dir);
}

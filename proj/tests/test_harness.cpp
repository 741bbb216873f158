#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "seldonian/csv.hpp"
#include "seldonian/experiment.hpp"
#include "seldonian/random.hpp"
#include "seldonian/synthgen.hpp"

using namespace seldonian;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("seldonian_test_" + name);
}

}  // namespace

TEST_CASE("dataset csv ingestion") {
  std::istringstream in("f1,f2,y,t\n1,2,3,0\n4,5,6,1\n7,8,9,0\n");
  const Dataset d = read_dataset_csv(in);
  CHECK(d.size() == 3);
  CHECK(d.feature_count() == 3);
  CHECK(d.x(1)[0] == 4.0);
  CHECK(d.x(1)[2] == 1.0);
  CHECK(d.y(2) == 9.0);
  CHECK(d.t(1) == 1);
}

TEST_CASE("dataset csv errors name the row and column") {
  SUBCASE("bad type") {
    std::istringstream in("x,y,t\n1,2,0\n1,2,2\n");
    try {
      read_dataset_csv(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
      CHECK(e.column() == 3);
    }
  }
  SUBCASE("non-numeric cell") {
    std::istringstream in("x,y,t\n1,abc,0\n");
    try {
      read_dataset_csv(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
      CHECK(e.column() == 2);
    }
  }
  SUBCASE("missing column") {
    std::istringstream in("x,y\n1,2\n");
    CHECK_THROWS_AS(read_dataset_csv(in), ParseError);
  }
  SUBCASE("empty") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_dataset_csv(in), ParseError);
  }
}

TEST_CASE("dataset emit then ingest is exact") {
  const Dataset d = gen_illustrative({.m = 250, .seed = 13});
  std::stringstream buf;
  write_dataset_csv(buf, d);
  CHECK(read_dataset_csv(buf) == d);
}

TEST_CASE("episode csv round trip") {
  std::vector<EpisodeRecord> eps{{{0.1, 0.2}, -1.5, {-0.25}}, {{0.9, 0.3}, 0.1 + 0.2, {0.0}}};
  std::stringstream buf;
  write_episodes_csv(buf, eps);
  const auto back = read_episodes_csv(buf);
  REQUIRE(back.size() == 2);
  CHECK(back[1].ret == eps[1].ret);
  CHECK(back[0].constraint_returns == eps[0].constraint_returns);
  CHECK(back[1].policy == eps[1].policy);
}

TEST_CASE("config parsing and validation") {
  const auto cfg = parse_config(R"({"kind":"regression-sweep","algorithms":["ndlr","qndlr-lambda"],
      "m_values":[100,200],"trials":3,"delta":0.1,"seed":9,"search":{"restarts":1}})");
  CHECK(cfg.algorithms.size() == 2);
  CHECK(cfg.algorithms[1] == Algorithm::qndlr_lambda);
  CHECK(cfg.m_values == std::vector<std::size_t>{100, 200});
  CHECK(cfg.search.restarts == 1);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_AS(parse_config(R"({"algorithms":["nope"]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{not json"), std::invalid_argument);
  ExperimentConfig bad;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.trials = 1;
  bad.m_values = {5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("summaries are recomputable from trial rows") {
  ExperimentConfig cfg;
  cfg.algorithms = {Algorithm::ls, Algorithm::qndlr};
  cfg.m_values = {200, 3000};
  cfg.trials = 6;
  const auto result = run_experiment(cfg);
  CHECK(result.trials.size() == 24);
  CHECK(result.summary.size() == 4);
  for (const auto& s : result.summary) {
    std::size_t solutions = 0, violations = 0;
    double mse = 0.0;
    for (const auto& t : result.trials) {
      if (t.algo != s.algo || t.m != s.m || !t.found) continue;
      ++solutions;
      violations += t.violation;
      mse += *t.true_mse;
    }
    CHECK(s.solutions == solutions);
    CHECK(s.violations == violations);
    if (solutions) CHECK(s.mean_true_mse == doctest::Approx(mse / solutions));
  }
}

TEST_CASE("experiments are byte-identical across reruns and thread counts") {
  ExperimentConfig cfg;
  cfg.algorithms = {Algorithm::ls, Algorithm::sclr, Algorithm::qndlr};
  cfg.m_values = {100, 1500};
  cfg.trials = 4;
  cfg.seed = 1234;
  auto render = [](const ExperimentResult& r) {
    std::ostringstream a;
    write_trials_csv(a, r);
    write_summary_csv(a, r);
    return a.str();
  };
  const std::string one = render(run_experiment(cfg));
  CHECK(one == render(run_experiment(cfg)));
  cfg.threads = 3;
  CHECK(one == render(run_experiment(cfg)));

  ExperimentConfig rl;
  rl.kind = ExperimentKind::rl_sweep;
  rl.m_values = {30};
  rl.trials = 3;
  CHECK(render(run_experiment(rl)) == render(run_experiment(rl)));
}

TEST_CASE("experiment files: written output and unwritable paths") {
  ExperimentConfig cfg;
  cfg.m_values = {50};
  cfg.trials = 1;
  cfg.out = temp_file("trials.csv");
  run_experiment_to_files(cfg);
  const std::string first = slurp(cfg.out);
  CHECK(first.rfind("trial,m,algo,outcome,theta1,theta2,true_d,true_mse,wall_ms", 0) == 0);
  CHECK(std::filesystem::exists(summary_path(cfg.out)));
  run_experiment_to_files(cfg);
  CHECK(slurp(cfg.out) == first);
  std::filesystem::remove(cfg.out);
  std::filesystem::remove(summary_path(cfg.out));

  cfg.out = "/nonexistent-dir/x/trials.csv";
  CHECK_THROWS_AS(run_experiment_to_files(cfg), std::runtime_error);
}

TEST_CASE("least squares sweep reproduces the documented discrimination") {
  ExperimentConfig cfg;
  cfg.m_values = {1000};
  cfg.trials = 300;
  const auto r = run_experiment(cfg);
  CHECK(std::abs(r.summary[0].mean_true_d + 0.67) <= 0.03);
}

TEST_CASE("oracle check passes") {
  for (const auto& c : oracle_check(0)) {
    CAPTURE(c.name);
    CAPTURE(c.measured);
    CHECK(c.pass);
  }
}

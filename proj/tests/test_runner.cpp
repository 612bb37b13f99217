// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "satr/config.hpp"
#include "satr/runner.hpp"

using namespace satr;

namespace {

RunConfig pattern_cfg(int d, int n, std::int64_t gens, std::uint64_t seed) {
  RunConfig cfg;
  cfg.env_name = "pattern_match";
  cfg.pattern_d = d;
  cfg.optimizer = "satr";
  cfg.pop_size = n;
  cfg.generations = gens;
  cfg.seed = seed;
  cfg.eta = 0.15;
  cfg.rho_init = 0.5;
  cfg.eval_episodes = 16;
  return cfg;
}

RunConfig pole_cfg(std::uint64_t seed) {
  RunConfig cfg;
  cfg.env_name = "pole_balance";
  cfg.optimizer = "satr";
  cfg.pop_size = 6;
  cfg.generations = 3;
  cfg.seed = seed;
  cfg.eta = 1.0;
  cfg.hidden = 8;
  cfg.horizon = 40;
  cfg.eval_episodes = 4;
  cfg.eval_every = 2;
  return cfg;
}

std::vector<std::string> rows_of(const std::vector<GenerationLog>& logs) {
  std::vector<std::string> out;
  for (const auto& l : logs) out.push_back(csv_row(l));
  return out;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("satr_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("run config validation") {
  RunConfig cfg = pattern_cfg(8, 4, 1, 0);
  CHECK_NOTHROW(cfg.validate());
  cfg.pop_size = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = pattern_cfg(8, 4, 1, 0);
  cfg.optimizer = "adam";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = pattern_cfg(8, 4, 1, 0);
  cfg.optimizer = "es";
  cfg.pop_size = 5;  // mirrored sampling needs an even population
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  // es cannot score raw parameter bits
  cfg.pop_size = 4;
  CHECK_THROWS_AS(Trainer(cfg), std::invalid_argument);
}

TEST_CASE("run config from flat key-value text") {
  Config c = Config::parse_string(
      "env = pattern_match\npattern_d = 12\noptimizer = ec_tr\n"
      "population = 32\ngenerations = 7\nseed = 9\ndelta_per_param = 2e-4\n"
      "substep_pattern = 33,33,33,33,34\nworkers = 2\n");
  RunConfig cfg = RunConfig::from(c);
  CHECK(cfg.pattern_d == 12);
  CHECK(cfg.optimizer == "ec_tr");
  CHECK(cfg.pop_size == 32);
  CHECK(cfg.generations == 7);
  CHECK(cfg.seed == 9);
  CHECK(cfg.delta_per_param == 2e-4);
  CHECK(cfg.substep_pattern == std::vector<int>{33, 33, 33, 33, 34});
  CHECK(cfg.workers == 2);
  // typos must not silently fall back to defaults
  CHECK_THROWS_AS(
      RunConfig::from(Config::parse_string("populaton = 512\n")),
      std::invalid_argument);
}

TEST_CASE("pattern_match training improves (median of 3 seeds)") {
  std::vector<double> gains;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RunConfig cfg = pattern_cfg(10, 512, 50, seed);
    Trainer tr(cfg);
    double first = 0, last = 0;
    for (std::int64_t g = 0; g < cfg.generations; ++g) {
      GenerationLog log = tr.run_generation(g);
      if (g == 0) first = log.mean_return;
      last = log.mean_return;
    }
    gains.push_back(last - first);
  }
  std::sort(gains.begin(), gains.end());
  CHECK(gains[1] > 0.0);  // median strictly improves
}

TEST_CASE("N=2 minimal population runs") {
  RunConfig cfg = pattern_cfg(6, 2, 1, 4);
  Trainer tr(cfg);
  GenerationLog log = tr.run_generation(0);
  CHECK(log.generation == 0);
  CHECK(std::isfinite(log.mean_return));
}

TEST_CASE("same config twice gives bit-identical logs") {
  auto run = [] {
    Trainer tr(pole_cfg(11));
    std::vector<GenerationLog> logs;
    for (std::int64_t g = 0; g < 3; ++g) logs.push_back(tr.run_generation(g));
    return rows_of(logs);
  };
  CHECK(run() == run());
}

TEST_CASE("worker count does not affect results") {
  auto run = [](int workers) {
    RunConfig cfg = pole_cfg(12);
    cfg.workers = workers;
    Trainer tr(cfg);
    std::vector<GenerationLog> logs;
    for (std::int64_t g = 0; g < 3; ++g) logs.push_back(tr.run_generation(g));
    return rows_of(logs);
  };
  auto one = run(1);
  CHECK(one == run(3));
  CHECK(one == run(6));
}

TEST_CASE("SATR identity holds row by row while unclamped") {
  RunConfig cfg = pattern_cfg(16, 64, 5, 21);
  Trainer tr(cfg);
  for (std::int64_t g = 0; g < 5; ++g) {
    GenerationLog log = tr.run_generation(g);
    const double expect = 0.5 * cfg.eta * cfg.eta * log.grad_energy;
    if (expect > 0)
      CHECK(log.kl_step == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("evaluation is repeatable and isolated from training RNG") {
  RunConfig cfg = pole_cfg(13);
  Trainer tr(cfg);
  const double before = tr.evaluate();
  CHECK(tr.evaluate() == before);  // identical across calls
  tr.run_generation(0);            // training consumes its own streams only
  Trainer fresh(cfg);
  CHECK(fresh.evaluate() == before);
}

TEST_CASE("map-mode eval of an all-zero policy hits the closed form") {
  RunConfig cfg;
  cfg.env_name = "pointmass_reach";
  cfg.optimizer = "satr";
  cfg.pop_size = 4;
  cfg.generations = 1;
  cfg.seed = 2;
  cfg.hidden = 8;
  cfg.rho_init = 0.1;  // MAP thresholds every rho below 0.5 to zero bits
  cfg.eval_mode = "map";
  cfg.eval_episodes = 8;
  Trainer tr(cfg);
  // zero network -> zero action -> distance stays |goal| = 1 for 200 steps
  CHECK(tr.evaluate() == Catch::Approx(-200.0).margin(1e-9));
}

TEST_CASE("train writes versioned csv, checkpoint, and resumes exactly") {
  TempDir dir;
  RunConfig cfg = pole_cfg(14);
  cfg.generations = 6;
  cfg.out_dir = dir.path.string();

  Trainer full(cfg);
  auto full_rows = rows_of(full.train());
  REQUIRE(full_rows.size() == 6);

  // csv on disk: version line + header + 6 rows
  std::ifstream csv(dir.path / "run.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == kCsvVersionLine);
  std::getline(csv, line);
  CHECK(line == kCsvHeader);
  std::vector<std::string> disk_rows;
  while (std::getline(csv, line))
    if (!line.empty()) disk_rows.push_back(line);
  CHECK(disk_rows == full_rows);

  // interrupted run: 3 generations, checkpoint, then resume to 6
  TempDir dir2;
  RunConfig half = cfg;
  half.generations = 3;
  half.out_dir = dir2.path.string();
  Trainer first_half(half);
  auto head = rows_of(first_half.train());

  RunConfig rest = cfg;
  rest.out_dir = dir2.path.string();
  Trainer second_half(rest);
  second_half.restore(load_checkpoint((dir2.path / "checkpoint.bin").string()));
  CHECK(second_half.next_generation() == 3);
  auto tail = rows_of(second_half.train());

  head.insert(head.end(), tail.begin(), tail.end());
  CHECK(head == full_rows);  // uninterrupted rows reproduced exactly
}

TEST_CASE("G=1 produces exactly one row") {
  TempDir dir;
  RunConfig cfg = pattern_cfg(8, 8, 1, 5);
  cfg.out_dir = dir.path.string();
  Trainer tr(cfg);
  CHECK(tr.train().size() == 1);
}

TEST_CASE("checkpoint file round-trips verbatim") {
  TempDir dir;
  CheckpointData ck;
  ck.param_kind = 0;
  ck.run_seed = 77;
  ck.next_generation = 12;
  ck.clamp_eps = 1e-3;
  ck.params = {0.25, 0.5, 0.125};
  ck.config_text = "env = pole_balance\nseed = 77\n";
  const std::string path = (dir.path / "ck.bin").string();
  save_checkpoint(path, ck);
  CheckpointData back = load_checkpoint(path);
  CHECK(back.param_kind == ck.param_kind);
  CHECK(back.run_seed == ck.run_seed);
  CHECK(back.next_generation == ck.next_generation);
  CHECK(back.clamp_eps == ck.clamp_eps);
  CHECK(back.params == ck.params);
  CHECK(back.config_text == ck.config_text);
  CHECK_THROWS_AS(load_checkpoint((dir.path / "nope.bin").string()),
                  std::runtime_error);
}

TEST_CASE("ec_tr and es optimizers run end to end") {
  RunConfig cfg = pattern_cfg(12, 16, 3, 8);
  cfg.optimizer = "ec_tr";
  cfg.delta_per_param = 1e-4;
  Trainer tr(cfg);
  for (std::int64_t g = 0; g < 3; ++g) {
    GenerationLog log = tr.run_generation(g);
    CHECK(std::isfinite(log.kl_step));
  }

  RunConfig es = pole_cfg(15);
  es.optimizer = "es";
  es.pop_size = 8;
  Trainer tres(es);
  auto w0 = tres.weights();
  GenerationLog log = tres.run_generation(0);
  CHECK(log.kl_step == 0.0);  // no sampling distribution for es
  CHECK(tres.weights() != w0);
}

TEST_CASE("pole training logs a plausible spike rate") {
  RunConfig cfg = pole_cfg(16);
  Trainer tr(cfg);
  GenerationLog log = tr.run_generation(0);
  CHECK(log.spike_rate >= 0.0);
  CHECK(log.spike_rate <= 1.0);
}

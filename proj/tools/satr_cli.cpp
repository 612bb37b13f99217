// SPDX-License-Identifier: Apache-2.0
//
// satr command-line driver: train / eval / bench / energy.
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "satr/bitset.hpp"
#include "satr/config.hpp"
#include "satr/energy.hpp"
#include "satr/runner.hpp"

namespace {

// Mean of the spike_rate column (index 8) over a versioned run.csv.
double trace_spike_rate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  std::string line;
  double sum = 0.0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("generation,", 0) == 0)
      continue;
    std::istringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col == 8 && !cell.empty()) {
        sum += std::stod(cell);
        ++rows;
      }
      ++col;
    }
  }
  if (rows == 0)
    throw std::runtime_error("trace has no spike_rate rows: " + path);
  return sum / double(rows);
}

void print_energy_table(satr::EnergyParams base,
                        const std::vector<double>& pops, const char* label) {
  std::printf("%s (R = %.6g):\n", label, base.spike_rate);
  std::printf("  E_one = %.9e J  (%.3f mJ)\n", satr::energy_per_rollout(base),
              satr::energy_per_rollout(base) * 1e3);
  std::printf("  %-16s", "population");
  for (double p : pops) std::printf(" %10.0f", p);
  std::printf("\n  %-16s", "total [kJ]");
  for (double p : pops) {
    satr::EnergyParams ep = base;
    ep.population = p;
    std::printf(" %10.3f", satr::total_energy(ep) * 1e-3);
  }
  std::printf("\n");
}

int run_train(const std::string& config_path, const std::string& resume_path,
              long long seed_override, const std::string& optimizer_override,
              const std::string& out_override) {
  satr::Config file_cfg;
  satr::CheckpointData ck;
  bool resuming = false;
  if (!resume_path.empty()) {
    ck = satr::load_checkpoint(resume_path);
    resuming = true;
  }
  if (!config_path.empty())
    file_cfg = satr::Config::parse_file(config_path);
  else if (resuming && !ck.config_text.empty())
    file_cfg = satr::Config::parse_string(ck.config_text);
  else
    throw std::runtime_error("train needs --config (or --resume with an "
                             "embedded config)");
  if (seed_override >= 0) file_cfg.set("seed", std::to_string(seed_override));
  if (!optimizer_override.empty()) file_cfg.set("optimizer", optimizer_override);
  if (!out_override.empty()) file_cfg.set("out_dir", out_override);

  satr::RunConfig cfg = satr::RunConfig::from(file_cfg);
  satr::Trainer trainer(cfg, file_cfg.to_string());
  if (resuming) trainer.restore(ck);
  auto rows = trainer.train(&std::cerr);
  if (!rows.empty()) {
    const auto& last = rows.back();
    std::printf("final: generation=%" PRId64 " mean_return=%.17g", last.generation,
                last.mean_return);
    if (!std::isnan(last.eval_return))
      std::printf(" eval_return=%.17g", last.eval_return);
    std::printf("\n");
  }
  std::printf("wrote %s/run.csv and %s/checkpoint.bin\n", cfg.out_dir.c_str(),
              cfg.out_dir.c_str());
  return 0;
}

int run_eval(const std::string& ckpt_path, int episodes,
             const std::string& mode) {
  satr::CheckpointData ck = satr::load_checkpoint(ckpt_path);
  if (ck.config_text.empty())
    throw std::runtime_error("checkpoint carries no config text: " + ckpt_path);
  satr::Config file_cfg = satr::Config::parse_string(ck.config_text);
  satr::RunConfig cfg = satr::RunConfig::from(file_cfg);
  cfg.eval_episodes = episodes;
  if (!mode.empty()) cfg.eval_mode = mode;
  satr::Trainer trainer(cfg, ck.config_text);
  trainer.restore(ck);
  std::printf("eval_return=%.17g over %d episodes (%s mode)\n",
              trainer.evaluate(), episodes, cfg.eval_mode.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SATR: trust-region optimization of Bernoulli connectivity "
               "for recurrent spiking policies"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run the generation loop");
  std::string config_path, resume_path, optimizer_override, out_override;
  long long seed_override = -1;
  train->add_option("--config", config_path, "flat key-value config file");
  train->add_option("--seed", seed_override, "override config seed");
  train->add_option("--optimizer", optimizer_override,
                    "satr | ec | ec_tr | es");
  train->add_option("--out", out_override, "output directory");
  train->add_option("--resume", resume_path, "checkpoint to continue from");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt_path, eval_mode;
  int episodes = 128;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint.bin path")
      ->required();
  eval->add_option("--episodes", episodes, "evaluation episodes");
  eval->add_option("--eval-mode", eval_mode, "sample | map");

  // bench
  auto* bench = app.add_subcommand(
      "bench", "bit-packed vs dense float synaptic integration");
  std::vector<std::size_t> bench_d{256}, bench_rows{256};
  int bench_reps = 7;
  bench->add_option("--d", bench_d, "input widths in bits (comma-separated)")
      ->delimiter(',');
  bench->add_option("--rows", bench_rows, "matrix row counts (comma-separated)")
      ->delimiter(',');
  bench->add_option("--reps", bench_reps, "timing repetitions (median)");

  // energy
  auto* energy = app.add_subcommand("energy", "analytical on-chip estimate");
  double pop = 0.0;
  std::string trace_path;
  energy->add_option("--pop", pop, "population size (default: table row)");
  energy->add_option("--trace", trace_path,
                     "run.csv to measure the spike rate from");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train)
      return run_train(config_path, resume_path, seed_override,
                       optimizer_override, out_override);
    if (*eval) return run_eval(ckpt_path, episodes, eval_mode);
    if (*bench) {
      std::printf("d,rows,bitset_ns,dense_ns,ratio\n");
      for (std::size_t d : bench_d)
        for (std::size_t rows : bench_rows) {
          satr::BenchResult r = satr::bench_kernel(d, rows, bench_reps);
          std::printf("%zu,%zu,%.2f,%.2f,%.3f\n", d, rows, r.bitset_ns,
                      r.dense_f32_ns, r.ratio);
        }
      return 0;
    }
    // energy
    std::vector<double> pops = pop > 0
                                   ? std::vector<double>{pop}
                                   : std::vector<double>{1024, 2048, 4096, 8192};
    print_energy_table(satr::EnergyParams{}, pops, "assumed spike rate");
    if (!trace_path.empty()) {
      satr::EnergyParams measured;
      measured.spike_rate = trace_spike_rate(trace_path);
      print_energy_table(measured, pops, "measured spike rate");
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

// SPDX-License-Identifier: Apache-2.0
//
// Generation loop, rollout orchestration, evaluation
// protocol, CSV logging, and checkpointing.
//
// Determinism contract: every random draw is keyed by
// (run_seed, stream, generation, member/episode), so results are
// bit-identical across repeated runs and across worker counts.  All
// floating-point reductions happen in fixed index order on one thread.
#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "satr/bernoulli.hpp"
#include "satr/config.hpp"
#include "satr/env.hpp"
#include "satr/optimizers.hpp"
#include "satr/rng.hpp"
#include "satr/rsnn.hpp"
#include "satr/shaping.hpp"

namespace satr {

struct RunConfig {
  std::string env_name = "pole_balance";
  std::string optimizer = "satr";  // satr | ec | ec_tr | es
  int pop_size = 512;
  std::int64_t generations = 100;
  std::uint64_t seed = 1;

  double eta = 0.15;
  double delta_per_param = 1e-4;       // ec_tr budget c (delta_total = c d)
  bool tr_main_text_denominator = false;
  double es_sigma = 0.3;
  double es_weight_decay = 0.1;
  double rho_init = 0.5;
  double clamp_eps = kDefaultClampEps;

  int hidden = 256;
  double exc_ratio = 0.5;
  int substeps = 33;
  std::vector<int> substep_pattern;  // overrides `substeps` when non-empty

  std::int64_t horizon = 0;  // 0 -> environment default
  int pattern_d = 64;
  double pole_start_perturb = 0.05;
  int episodes_per_member = 1;

  std::int64_t eval_every = 10;
  int eval_episodes = 128;
  std::string eval_mode = "sample";  // sample | map

  std::string out_dir = ".";
  int workers = 1;

  static RunConfig from(const Config& c) {
    static const std::set<std::string> known = {
        "env",  "optimizer", "population", "generations", "seed",
        "eta",  "delta_per_param", "tr_main_text_denominator", "es_sigma",
        "es_weight_decay", "rho_init", "clamp_eps", "hidden", "exc_ratio",
        "substeps", "substep_pattern", "horizon", "pattern_d",
        "pole_start_perturb", "episodes_per_member", "eval_every",
        "eval_episodes", "eval_mode", "out_dir", "workers"};
    for (const auto& k : c.keys())
      if (!known.count(k))
        throw std::invalid_argument("unknown config key: " + k);
    RunConfig r;
    r.env_name = c.get_str("env", r.env_name);
    r.optimizer = c.get_str("optimizer", r.optimizer);
    r.pop_size = int(c.get_int("population", r.pop_size));
    r.generations = c.get_int("generations", r.generations);
    r.seed = std::uint64_t(c.get_int("seed", std::int64_t(r.seed)));
    r.eta = c.get_real("eta", r.eta);
    r.delta_per_param = c.get_real("delta_per_param", r.delta_per_param);
    r.tr_main_text_denominator =
        c.get_bool("tr_main_text_denominator", r.tr_main_text_denominator);
    r.es_sigma = c.get_real("es_sigma", r.es_sigma);
    r.es_weight_decay = c.get_real("es_weight_decay", r.es_weight_decay);
    r.rho_init = c.get_real("rho_init", r.rho_init);
    r.clamp_eps = c.get_real("clamp_eps", r.clamp_eps);
    r.hidden = int(c.get_int("hidden", r.hidden));
    r.exc_ratio = c.get_real("exc_ratio", r.exc_ratio);
    r.substeps = int(c.get_int("substeps", r.substeps));
    if (c.has("substep_pattern")) {
      std::istringstream in(c.get_str("substep_pattern", ""));
      std::string tok;
      while (std::getline(in, tok, ','))
        if (!tok.empty()) r.substep_pattern.push_back(std::stoi(tok));
    }
    r.horizon = c.get_int("horizon", r.horizon);
    r.pattern_d = int(c.get_int("pattern_d", r.pattern_d));
    r.pole_start_perturb =
        c.get_real("pole_start_perturb", r.pole_start_perturb);
    r.episodes_per_member =
        int(c.get_int("episodes_per_member", r.episodes_per_member));
    r.eval_every = c.get_int("eval_every", r.eval_every);
    r.eval_episodes = int(c.get_int("eval_episodes", r.eval_episodes));
    r.eval_mode = c.get_str("eval_mode", r.eval_mode);
    r.out_dir = c.get_str("out_dir", r.out_dir);
    r.workers = int(c.get_int("workers", r.workers));
    r.validate();
    return r;
  }

  void validate() const {
    if (pop_size < 2) throw std::invalid_argument("population must be >= 2");
    if (generations < 1)
      throw std::invalid_argument("generations must be >= 1");
    if (optimizer != "satr" && optimizer != "ec" && optimizer != "ec_tr" &&
        optimizer != "es")
      throw std::invalid_argument("unknown optimizer: " + optimizer);
    if (optimizer == "es" && pop_size % 2 != 0)
      throw std::invalid_argument("es uses mirrored sampling: population "
                                  "must be even");
    if (eval_mode != "sample" && eval_mode != "map")
      throw std::invalid_argument("eval_mode must be sample or map");
    if (episodes_per_member < 1)
      throw std::invalid_argument("episodes_per_member must be >= 1");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
    if (eval_episodes < 1)
      throw std::invalid_argument("eval_episodes must be >= 1");
  }

  std::unique_ptr<Environment> make_environment() const {
    return make_env(env_name, horizon, pattern_d,
                    /*pattern_seed=*/seed, pole_start_perturb);
  }

  Topology topology(const Environment& env) const {
    Topology t;
    t.d_in = env.obs_dim();
    t.d_h = hidden;
    t.d_out = env.action_dim();
    t.exc_ratio = exc_ratio;
    t.substeps = substeps;
    t.substep_pattern = substep_pattern;
    return t;
  }
};

struct GenerationLog {
  std::int64_t generation = 0;
  double mean_return = 0.0;
  double max_return = 0.0;
  double eval_return = std::numeric_limits<double>::quiet_NaN();  // if evaluated
  double grad_energy = 0.0;
  double kl_step = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double spike_rate = 0.0;
  double wall_ms = 0.0;  // console only; excluded from the CSV on purpose
};

namespace detail {

// Fixed-order pairwise summation: bit-reproducible and well-conditioned.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kCsvVersionLine = "# satr-run-csv v1";
inline constexpr const char* kCsvHeader =
    "generation,mean_return,max_return,eval_return,grad_energy,kl_step,"
    "rho_min,rho_max,spike_rate";

inline std::string csv_row(const GenerationLog& log) {
  using detail::format_g17;
  std::string row = std::to_string(log.generation);
  row += "," + format_g17(log.mean_return);
  row += "," + format_g17(log.max_return);
  row += ",";
  if (!std::isnan(log.eval_return)) row += format_g17(log.eval_return);
  row += "," + format_g17(log.grad_energy);
  row += "," + format_g17(log.kl_step);
  row += "," + format_g17(log.rho_min);
  row += "," + format_g17(log.rho_max);
  row += "," + format_g17(log.spike_rate);
  return row;
}

// ---------------------------------------------------------------------------
// Checkpoint: versioned little-endian binary layout (documented in README).
//   offset  size  field
//   0       8     magic "SATRCKPT"
//   8       4     u32 version (1)
//   12      4     u32 param_kind (0 = Bernoulli rho, 1 = ES real weights)
//   16      8     u64 run_seed
//   24      8     u64 next_generation
//   32      8     u64 d (parameter count)
//   40      8     f64 clamp_eps
//   48      8d    f64[d] parameters
//   48+8d   8     u64 config_len
//   56+8d   .     config text (the flat key-value document, verbatim)
// ---------------------------------------------------------------------------
struct CheckpointData {
  std::uint32_t param_kind = 0;
  std::uint64_t run_seed = 0;
  std::uint64_t next_generation = 0;
  double clamp_eps = kDefaultClampEps;
  std::vector<double> params;
  std::string config_text;
};

inline constexpr char kCheckpointMagic[8] = {'S', 'A', 'T', 'R',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

inline void save_checkpoint(const std::string& path,
                            const CheckpointData& ck) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint: " + path);
  auto put = [&](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), std::streamsize(n));
  };
  put(kCheckpointMagic, 8);
  const std::uint32_t version = kCheckpointVersion;
  put(&version, 4);
  put(&ck.param_kind, 4);
  put(&ck.run_seed, 8);
  put(&ck.next_generation, 8);
  const std::uint64_t d = ck.params.size();
  put(&d, 8);
  put(&ck.clamp_eps, 8);
  put(ck.params.data(), 8 * ck.params.size());
  const std::uint64_t clen = ck.config_text.size();
  put(&clen, 8);
  put(ck.config_text.data(), ck.config_text.size());
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), std::streamsize(n));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  };
  char magic[8];
  get(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint32_t version = 0;
  get(&version, 4);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);
  CheckpointData ck;
  get(&ck.param_kind, 4);
  get(&ck.run_seed, 8);
  get(&ck.next_generation, 8);
  std::uint64_t d = 0;
  get(&d, 8);
  get(&ck.clamp_eps, 8);
  ck.params.resize(d);
  if (d) get(ck.params.data(), 8 * d);
  std::uint64_t clen = 0;
  get(&clen, 8);
  ck.config_text.resize(clen);
  if (clen) get(ck.config_text.data(), clen);
  return ck;
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------
class Trainer {
 public:
  explicit Trainer(RunConfig cfg, std::string config_text = "")
      : cfg_(std::move(cfg)), config_text_(std::move(config_text)) {
    cfg_.validate();
    probe_env_ = cfg_.make_environment();
    scores_params_ = probe_env_->scores_parameters();
    if (scores_params_) {
      if (cfg_.optimizer == "es")
        throw std::invalid_argument(
            "es optimizes real network weights and cannot run on a "
            "parameter-scoring environment");
      dim_ = std::size_t(cfg_.pattern_d);
    } else {
      topo_ = cfg_.topology(*probe_env_);
      dim_ = topo_.d();
    }
    if (cfg_.optimizer == "es") {
      weights_.assign(dim_, 0.0);
    } else {
      rho_ = ProbVector::constant(dim_, cfg_.rho_init, cfg_.clamp_eps);
    }
  }

  // Resume from checkpoint state (parameters + generation cursor).
  void restore(const CheckpointData& ck) {
    if (ck.params.size() != dim_)
      throw std::runtime_error("checkpoint dimension mismatch");
    const bool want_es = cfg_.optimizer == "es";
    if ((ck.param_kind == 1) != want_es)
      throw std::runtime_error("checkpoint optimizer kind mismatch");
    if (want_es)
      weights_ = ck.params;
    else
      rho_ = ProbVector(ck.params, ck.clamp_eps);
    next_generation_ = std::int64_t(ck.next_generation);
  }

  std::size_t dim() const { return dim_; }
  std::int64_t next_generation() const { return next_generation_; }
  const ProbVector& rho() const { return rho_; }
  const std::vector<double>& weights() const { return weights_; }

  // Mean return of eval_episodes rollouts.  Each episode draws its own
  // connectivity (sample mode) or thresholds rho at 0.5 (map mode); all
  // keys live on the eval stream, so training RNG is untouched and the
  // value is identical across calls.
  double evaluate() const {
    const int e = cfg_.eval_episodes;
    std::vector<double> returns(e, 0.0);
    auto env = cfg_.make_environment();
    const bool es = cfg_.optimizer == "es";
    std::vector<std::uint8_t> map_bits;
    if (!es && cfg_.eval_mode == "map") {
      map_bits.resize(dim_);
      for (std::size_t i = 0; i < dim_; ++i) map_bits[i] = rho_[i] > 0.5;
    }
    for (int ep = 0; ep < e; ++ep) {
      const std::uint64_t env_seed = derive_key(cfg_.seed, kStreamEval,
                                                std::uint64_t(ep), 1);
      if (scores_params_) {
        std::vector<std::uint8_t> bits =
            cfg_.eval_mode == "map"
                ? map_bits
                : sample(rho_, SeedTag{derive_key(cfg_.seed, kStreamEval,
                                                  std::uint64_t(ep), 0)})
                      .bits;
        env->set_theta(bits.data(), bits.size());
        returns[ep] = run_episode(*env, nullptr, nullptr, env_seed);
      } else if (es) {
        DenseNetwork net(topo_, weights_);
        returns[ep] = run_episode(*env, &net, nullptr, env_seed);
      } else {
        ConnectivitySample theta =
            cfg_.eval_mode == "map"
                ? ConnectivitySample{map_bits, {}}
                : sample(rho_, SeedTag{derive_key(cfg_.seed, kStreamEval,
                                                  std::uint64_t(ep), 0)});
        BitsetNetwork net(topo_, theta);
        returns[ep] = run_episode(*env, nullptr, &net, env_seed);
      }
    }
    return detail::pairwise_sum(returns.data(), returns.size()) / double(e);
  }

  // One generation: sample N members, roll them out (possibly on several
  // threads), rank, estimate the natural gradient, step, clamp.  On any
  // worker failure the exception propagates and parameters stay unchanged.
  GenerationLog run_generation(std::int64_t gen) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = cfg_.pop_size;
    std::vector<double> raw(n, 0.0);
    std::vector<std::uint64_t> spikes(n, 0), substeps(n, 0);

    const bool es = cfg_.optimizer == "es";
    std::vector<ConnectivitySample> samples;
    std::vector<std::vector<double>> perturbations;
    if (es) {
      perturbations.resize(n);
      for (int m = 0; m < n; m += 2) {
        std::vector<double> eps(dim_);
        CounterRng r(derive_key(cfg_.seed, kStreamEs, std::uint64_t(gen),
                                std::uint64_t(m / 2)));
        for (auto& x : eps) x = r.next_normal();
        perturbations[m + 1].resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
          perturbations[m + 1][i] = -eps[i];
        perturbations[m] = std::move(eps);
      }
    } else {
      samples.resize(n);
      for (int m = 0; m < n; ++m)
        samples[m] = sample(rho_, SeedTag::from(cfg_.seed, std::uint64_t(gen),
                                                std::uint64_t(m)));
    }

    run_population(gen, samples, perturbations, raw, spikes, substeps);

    GenerationLog log;
    log.generation = gen;
    log.mean_return = detail::pairwise_sum(raw.data(), raw.size()) / n;
    log.max_return = raw[0];
    for (double v : raw) log.max_return = std::max(log.max_return, v);
    std::uint64_t spk = 0, sub = 0;
    for (int m = 0; m < n; ++m) {
      spk += spikes[m];
      sub += substeps[m];
    }
    log.spike_rate =
        sub == 0 ? 0.0 : double(spk) / (double(sub) * double(topo_.d_h));

    const std::vector<double> shaped = centered_rank(raw);
    if (es) {
      EsConfig ec{cfg_.eta, cfg_.es_sigma, cfg_.es_weight_decay};
      // members were rolled out at w + sigma eps: pass scaled perturbations
      std::vector<double> next = es_step(weights_, perturbations, shaped, ec);
      double lo = next[0], hi = next[0], energy = 0.0;
      for (double v : next) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      // signal energy of the raw ES gradient estimate (pre learning-rate)
      for (std::size_t i = 0; i < dim_; ++i) {
        double gi = 0.0;
        for (int m = 0; m < n; ++m) gi += shaped[m] * perturbations[m][i];
        gi /= double(n) * cfg_.es_sigma;
        energy += gi * gi;
      }
      log.grad_energy = energy;
      log.kl_step = 0.0;  // no sampling distribution: KL not defined
      log.rho_min = lo;
      log.rho_max = hi;
      weights_ = std::move(next);
    } else {
      NaturalGradient grad = natural_gradient_estimate(samples, shaped, rho_);
      std::vector<double> delta;
      if (cfg_.optimizer == "satr") {
        delta = satr_step(rho_, grad, SatrConfig{cfg_.eta});
      } else if (cfg_.optimizer == "ec") {
        delta = ec_step(rho_, grad, cfg_.eta);
      } else {
        delta = ec_tr_step(
            rho_, grad,
            TrConfig{cfg_.delta_per_param, cfg_.tr_main_text_denominator});
      }
      ProbVector next = apply_update(rho_, delta);
      std::vector<double> applied(dim_);
      for (std::size_t i = 0; i < dim_; ++i) applied[i] = next[i] - rho_[i];
      log.grad_energy = grad.energy;
      log.kl_step = kl_quadratic(rho_, applied);
      log.rho_min = *std::min_element(next.probs().begin(),
                                      next.probs().end());
      log.rho_max = *std::max_element(next.probs().begin(),
                                      next.probs().end());
      rho_ = std::move(next);
    }
    log.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return log;
  }

  // Full training run: G generations, periodic evaluation, CSV + checkpoint.
  std::vector<GenerationLog> train(std::ostream* console = nullptr) {
    std::filesystem::create_directories(cfg_.out_dir);
    const std::string csv_path = cfg_.out_dir + "/run.csv";
    std::ofstream csv;
    if (next_generation_ == 0) {
      csv.open(csv_path, std::ios::trunc);
      if (!csv) throw std::runtime_error("cannot open log: " + csv_path);
      csv << kCsvVersionLine << "\n" << kCsvHeader << "\n";
    } else {
      csv.open(csv_path, std::ios::app);
      if (!csv) throw std::runtime_error("cannot open log: " + csv_path);
    }
    std::vector<GenerationLog> rows;
    for (std::int64_t gen = next_generation_; gen < cfg_.generations; ++gen) {
      GenerationLog log = run_generation(gen);
      if (gen % cfg_.eval_every == 0 || gen == cfg_.generations - 1)
        log.eval_return = evaluate();
      csv << csv_row(log) << "\n";
      if (!csv) throw std::runtime_error("write failed: " + csv_path);
      if (console) {
        (*console) << "gen " << log.generation << ": mean="
                   << log.mean_return << " max=" << log.max_return;
        if (!std::isnan(log.eval_return))
          (*console) << " eval=" << log.eval_return;
        (*console) << " |g|2=" << log.grad_energy << " [" << int(log.wall_ms)
                   << " ms]\n";
      }
      rows.push_back(log);
      next_generation_ = gen + 1;
    }
    csv.flush();
    save_checkpoint(cfg_.out_dir + "/checkpoint.bin", checkpoint());
    return rows;
  }

  CheckpointData checkpoint() const {
    CheckpointData ck;
    ck.param_kind = cfg_.optimizer == "es" ? 1 : 0;
    ck.run_seed = cfg_.seed;
    ck.next_generation = std::uint64_t(next_generation_);
    ck.clamp_eps = cfg_.clamp_eps;
    ck.params = cfg_.optimizer == "es" ? weights_ : rho_.probs();
    ck.config_text = config_text_;
    return ck;
  }

  const RunConfig& config() const { return cfg_; }

 private:
  // Rolls out one episode; accumulates spike statistics when given a network.
  double run_episode(Environment& env, DenseNetwork* dense,
                     BitsetNetwork* bitset, std::uint64_t env_seed,
                     std::uint64_t* spike_out = nullptr,
                     std::uint64_t* substep_out = nullptr) const {
    std::vector<double> obs = env.reset(env_seed);
    if (scores_params_) {
      // one-step protocol: the env already holds theta
      auto res = env.step(std::vector<double>(env.action_dim(), 0.0));
      return res.reward;
    }
    LifState st(topo_);
    EngineScratch ws(topo_);
    std::vector<double> action(topo_.d_out, 0.0);
    double ret = 0.0;
    bool done = false;
    while (!done) {
      if (dense)
        dense->policy_step(st, ws, obs.data(), action.data());
      else
        bitset->policy_step(st, ws, obs.data(), action.data());
      StepResult res = env.step(action);
      ret += res.reward;
      obs = std::move(res.obs);
      done = res.done;
    }
    if (spike_out) *spike_out += st.spike_count;
    if (substep_out) *substep_out += st.substep_count;
    return ret;
  }

  // Fitness for member m at generation gen: mean over episodes_per_member
  // episodes whose env seeds are shared across members (common random
  // numbers), so members are ranked on identical start states.
  double member_fitness(Environment& env, std::int64_t gen, int member,
                        const std::vector<ConnectivitySample>& samples,
                        const std::vector<std::vector<double>>& perturbations,
                        std::uint64_t* spike_out,
                        std::uint64_t* substep_out) const {
    const int e = cfg_.episodes_per_member;
    double total = 0.0;
    if (scores_params_) {
      const auto& bits = samples[member].bits;
      env.set_theta(bits.data(), bits.size());
      for (int ep = 0; ep < e; ++ep)
        total += run_episode(env, nullptr, nullptr,
                             derive_key(cfg_.seed, kStreamEnv,
                                        std::uint64_t(gen), std::uint64_t(ep)));
      return total / e;
    }
    if (cfg_.optimizer == "es") {
      std::vector<double> w(weights_);
      const auto& eps = perturbations[member];
      for (std::size_t i = 0; i < dim_; ++i) w[i] += cfg_.es_sigma * eps[i];
      DenseNetwork net(topo_, w);
      for (int ep = 0; ep < e; ++ep)
        total += run_episode(env, &net, nullptr,
                             derive_key(cfg_.seed, kStreamEnv,
                                        std::uint64_t(gen), std::uint64_t(ep)),
                             spike_out, substep_out);
      return total / e;
    }
    BitsetNetwork net(topo_, samples[member]);
    for (int ep = 0; ep < e; ++ep)
      total += run_episode(env, nullptr, &net,
                           derive_key(cfg_.seed, kStreamEnv,
                                      std::uint64_t(gen), std::uint64_t(ep)),
                           spike_out, substep_out);
    return total / e;
  }

  void run_population(std::int64_t gen,
                      const std::vector<ConnectivitySample>& samples,
                      const std::vector<std::vector<double>>& perturbations,
                      std::vector<double>& raw,
                      std::vector<std::uint64_t>& spikes,
                      std::vector<std::uint64_t>& substeps) {
    const int n = cfg_.pop_size;
    const int w = std::min(cfg_.workers, n);
    auto work = [&](int lo, int hi, std::exception_ptr& err) {
      try {
        auto env = cfg_.make_environment();
        for (int m = lo; m < hi; ++m)
          raw[m] = member_fitness(*env, gen, m, samples, perturbations,
                                  &spikes[m], &substeps[m]);
      } catch (...) {
        err = std::current_exception();
      }
    };
    if (w == 1) {
      std::exception_ptr err;
      work(0, n, err);
      if (err) std::rethrow_exception(err);
      return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(w));
    const int chunk = (n + w - 1) / w;
    for (int k = 0; k < w; ++k) {
      const int lo = k * chunk, hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi, std::ref(errs[std::size_t(k)]));
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);  // generation aborted, rho unchanged
  }

  RunConfig cfg_;
  std::string config_text_;
  std::unique_ptr<Environment> probe_env_;
  bool scores_params_ = false;
  Topology topo_;
  std::size_t dim_ = 0;
  ProbVector rho_;
  std::vector<double> weights_;
  std::int64_t next_generation_ = 0;
};

}  // namespace satr

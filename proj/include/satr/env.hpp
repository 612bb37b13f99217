// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale environments.  All three are deterministic functions of
// (seed, action sequence); initial-state randomization is seed-driven so
// evaluation episodes are reproducible.
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "satr/rng.hpp"

namespace satr {

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  // Starts a fresh episode; the seed fully determines the initial state.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual StepResult step(const std::vector<double>& action) = 0;

  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual std::int64_t horizon() const = 0;

  // Environments that score the parameter vector directly (optimizer-only
  // mode) return true here and receive the bits before each episode.
  virtual bool scores_parameters() const { return false; }
  virtual void set_theta(const std::uint8_t*, std::size_t) {
    throw std::logic_error("environment does not take parameter bits");
  }

 protected:
  void require_action(const std::vector<double>& a) const {
    if (int(a.size()) != action_dim())
      throw std::invalid_argument("action dimension mismatch");
    for (double x : a)
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite action");
  }
};

// One-step episode scored as -Hamming(theta, target).  The policy is
// bypassed; the sampled parameter bits themselves are the "action".  This
// gives a closed-form expected return E[-H] = -sum_i (rho_i (1-theta*_i) +
// (1-rho_i) theta*_i), which the tests exercise by exhaustive enumeration.
class PatternMatchEnv final : public Environment {
 public:
  PatternMatchEnv(int d, std::vector<std::uint8_t> target)
      : d_(d), target_(std::move(target)) {
    if (d <= 0 || target_.size() != std::size_t(d))
      throw std::invalid_argument("pattern_match: target size mismatch");
    for (auto b : target_)
      if (b > 1) throw std::invalid_argument("pattern_match: non-binary target");
  }

  static std::vector<std::uint8_t> random_target(int d, std::uint64_t seed) {
    CounterRng r(derive_key(seed, kStreamEnv));
    std::vector<std::uint8_t> t(d);
    for (auto& b : t) b = r.next_uniform() < 0.5;
    return t;
  }

  std::vector<double> reset(std::uint64_t) override {
    done_ = false;
    return {0.0};
  }

  StepResult step(const std::vector<double>& action) override {
    if (done_) throw std::logic_error("step after episode end");
    require_action(action);
    done_ = true;
    return {{0.0}, -double(hamming_), true};
  }

  bool scores_parameters() const override { return true; }

  void set_theta(const std::uint8_t* bits, std::size_t n) override {
    if (n != std::size_t(d_))
      throw std::invalid_argument("pattern_match: theta size mismatch");
    hamming_ = 0;
    for (int i = 0; i < d_; ++i) hamming_ += bits[i] != target_[i];
  }

  // Direct scoring path used by the runner and by oracle tests.
  double score_bits(const std::uint8_t* bits, std::size_t n) {
    set_theta(bits, n);
    return -double(hamming_);
  }

  const std::vector<std::uint8_t>& target() const { return target_; }
  int obs_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::int64_t horizon() const override { return 1; }

 private:
  int d_;
  std::vector<std::uint8_t> target_;
  int hamming_ = 0;
  bool done_ = true;
};

// 2-D double integrator.  obs = (position - goal, velocity); action is an
// acceleration clipped to [-1,1]^2; reward per step is
// -|position - goal| - 0.01 |action|^2, undiscounted, fixed horizon.
// The seed places the goal on the unit circle; the start is the origin.
class PointmassReachEnv final : public Environment {
 public:
  explicit PointmassReachEnv(std::int64_t horizon = 200) : horizon_(horizon) {}

  std::vector<double> reset(std::uint64_t seed) override {
    CounterRng r(derive_key(seed));
    const double phi = 2.0 * kPi * r.next_uniform();
    goal_[0] = std::cos(phi);
    goal_[1] = std::sin(phi);
    pos_[0] = pos_[1] = 0.0;
    vel_[0] = vel_[1] = 0.0;
    t_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(const std::vector<double>& action) override {
    if (done_) throw std::logic_error("step after episode end");
    require_action(action);
    double cost = 0.0;
    for (int i = 0; i < 2; ++i) {
      double a = std::clamp(action[i], -1.0, 1.0);
      cost += 0.01 * a * a;
      vel_[i] += a * kDt;  // semi-implicit: velocity first
      pos_[i] += vel_[i] * kDt;
    }
    const double dx = pos_[0] - goal_[0], dy = pos_[1] - goal_[1];
    const double reward = -std::sqrt(dx * dx + dy * dy) - cost;
    done_ = ++t_ >= horizon_;
    return {observe(), reward, done_};
  }

  int obs_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  std::int64_t horizon() const override { return horizon_; }

  static constexpr double kDt = 0.05;

 private:
  std::vector<double> observe() const {
    return {pos_[0] - goal_[0], pos_[1] - goal_[1], vel_[0], vel_[1]};
  }

  static constexpr double kPi = 3.14159265358979323846;
  std::int64_t horizon_;
  double pos_[2]{}, vel_[2]{}, goal_[2]{};
  std::int64_t t_ = 0;
  bool done_ = true;
};

// Cart-pole with a continuous force action F = 10 * clip(a, -1, 1), the
// classic parameter set, and fixed-step semi-implicit Euler at 0.02 s.
// Reward is +1 per step upright; the episode ends when |x| > 2.4,
// |theta| > 12 degrees, or the horizon is reached.  reset() perturbs all
// four state variables uniformly in [-start_perturb, start_perturb]; a
// perturbation of zero leaves the system at the unstable equilibrium,
// which zero force preserves for the full horizon.
class PoleBalanceEnv final : public Environment {
 public:
  explicit PoleBalanceEnv(std::int64_t horizon = 1000,
                          double start_perturb = 0.05)
      : horizon_(horizon), start_perturb_(start_perturb) {}

  std::vector<double> reset(std::uint64_t seed) override {
    CounterRng r(derive_key(seed));
    for (auto& v : state_)
      v = start_perturb_ * (2.0 * r.next_uniform() - 1.0);
    t_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(const std::vector<double>& action) override {
    if (done_) throw std::logic_error("step after episode end");
    require_action(action);
    const double force = kForceMag * std::clamp(action[0], -1.0, 1.0);
    double &x = state_[0], &xd = state_[1], &th = state_[2], &thd = state_[3];
    const double sinth = std::sin(th), costh = std::cos(th);
    const double temp =
        (force + kMassPole * kLength * thd * thd * sinth) / kMassTotal;
    const double thacc =
        (kGravity * sinth - costh * temp) /
        (kLength * (4.0 / 3.0 - kMassPole * costh * costh / kMassTotal));
    const double xacc = temp - kMassPole * kLength * thacc * costh / kMassTotal;
    xd += kTau * xacc;  // semi-implicit: velocities first
    x += kTau * xd;
    thd += kTau * thacc;
    th += kTau * thd;
    ++t_;
    const bool fell = std::abs(x) > kXLimit || std::abs(th) > kThetaLimit;
    done_ = fell || t_ >= horizon_;
    return {observe(), fell ? 0.0 : 1.0, done_};
  }

  int obs_dim() const override { return 4; }
  int action_dim() const override { return 1; }
  std::int64_t horizon() const override { return horizon_; }

  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kMassTotal = kMassCart + kMassPole;
  static constexpr double kLength = 0.5;  // half pole length
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;

 private:
  std::vector<double> observe() const {
    // normalized so each component is O(1) over the reachable set
    return {state_[0] / kXLimit, state_[1] / 3.0, state_[2] / kThetaLimit,
            state_[3] / 3.0};
  }

  std::int64_t horizon_;
  double start_perturb_;
  double state_[4]{};
  std::int64_t t_ = 0;
  bool done_ = true;
};

// Factory keyed by the config `env` value.
inline std::unique_ptr<Environment> make_env(const std::string& name,
                                             std::int64_t horizon,
                                             int pattern_d,
                                             std::uint64_t pattern_seed,
                                             double pole_start_perturb = 0.05) {
  if (name == "pattern_match")
    return std::make_unique<PatternMatchEnv>(
        pattern_d, PatternMatchEnv::random_target(pattern_d, pattern_seed));
  if (name == "pointmass_reach")
    return std::make_unique<PointmassReachEnv>(horizon > 0 ? horizon : 200);
  if (name == "pole_balance")
    return std::make_unique<PoleBalanceEnv>(horizon > 0 ? horizon : 1000,
                                            pole_start_perturb);
  throw std::invalid_argument("unknown env: " + name);
}

}  // namespace satr

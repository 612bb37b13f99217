// SPDX-License-Identifier: Apache-2.0
//
// The four update rules.
//
//   satr_step   delta = eta * sqrt(rho(1-rho)) . g
//   ec_step     baseline:  delta = eta * g
//   ec_tr_step  closed-form step under a fixed total KL budget
//   es_step     OpenAI-ES step over real-valued weights
//
// All are pure functions: they return the displacement (or new weights) and
// never mutate their inputs.  apply_update() adds the displacement and
// re-clamps.

#ifndef SATR_OPTIMIZERS_HPP_
#define SATR_OPTIMIZERS_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include "satr/bernoulli.hpp"
#include "satr/shaping.hpp"

namespace satr {

struct SatrConfig {
  double eta = 0.15;  // eta = sqrt(2 delta): per-coordinate KL budget scale
};

struct TrConfig {
  double delta_per_param = 0.0;  // c; total budget delta_total = c * d
  // The appendix derivation yields sqrt(g^T F g) in the denominator when the
  // step is written in terms of the natural gradient g; the main text prints
  // sqrt(g^T F^{-1} g).  Only the former satisfies the active-constraint
  // identity (1/2) delta^T F delta = delta_total, so it is the default.
  bool main_text_denominator = false;
};

struct EsConfig {
  double eta = 0.15;
  double sigma = 0.3;
  double weight_decay = 0.1;
};

// SATR update.  By construction
// kl_quadratic(rho, delta) = (eta^2/2) ||g||^2, independent of rho.
inline std::vector<double> satr_step(const ProbVector& rho,
                                     const NaturalGradient& grad,
                                     const SatrConfig& cfg) {
  if (grad.g.size() != rho.size())
    throw std::invalid_argument("satr_step: dimension mismatch");
  if (!(cfg.eta > 0)) throw std::invalid_argument("satr_step: eta must be > 0");
  std::vector<double> delta(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    delta[i] = cfg.eta * std::sqrt(rho[i] * (1.0 - rho[i])) * grad.g[i];
  return delta;
}

// Baseline EC update: delta = eta g.  Its quadratic KL is
// (eta^2/2) sum g_i^2 / (rho_i(1-rho_i)) and blows up near the boundary;
// kept as the comparison baseline.
inline std::vector<double> ec_step(const ProbVector& rho,
                                   const NaturalGradient& grad, double eta) {
  if (grad.g.size() != rho.size())
    throw std::invalid_argument("ec_step: dimension mismatch");
  std::vector<double> delta(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) delta[i] = eta * grad.g[i];
  return delta;
}

// Fixed-budget trust-region EC: scales the natural-gradient
// direction so the whole-update quadratic KL equals delta_total = c d.
// A zero-signal generation (g = 0) yields a zero step; *no_signal is set.
inline std::vector<double> ec_tr_step(const ProbVector& rho,
                                      const NaturalGradient& grad,
                                      const TrConfig& cfg,
                                      bool* no_signal = nullptr) {
  if (grad.g.size() != rho.size())
    throw std::invalid_argument("ec_tr_step: dimension mismatch");
  if (!(cfg.delta_per_param > 0))
    throw std::invalid_argument("ec_tr_step: delta_per_param must be > 0");
  const std::size_t d = rho.size();
  const double delta_total = cfg.delta_per_param * double(d);
  if (no_signal) *no_signal = false;
  double quad = 0.0;  // g^T F g  (or g^T F^{-1} g under the compat flag)
  for (std::size_t i = 0; i < d; ++i) {
    double r = rho[i] * (1.0 - rho[i]);
    double f = cfg.main_text_denominator ? r : 1.0 / r;
    quad += grad.g[i] * grad.g[i] * f;
  }
  std::vector<double> delta(d, 0.0);
  if (quad <= 0.0) {
    if (no_signal) *no_signal = true;
    return delta;
  }
  const double scale = std::sqrt(2.0 * delta_total) / std::sqrt(quad);
  for (std::size_t i = 0; i < d; ++i) delta[i] = scale * grad.g[i];
  return delta;
}

// OpenAI-ES update over real weights:
//   w' = w + (eta / (N sigma)) sum_n shaped_n eps_n  -  eta wd w
// Perturbations are drawn by the caller (mirrored pairs welcome; the
// estimator is agnostic).
inline std::vector<double> es_step(
    const std::vector<double>& weights,
    const std::vector<std::vector<double>>& perturbations,
    const std::vector<double>& shaped, const EsConfig& cfg) {
  const std::size_t n = perturbations.size();
  if (shaped.size() != n)
    throw std::invalid_argument("es_step: population size mismatch");
  if (n == 0) throw std::invalid_argument("es_step: empty population");
  if (!(cfg.sigma > 0)) throw std::invalid_argument("es_step: sigma must be > 0");
  const std::size_t m = weights.size();
  std::vector<double> acc(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (perturbations[k].size() != m)
      throw std::invalid_argument("es_step: perturbation size mismatch");
    const double w = shaped[k];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) acc[i] += w * perturbations[k][i];
  }
  const double lr = cfg.eta / (double(n) * cfg.sigma);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = weights[i] + lr * acc[i] - cfg.eta * cfg.weight_decay * weights[i];
  return out;
}

// rho <- clamp(rho + delta).
inline ProbVector apply_update(const ProbVector& rho,
                               const std::vector<double>& delta) {
  if (delta.size() != rho.size())
    throw std::invalid_argument("apply_update: dimension mismatch");
  std::vector<double> next(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) next[i] = rho[i] + delta[i];
  return ProbVector(std::move(next), rho.clamp_eps());
}

}  // namespace satr

#endif  // SATR_OPTIMIZERS_HPP_

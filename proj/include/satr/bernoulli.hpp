// SPDX-License-Identifier: Apache-2.0
//
// Factorized Bernoulli sampling distribution over binary connectivities:
// sampling, score function, Fisher information, exact and quadratic KL,
// boundary clamping.  p_rho(theta) = prod_i Bern(theta_i; rho_i).

#ifndef SATR_BERNOULLI_HPP_
#define SATR_BERNOULLI_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "satr/rng.hpp"

namespace satr {

constexpr double kDefaultClampEps = 1e-3;

// Parameter vector rho in (0,1)^d.  Construction clamps, so every live
// instance satisfies eps <= rho_i <= 1-eps.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<double> probs, double clamp_eps = kDefaultClampEps)
      : p_(std::move(probs)), eps_(clamp_eps) {
    if (!(eps_ > 0.0 && eps_ < 0.5))
      throw std::invalid_argument("clamp_eps must lie in (0, 0.5)");
    for (double& x : p_) x = project(x);
  }
  static ProbVector constant(std::size_t d, double value,
                             double clamp_eps = kDefaultClampEps) {
    return ProbVector(std::vector<double>(d, value), clamp_eps);
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }
  double clamp_eps() const { return eps_; }

 private:
  double project(double x) const {
    if (x < eps_) return eps_;
    if (x > 1.0 - eps_) return 1.0 - eps_;
    return x;
  }
  std::vector<double> p_;
  double eps_ = kDefaultClampEps;
};

inline ProbVector clamp(const std::vector<double>& raw, double eps) {
  return ProbVector(raw, eps);
}

// Identifies one population member's draw; regenerating with the same tag
// and rho yields identical bits.
struct SeedTag {
  std::uint64_t key;  // derive_key(run_seed, kStreamSample, generation, member)

  static SeedTag from(std::uint64_t run_seed, std::uint64_t generation,
                      std::uint64_t member) {
    return SeedTag{derive_key(run_seed, kStreamSample, generation, member)};
  }
};

struct ConnectivitySample {
  std::vector<std::uint8_t> bits;  // each in {0,1}
  SeedTag seed_tag;
};

// Bit i depends only on (seed_tag, i): random access into the counter
// stream, so sampling order (and worker scheduling) cannot matter.
inline ConnectivitySample sample(const ProbVector& rho, SeedTag tag) {
  ConnectivitySample out;
  out.seed_tag = tag;
  const std::size_t d = rho.size();
  out.bits.resize(d);
  std::size_t i = 0;
  // philox emits two 64-bit lanes per block; bits 2i and 2i+1 share a block
  for (; i + 1 < d; i += 2) {
    Philox2x64Block b = philox2x64(i >> 1, 0, tag.key);
    out.bits[i] = uniform01(b.x0) <= rho[i] ? 1 : 0;
    out.bits[i + 1] = uniform01(b.x1) <= rho[i + 1] ? 1 : 0;
  }
  if (i < d)
    out.bits[i] = uniform01(philox2x64(i >> 1, 0, tag.key).x0) <= rho[i] ? 1 : 0;
  return out;
}

// Score function: component i is (theta_i - rho_i) / (rho_i (1-rho_i)).
inline std::vector<double> score(const ProbVector& rho,
                                 const ConnectivitySample& theta) {
  if (theta.bits.size() != rho.size())
    throw std::invalid_argument("score: dimension mismatch");
  std::vector<double> s(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    s[i] = (double(theta.bits[i]) - rho[i]) / (rho[i] * (1.0 - rho[i]));
  return s;
}

// Diagonal Fisher information: 1 / (rho_i (1-rho_i)).
inline std::vector<double> fisher_diag(const ProbVector& rho) {
  std::vector<double> f(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    f[i] = 1.0 / (rho[i] * (1.0 - rho[i]));
  return f;
}

// Exact KL divergence between factorized Bernoulli vectors (nats).
inline double kl_exact(const ProbVector& rho, const ProbVector& rho2) {
  if (rho.size() != rho2.size())
    throw std::invalid_argument("kl_exact: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double p = rho[i], q = rho2[i];
    kl += p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  return kl;
}

// Second-order (Fisher) expansion of the KL under rho -> rho + delta:
// (1/2) sum_i delta_i^2 / (rho_i (1-rho_i)).
inline double kl_quadratic(const ProbVector& rho,
                           const std::vector<double>& delta) {
  if (delta.size() != rho.size())
    throw std::invalid_argument("kl_quadratic: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    kl += delta[i] * delta[i] / (rho[i] * (1.0 - rho[i]));
  return 0.5 * kl;
}

}  // namespace satr

#endif  // SATR_BERNOULLI_HPP_

// SPDX-License-Identifier: Apache-2.0
//
// Centered-rank fitness shaping and the population natural-gradient
// estimator.

#ifndef SATR_SHAPING_HPP_
#define SATR_SHAPING_HPP_

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "satr/bernoulli.hpp"

namespace satr {

// shaped_n = (rank(raw_n) - 1)/(N - 1) - 1/2, ranks 1-based, ties get the
// arithmetic mean of the rank positions they span.  Output lies in
// [-1/2, 1/2], sums to zero, and depends on raw only through its ordering.
inline std::vector<double> centered_rank(const std::vector<double>& raw) {
  const std::size_t n = raw.size();
  if (n < 2) throw std::invalid_argument("population too small to rank");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  std::vector<double> shaped(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && raw[order[j + 1]] == raw[order[i]]) ++j;
    // positions i..j (0-based) share the value; average 1-based rank:
    double avg_rank = 0.5 * (double(i + 1) + double(j + 1));
    double s = (avg_rank - 1.0) / double(n - 1) - 0.5;
    for (std::size_t k = i; k <= j; ++k) shaped[order[k]] = s;
    i = j + 1;
  }
  return shaped;
}

// Population estimate g of the natural gradient and its signal energy ||g||^2.
struct NaturalGradient {
  std::vector<double> g;
  double energy = 0.0;
  int pop_size = 0;

  static NaturalGradient from(std::vector<double> grad, int n) {
    NaturalGradient out;
    out.g = std::move(grad);
    out.pop_size = n;
    out.energy = 0.0;
    for (double x : out.g) out.energy += x * x;
    return out;
  }
};

// g_i = (1/N) sum_n shaped_n (theta^(n)_i - rho_i).
// Deterministic reduction: members accumulated in index order regardless of
// which worker produced which rollout.
inline NaturalGradient natural_gradient_estimate(
    const std::vector<ConnectivitySample>& samples,
    const std::vector<double>& shaped, const ProbVector& rho) {
  const std::size_t n = samples.size();
  if (shaped.size() != n)
    throw std::invalid_argument("natural_gradient_estimate: N mismatch");
  const std::size_t d = rho.size();
  std::vector<double> g(d, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (samples[m].bits.size() != d)
      throw std::invalid_argument("natural_gradient_estimate: d mismatch");
    const double w = shaped[m];
    if (w == 0.0) continue;
    const std::uint8_t* bits = samples[m].bits.data();
    for (std::size_t i = 0; i < d; ++i)
      g[i] += w * (double(bits[i]) - rho[i]);
  }
  const double inv_n = 1.0 / double(n);
  for (double& x : g) x *= inv_n;
  return NaturalGradient::from(std::move(g), int(n));
}

}  // namespace satr

#endif  // SATR_SHAPING_HPP_

// SPDX-License-Identifier: Apache-2.0
//
// Analytical on-chip energy model: operation counts times published
// energy-per-operation values for a representative neuromorphic chip.
// Intended for order-of-magnitude comparison, not measured hardware energy.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace satr {

// Energy-per-operation and network/training parameters.  Energies are in
// picojoules at this boundary and converted to SI joules inside the
// estimator.  Defaults reproduce the reference table exactly.
struct EnergyParams {
  double p_s_pj = 23.6;  // per synaptic spike op
  double p_w_pj = 1.7;   // within-tile spike delivery, amortized per connection
  double p_u_pj = 81.0;  // per neuron update
  double generations = 2000;   // G
  double population = 1024;    // P
  double timesteps = 33200;    // S, per rollout (substep resolution)
  double neurons = 256;        // N
  double spike_rate = 0.025;   // R, avg spikes per neuron per timestep
  double connections = 128;    // C, per neuron
  double update_ops = 4;       // I, per neuron per timestep

  void validate() const {
    const double fields[] = {p_s_pj,      p_w_pj,  p_u_pj,     generations,
                             population,  timesteps, neurons,  spike_rate,
                             connections, update_ops};
    for (double f : fields)
      if (!(f >= 0.0))
        throw std::invalid_argument("energy parameters must be nonnegative");
  }
};

// E_one = P_u N I S + (P_s + C P_w) N R S, in joules.
inline double energy_per_rollout(const EnergyParams& p) {
  p.validate();
  const double upd_pj = p.p_u_pj * p.neurons * p.update_ops * p.timesteps;
  const double syn_pj = (p.p_s_pj + p.connections * p.p_w_pj) * p.neurons *
                        p.spike_rate * p.timesteps;
  return (upd_pj + syn_pj) * 1e-12;
}

// E_tot = E_one G P: one rollout per individual per generation.
inline double total_energy(const EnergyParams& p) {
  return energy_per_rollout(p) * p.generations * p.population;
}

// Measured average spike rate from a trace of per-substep population spike
// counts: total spikes / (N * S).  Lets R be measured from actual rollouts
// instead of assumed.
inline double measured_spike_rate(const std::vector<std::uint64_t>& trace,
                                  std::int64_t neurons) {
  if (trace.empty()) throw std::invalid_argument("empty spike trace");
  if (neurons <= 0) throw std::invalid_argument("neurons must be positive");
  std::uint64_t total = 0;
  for (auto c : trace) total += c;
  return double(total) / (double(neurons) * double(trace.size()));
}

}  // namespace satr

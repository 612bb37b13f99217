// SPDX-License-Identifier: Apache-2.0
//
// LIF recurrent spiking policy: linear read-in current injection, one
// recurrent binary-connectivity spiking layer with Dale's-law signs, leaky
// linear readout.  Runs K substeps of dt=0.5 ms per environment step.
//
// Two engines share one substep routine:
//
//   BitsetNetwork  packs the connectivity and integrates spikes with
//                  AND+popcount (the production path);
//   DenseNetwork   keeps real-valued matrices and plain loops — it is the
//                  testing oracle for the bitset path and the execution
//                  engine for the real-weight ES baseline.
//
// Equivalence argument: synaptic sums are integer counts (<= d_h), which
// both engines produce exactly (popcount vs sums of +-1.0 in double), and
// the scalar neuron update is the same inlined code for both, so spike
// trains and actions agree bit-for-bit.  Tests assert this; it is not a
// tolerance comparison.
//
// Parameter layout of theta (row-major blocks):
//   [read-in  d_h x d_in] [recurrent d_h x d_h] [readout d_out x d_h]
// Hidden neuron i is excitatory iff i < floor(exc_ratio * d_h).  Dale signs
// apply to synapses whose presynaptic side is a hidden neuron (recurrent
// and readout); read-in weights are unsigned — observations carry sign.

#ifndef SATR_RSNN_HPP_
#define SATR_RSNN_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "satr/bernoulli.hpp"
#include "satr/bitset.hpp"

namespace satr {

struct Topology {
  int d_in = 4;
  int d_h = 256;
  int d_out = 1;
  double exc_ratio = 0.5;
  double dt = 0.5;        // ms
  double tau_syn = 5.0;   // ms
  double tau_m = 10.0;    // ms
  double tau_out = 10.0;  // ms
  double v_th = 1.0;
  int substeps = 33;                 // K per environment step
  std::vector<int> substep_pattern;  // optional, e.g. {33,33,33,33,34}

  int n_exc() const { return int(exc_ratio * d_h); }
  std::size_t d() const {
    return std::size_t(d_in) * d_h + std::size_t(d_h) * d_h +
           std::size_t(d_h) * d_out;
  }
  double alpha_syn() const { return std::exp(-dt / tau_syn); }
  double alpha_m() const { return std::exp(-dt / tau_m); }
  double alpha_out() const { return std::exp(-dt / tau_out); }
  // variance-preserving scale factors
  double r_in() const { return 0.15 * tau_m * std::sqrt(2.0 / d_in); }
  double r_h() const { return (tau_m / tau_syn) * std::sqrt(2.0 / d_h); }
  double r_out() const { return 5.0 * tau_out * std::sqrt(2.0 / d_h); }

  int substeps_at(std::uint64_t env_step) const {
    if (substep_pattern.empty()) return substeps;
    return substep_pattern[env_step % substep_pattern.size()];
  }
};

struct LifState {
  std::vector<double> v, i_syn, y;
  std::vector<std::uint8_t> s;
  std::uint64_t env_step = 0;
  std::uint64_t spike_count = 0;   // accumulated over the rollout
  std::uint64_t substep_count = 0;

  explicit LifState(const Topology& t)
      : v(t.d_h, 0.0), i_syn(t.d_h, 0.0), y(t.d_out, 0.0), s(t.d_h, 0) {}

  void reset() {
    std::fill(v.begin(), v.end(), 0.0);
    std::fill(i_syn.begin(), i_syn.end(), 0.0);
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(s.begin(), s.end(), 0);
    env_step = 0;
    spike_count = 0;
    substep_count = 0;
  }
};

inline LifState reset(LifState state) {
  state.reset();
  return state;
}

// Per-rollout scratch buffers; thread-confined like LifState.
struct EngineScratch {
  std::vector<double> icur, rec, outc;
  std::vector<std::uint64_t> packed_s;  // spike words for the bitset path

  explicit EngineScratch(const Topology& t)
      : icur(t.d_h, 0.0),
        rec(t.d_h, 0.0),
        outc(t.d_out, 0.0),
        packed_s((t.d_h + 63) / 64, 0) {}
};

namespace detail {

// One environment step = K LIF substeps.  Net must provide topo(),
// input_current(), integrate_recurrent(), integrate_readout().  This is the
// single scalar-dynamics code path both engines execute.
template <class Net>
inline void policy_step_impl(const Net& net, LifState& st, EngineScratch& ws,
                             const double* obs, double* action) {
  const Topology& t = net.topo();
  for (int i = 0; i < t.d_in; ++i)
    if (!std::isfinite(obs[i]))
      throw std::invalid_argument("policy_step: non-finite observation");

  const double a_syn = t.alpha_syn(), a_m = t.alpha_m(), a_out = t.alpha_out();
  const double dt = t.dt, rh = t.r_h(), rout = t.r_out(), vth = t.v_th;
  const int k_sub = t.substeps_at(st.env_step);

  net.input_current(obs, ws.icur.data());  // R_in * (W_in obs), per neuron

  for (int k = 0; k < k_sub; ++k) {
    net.integrate_recurrent(st, ws);  // signed counts from previous spikes
    std::uint64_t spikes = 0;
    for (int j = 0; j < t.d_h; ++j) {
      st.i_syn[j] = a_syn * st.i_syn[j] + rh * ws.rec[j];
      double v = a_m * st.v[j] + st.i_syn[j] * dt + ws.icur[j] * dt;
      if (v >= vth) {
        st.s[j] = 1;
        st.v[j] = 0.0;
        ++spikes;
      } else {
        st.s[j] = 0;
        st.v[j] = v;
      }
    }
    st.spike_count += spikes;
    net.integrate_readout(st, ws);
    for (int o = 0; o < t.d_out; ++o)
      st.y[o] = a_out * st.y[o] + rout * ws.outc[o] * dt;
  }
  st.substep_count += std::uint64_t(k_sub);
  st.env_step += 1;
  for (int o = 0; o < t.d_out; ++o) action[o] = st.y[o];
}

}  // namespace detail

// Production engine: packed connectivity, AND+popcount integration.
// Word width is fixed at 64 here; the packed containers themselves support
// 32-bit words (exercised in the kernel tests).
class BitsetNetwork {
  using Word = std::uint64_t;

 public:
  BitsetNetwork(const Topology& topo, const ConnectivitySample& theta)
      : topo_(topo) {
    if (theta.bits.size() != topo.d())
      throw std::invalid_argument("instantiate: theta size mismatch");
    const int dh = topo.d_h, din = topo.d_in, dout = topo.d_out;
    const int ne = topo.n_exc();
    const std::uint8_t* bits = theta.bits.data();

    w_in_.assign(bits, bits + std::size_t(dh) * din);
    const std::uint8_t* rec = bits + std::size_t(dh) * din;
    const std::uint8_t* out = rec + std::size_t(dh) * dh;

    std::vector<std::uint8_t> exc(std::size_t(dh) * dh, 0),
        inh(std::size_t(dh) * dh, 0);
    for (std::size_t i = 0; i < exc.size(); ++i) {
      int pre = int(i % dh);
      (pre < ne ? exc : inh)[i] = rec[i];
    }
    rec_exc_ = PackedBitMatrix<Word>::pack(exc.data(), dh, dh);
    rec_inh_ = PackedBitMatrix<Word>::pack(inh.data(), dh, dh);

    std::vector<std::uint8_t> oexc(std::size_t(dout) * dh, 0),
        oinh(std::size_t(dout) * dh, 0);
    for (std::size_t i = 0; i < oexc.size(); ++i) {
      int pre = int(i % dh);
      (pre < ne ? oexc : oinh)[i] = out[i];
    }
    out_exc_ = PackedBitMatrix<Word>::pack(oexc.data(), dout, dh);
    out_inh_ = PackedBitMatrix<Word>::pack(oinh.data(), dout, dh);
  }

  const Topology& topo() const { return topo_; }

  void input_current(const double* obs, double* icur) const {
    const double rin = topo_.r_in();
    for (int j = 0; j < topo_.d_h; ++j) {
      const std::uint8_t* row = w_in_.data() + std::size_t(j) * topo_.d_in;
      double acc = 0.0;
      for (int i = 0; i < topo_.d_in; ++i)
        if (row[i]) acc += obs[i];
      icur[j] = rin * acc;
    }
  }

  void integrate_recurrent(const LifState& st, EngineScratch& ws) const {
    pack_spikes(st, ws);
    integrate_counts(rec_exc_, rec_inh_, ws.packed_s.data(), ws.rec.data());
  }

  void integrate_readout(const LifState& st, EngineScratch& ws) const {
    pack_spikes(st, ws);
    integrate_counts(out_exc_, out_inh_, ws.packed_s.data(), ws.outc.data());
  }

  void policy_step(LifState& st, EngineScratch& ws, const double* obs,
                   double* action) const {
    detail::policy_step_impl(*this, st, ws, obs, action);
  }

 private:
  void pack_spikes(const LifState& st, EngineScratch& ws) const {
    std::fill(ws.packed_s.begin(), ws.packed_s.end(), 0ull);
    for (int i = 0; i < topo_.d_h; ++i)
      if (st.s[i]) ws.packed_s[i >> 6] |= 1ull << (i & 63);
  }

  void integrate_counts(const PackedBitMatrix<Word>& exc,
                        const PackedBitMatrix<Word>& inh,
                        const Word* spike_words, double* out) const {
    const std::size_t nw = exc.words_per_row();
    for (std::size_t r = 0; r < exc.rows(); ++r) {
      std::int64_t c = detail::popcount_dot_words(exc.row(r), spike_words, nw) -
                       detail::popcount_dot_words(inh.row(r), spike_words, nw);
      out[r] = double(c);
    }
  }

  Topology topo_;
  std::vector<std::uint8_t> w_in_;
  PackedBitMatrix<Word> rec_exc_, rec_inh_;
  PackedBitMatrix<Word> out_exc_, out_inh_;
};

// Dense oracle / ES engine: real-valued weights, plain loops.
class DenseNetwork {
 public:
  // Binary-connectivity construction (oracle for BitsetNetwork).
  DenseNetwork(const Topology& topo, const ConnectivitySample& theta)
      : DenseNetwork(topo, signed_weights(topo, theta)) {}

  // Real-weight construction (ES baseline); weights uses the theta layout.
  DenseNetwork(const Topology& topo, const std::vector<double>& weights)
      : topo_(topo) {
    if (weights.size() != topo.d())
      throw std::invalid_argument("DenseNetwork: weight size mismatch");
    const std::size_t din_block = std::size_t(topo.d_h) * topo.d_in;
    const std::size_t rec_block = std::size_t(topo.d_h) * topo.d_h;
    w_in_.assign(weights.begin(), weights.begin() + din_block);
    w_rec_.assign(weights.begin() + din_block,
                  weights.begin() + din_block + rec_block);
    w_out_.assign(weights.begin() + din_block + rec_block, weights.end());
  }

  const Topology& topo() const { return topo_; }

  void input_current(const double* obs, double* icur) const {
    const double rin = topo_.r_in();
    for (int j = 0; j < topo_.d_h; ++j) {
      const double* row = w_in_.data() + std::size_t(j) * topo_.d_in;
      double acc = 0.0;
      for (int i = 0; i < topo_.d_in; ++i)
        if (row[i] != 0.0) acc += row[i] * obs[i];
      icur[j] = rin * acc;
    }
  }

  void integrate_recurrent(const LifState& st, EngineScratch& ws) const {
    const int dh = topo_.d_h;
    for (int j = 0; j < dh; ++j) {
      const double* row = w_rec_.data() + std::size_t(j) * dh;
      double acc = 0.0;
      for (int i = 0; i < dh; ++i)
        if (st.s[i]) acc += row[i];
      ws.rec[j] = acc;
    }
  }

  void integrate_readout(const LifState& st, EngineScratch& ws) const {
    const int dh = topo_.d_h;
    for (int o = 0; o < topo_.d_out; ++o) {
      const double* row = w_out_.data() + std::size_t(o) * dh;
      double acc = 0.0;
      for (int i = 0; i < dh; ++i)
        if (st.s[i]) acc += row[i];
      ws.outc[o] = acc;
    }
  }

  void policy_step(LifState& st, EngineScratch& ws, const double* obs,
                   double* action) const {
    detail::policy_step_impl(*this, st, ws, obs, action);
  }

 private:
  static std::vector<double> signed_weights(const Topology& topo,
                                            const ConnectivitySample& theta) {
    if (theta.bits.size() != topo.d())
      throw std::invalid_argument("instantiate: theta size mismatch");
    std::vector<double> w(theta.bits.size(), 0.0);
    const std::size_t din_block = std::size_t(topo.d_h) * topo.d_in;
    const std::size_t rec_block = std::size_t(topo.d_h) * topo.d_h;
    const int ne = topo.n_exc();
    for (std::size_t i = 0; i < din_block; ++i) w[i] = double(theta.bits[i]);
    for (std::size_t i = 0; i < rec_block; ++i) {
      int pre = int(i % topo.d_h);
      w[din_block + i] =
          theta.bits[din_block + i] ? (pre < ne ? 1.0 : -1.0) : 0.0;
    }
    for (std::size_t i = din_block + rec_block; i < w.size(); ++i) {
      int pre = int((i - din_block - rec_block) % topo.d_h);
      w[i] = theta.bits[i] ? (pre < ne ? 1.0 : -1.0) : 0.0;
    }
    return w;
  }

  Topology topo_;
  std::vector<double> w_in_, w_rec_, w_out_;
};

// Convenience wrappers with value semantics.
inline BitsetNetwork instantiate(const Topology& topo,
                                 const ConnectivitySample& theta) {
  return BitsetNetwork(topo, theta);
}

template <class Net>
inline std::vector<double> policy_step(const Net& net, LifState& st,
                                       const std::vector<double>& obs) {
  if (int(obs.size()) != net.topo().d_in)
    throw std::invalid_argument("policy_step: observation size mismatch");
  EngineScratch ws(net.topo());
  std::vector<double> action(net.topo().d_out, 0.0);
  net.policy_step(st, ws, obs.data(), action.data());
  return action;
}

}  // namespace satr

#endif  // SATR_RSNN_HPP_

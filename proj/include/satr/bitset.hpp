// SPDX-License-Identifier: Apache-2.0
//
// Word-packed binary vectors/matrices and the AND+popcount integration
// kernel:  m^T s = sum_b popcount(M_b & S_b).
//
// Layout notes.  Bit i of a logical vector lives in word i/w at position
// i%w (w = bits per word, 64 by default, 32 available).  Bits past the
// logical length in the final word are kept zero ("canonical padding");
// every mutating entry point restores that invariant, so kernels never
// need to mask the tail.  Matrices are row-major — one packed row per
// postsynaptic neuron — so a full integration pass streams memory once.

#ifndef SATR_BITSET_HPP_
#define SATR_BITSET_HPP_

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace satr {

namespace detail {

// Core kernel on raw word spans; the hot path for both vector and matrix
// entry points.
template <class Word>
inline std::int64_t popcount_dot_words(const Word* m, const Word* s,
                                       std::size_t nwords) {
  std::int64_t acc = 0;
  for (std::size_t b = 0; b < nwords; ++b)
    acc += std::popcount(static_cast<Word>(m[b] & s[b]));
  return acc;
}

}  // namespace detail

template <class Word = std::uint64_t>
class PackedBitVector {
  static_assert(std::is_unsigned_v<Word>);

 public:
  static constexpr std::size_t kWordBits = std::numeric_limits<Word>::digits;

  PackedBitVector() = default;
  explicit PackedBitVector(std::size_t len)
      : len_(len), words_((len + kWordBits - 1) / kWordBits, Word(0)) {}

  static PackedBitVector pack(const std::uint8_t* bits, std::size_t len) {
    PackedBitVector v(len);
    for (std::size_t i = 0; i < len; ++i)
      if (bits[i]) v.words_[i / kWordBits] |= Word(1) << (i % kWordBits);
    return v;
  }
  static PackedBitVector pack(const std::vector<std::uint8_t>& bits) {
    return pack(bits.data(), bits.size());
  }

  // Overwrites this vector in place from a spike array; used every substep,
  // so it avoids reallocation.
  void repack(const std::uint8_t* bits) {
    std::fill(words_.begin(), words_.end(), Word(0));
    for (std::size_t i = 0; i < len_; ++i)
      if (bits[i]) words_[i / kWordBits] |= Word(1) << (i % kWordBits);
  }

  std::vector<std::uint8_t> unpack() const {
    std::vector<std::uint8_t> bits(len_);
    for (std::size_t i = 0; i < len_; ++i)
      bits[i] = (words_[i / kWordBits] >> (i % kWordBits)) & Word(1);
    return bits;
  }

  void set(std::size_t i) { words_[i / kWordBits] |= Word(1) << (i % kWordBits); }
  bool get(std::size_t i) const {
    return (words_[i / kWordBits] >> (i % kWordBits)) & Word(1);
  }

  std::size_t len() const { return len_; }
  std::size_t word_count() const { return words_.size(); }
  const Word* data() const { return words_.data(); }
  Word* mutable_data() { return words_.data(); }

  std::int64_t popcount() const {
    std::int64_t n = 0;
    for (Word w : words_) n += std::popcount(w);
    return n;
  }

 private:
  std::size_t len_ = 0;
  std::vector<Word> words_;
};

template <class Word = std::uint64_t>
class PackedBitMatrix {
 public:
  static constexpr std::size_t kWordBits = PackedBitVector<Word>::kWordBits;

  PackedBitMatrix() = default;
  PackedBitMatrix(std::size_t rows, std::size_t len)
      : rows_(rows),
        len_(len),
        words_per_row_((len + kWordBits - 1) / kWordBits),
        words_(rows * words_per_row_, Word(0)) {}

  // bits: row-major rows x len array in {0,1}.
  static PackedBitMatrix pack(const std::uint8_t* bits, std::size_t rows,
                              std::size_t len) {
    PackedBitMatrix m(rows, len);
    for (std::size_t r = 0; r < rows; ++r) {
      Word* row = m.mutable_row(r);
      const std::uint8_t* src = bits + r * len;
      for (std::size_t i = 0; i < len; ++i)
        if (src[i]) row[i / kWordBits] |= Word(1) << (i % kWordBits);
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t len() const { return len_; }
  std::size_t words_per_row() const { return words_per_row_; }
  const Word* row(std::size_t r) const { return words_.data() + r * words_per_row_; }
  Word* mutable_row(std::size_t r) { return words_.data() + r * words_per_row_; }

  bool get(std::size_t r, std::size_t c) const {
    return (row(r)[c / kWordBits] >> (c % kWordBits)) & Word(1);
  }

 private:
  std::size_t rows_ = 0, len_ = 0, words_per_row_ = 0;
  std::vector<Word> words_;
};

// m^T s over packed operands.
template <class Word>
inline std::int64_t masked_popcount_dot(const PackedBitVector<Word>& mask_row,
                                        const PackedBitVector<Word>& spikes) {
  if (mask_row.len() != spikes.len())
    throw std::invalid_argument("masked_popcount_dot: length mismatch");
  return detail::popcount_dot_words(mask_row.data(), spikes.data(),
                                    mask_row.word_count());
}

// Dale's-law integration: out[j] = exc_j . s  -  inh_j . s.
// exc and inh are disjoint by construction (a presynaptic neuron is either
// excitatory or inhibitory, never both).
template <class Word>
inline void signed_integrate(const PackedBitMatrix<Word>& exc,
                             const PackedBitMatrix<Word>& inh,
                             const PackedBitVector<Word>& spikes,
                             std::int32_t* out) {
  if (exc.len() != spikes.len() || inh.len() != spikes.len() ||
      exc.rows() != inh.rows())
    throw std::invalid_argument("signed_integrate: shape mismatch");
  const std::size_t nw = exc.words_per_row();
  const Word* s = spikes.data();
  for (std::size_t r = 0; r < exc.rows(); ++r) {
    out[r] = std::int32_t(detail::popcount_dot_words(exc.row(r), s, nw) -
                          detail::popcount_dot_words(inh.row(r), s, nw));
  }
}

template <class Word>
inline std::vector<std::int32_t> signed_integrate(
    const PackedBitMatrix<Word>& exc, const PackedBitMatrix<Word>& inh,
    const PackedBitVector<Word>& spikes) {
  std::vector<std::int32_t> out(exc.rows());
  signed_integrate(exc, inh, spikes, out.data());
  return out;
}

// --- benchmark -------------------------------------------------------------

struct BenchResult {
  double bitset_ns = 0.0;    // median wall time per full matvec
  double dense_f32_ns = 0.0;
  double ratio = 0.0;        // dense / bitset
};

namespace detail {

inline double median_of(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Times bitset vs dense-float matvec on identical logical inputs.  The two
// paths are checked for agreement before timing; a benchmark of two
// different functions is meaningless.
inline BenchResult bench_kernel(std::size_t d_in, std::size_t rows, int reps,
                                std::uint64_t seed = 12345) {
  if (reps < 1) throw std::invalid_argument("bench_kernel: reps must be >= 1");
  // deterministic pseudo-random fill, ~50% density
  std::vector<std::uint8_t> mat(rows * d_in), vec(d_in);
  std::uint64_t state = seed | 1;
  auto next_bit = [&]() {
    state ^= state << 13; state ^= state >> 7; state ^= state << 17;
    return std::uint8_t(state & 1);
  };
  for (auto& b : mat) b = next_bit();
  for (auto& b : vec) b = next_bit();

  auto pm = PackedBitMatrix<std::uint64_t>::pack(mat.data(), rows, d_in);
  auto pv = PackedBitVector<std::uint64_t>::pack(vec);
  std::vector<float> fm(rows * d_in), fv(d_in);
  for (std::size_t i = 0; i < mat.size(); ++i) fm[i] = float(mat[i]);
  for (std::size_t i = 0; i < vec.size(); ++i) fv[i] = float(vec[i]);

  std::vector<std::int64_t> bout(rows);
  std::vector<float> fout(rows);
  auto run_bitset = [&]() {
    const std::size_t nw = pm.words_per_row();
    for (std::size_t r = 0; r < rows; ++r)
      bout[r] = detail::popcount_dot_words(pm.row(r), pv.data(), nw);
  };
  // Eight independent accumulator lanes: breaks the serial float dependency
  // chain and lets the compiler vectorize without fast-math, which is the
  // strongest dense baseline expressible in strict IEEE semantics.
  const std::size_t main_n = d_in & ~std::size_t(7);
  auto run_dense = [&]() {
    for (std::size_t r = 0; r < rows; ++r) {
      const float* wr = fm.data() + r * d_in;
      float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      for (std::size_t i = 0; i < main_n; i += 8)
        for (std::size_t k = 0; k < 8; ++k) acc[k] += wr[i + k] * fv[i + k];
      float tail = 0.0f;
      for (std::size_t i = main_n; i < d_in; ++i) tail += wr[i] * fv[i];
      fout[r] = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
    }
  };

  // correctness gate (integer-valued sums: float accumulation is exact here)
  run_bitset();
  run_dense();
  for (std::size_t r = 0; r < rows; ++r)
    if (double(bout[r]) != double(fout[r]))
      throw std::runtime_error("bench_kernel: engines disagree before timing");

  // Each timed iteration toggles one input bit and folds an output into a
  // checksum, so the matvec cannot be hoisted out of the loop or dead-coded.
  std::uint64_t checksum = 0;

  using clock = std::chrono::steady_clock;
  // batch so one measurement spans >= ~1e5 ns even for tiny d
  int inner = std::max(1, int(1.0e6 / double(rows * (d_in / 8 + 1))));
  std::vector<double> tb, td;
  run_bitset();  // warm caches outside the timed region
  run_dense();
  for (int rep = 0; rep < reps; ++rep) {
    auto t0 = clock::now();
    for (int k = 0; k < inner; ++k) {
      pv.mutable_data()[0] ^= 1u;
      run_bitset();
      checksum += std::uint64_t(bout[rows - 1]);
    }
    auto t1 = clock::now();
    for (int k = 0; k < inner; ++k) {
      fv[0] = 1.0f - fv[0];
      run_dense();
      checksum += std::uint64_t(fout[rows - 1]);
    }
    auto t2 = clock::now();
    tb.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() /
                 inner);
    td.push_back(std::chrono::duration<double, std::nano>(t2 - t1).count() /
                 inner);
  }
  asm volatile("" : : "r"(checksum));
  BenchResult res;
  res.bitset_ns = detail::median_of(tb);
  res.dense_f32_ns = detail::median_of(td);
  res.ratio = res.dense_f32_ns / res.bitset_ns;
  return res;
}

}  // namespace satr

#endif  // SATR_BITSET_HPP_

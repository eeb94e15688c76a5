// Counter-based random streams (Philox 4x32-10). Every sample index owns
// its own stream keyed by (seed, index), so datasets are reproducible
// independent of how work is split across threads.
#ifndef SINDEX_RNG_HPP
#define SINDEX_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sindex {

namespace detail {

struct PhiloxState {
  uint32_t ctr[4];
  uint32_t key[2];
};

inline void philox_round(PhiloxState& s) {
  constexpr uint64_t kMul0 = 0xD2511F53ull;
  constexpr uint64_t kMul1 = 0xCD9E8D57ull;
  const uint64_t p0 = kMul0 * s.ctr[0];
  const uint64_t p1 = kMul1 * s.ctr[2];
  const uint32_t c0 = static_cast<uint32_t>(p1 >> 32) ^ s.ctr[1] ^ s.key[0];
  const uint32_t c1 = static_cast<uint32_t>(p1);
  const uint32_t c2 = static_cast<uint32_t>(p0 >> 32) ^ s.ctr[3] ^ s.key[1];
  const uint32_t c3 = static_cast<uint32_t>(p0);
  s.ctr[0] = c0;
  s.ctr[1] = c1;
  s.ctr[2] = c2;
  s.ctr[3] = c3;
  s.key[0] += 0x9E3779B9u;
  s.key[1] += 0xBB67AE85u;
}

}  // namespace detail

/// Philox 4x32-10 block generator producing 4x32 random bits per counter
/// value. Pure function of (key, counter).
inline void philox4x32(uint64_t key, uint64_t counter_hi, uint64_t counter_lo,
                       uint32_t out[4]) {
  detail::PhiloxState s;
  s.ctr[0] = static_cast<uint32_t>(counter_lo);
  s.ctr[1] = static_cast<uint32_t>(counter_lo >> 32);
  s.ctr[2] = static_cast<uint32_t>(counter_hi);
  s.ctr[3] = static_cast<uint32_t>(counter_hi >> 32);
  s.key[0] = static_cast<uint32_t>(key);
  s.key[1] = static_cast<uint32_t>(key >> 32);
  for (int r = 0; r < 10; ++r) detail::philox_round(s);
  out[0] = s.ctr[0];
  out[1] = s.ctr[1];
  out[2] = s.ctr[2];
  out[3] = s.ctr[3];
}

/// A counter-based stream: (seed, stream) fixes the sequence; draws are
/// independent of any other stream.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  uint32_t next_u32() {
    if (have_ == 0) {
      philox4x32(seed_, stream_, block_++, buf_);
      have_ = 4;
    }
    return buf_[4 - have_--];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform in (0,1); never returns 0 or 1.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard Gaussian via Box-Muller (explicit formula for bit-stable
  /// output across platforms/thread counts).
  double next_gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) {
    // Rejection to avoid modulo bias.
    const uint64_t lim = n * (~0ull / n);
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= lim);
    return x % n;
  }

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t block_ = 0;
  uint32_t buf_[4] = {0, 0, 0, 0};
  int have_ = 0;
  bool have_gauss_ = false;
  double spare_ = 0.0;
};

/// Cheap stateless mix for deriving sub-seeds from (seed, tag) pairs.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

}  // namespace sindex

#endif  // SINDEX_RNG_HPP

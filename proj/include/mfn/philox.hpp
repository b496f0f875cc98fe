#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mfn {

// Philox4x32-10 counter-based generator (Salmon et al., Random123 family).
// Stateless: output is a pure function of (key, counter), which is what makes
// noise streams reproducible independent of thread scheduling.
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

// Draws from one (key, stream-counter) cell. The block index walks counter
// word 0; words 1..3 identify the stream and are fixed for the lifetime of
// the object. Restarting with the same identifiers replays the sequence.
class CounterRng {
 public:
  CounterRng(uint64_t key64, uint32_t c1, uint32_t c2, uint32_t c3)
      : key_{static_cast<uint32_t>(key64), static_cast<uint32_t>(key64 >> 32)},
        ctr_{0u, c1, c2, c3} {}

  uint32_t next_u32() {
    if (lane_ == 4) refill();
    return buf_[lane_++];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on (0,1]; never returns 0, safe under log().
  double next_unit_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform on [0,1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson count by inversion of the exponential product (exact, suitable
  // for the moderate per-step means used here).
  int next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      p *= next_unit_pos();
      if (p <= limit) break;
      ++k;
    } while (true);
    return k;
  }

 private:
  void refill() {
    buf_ = Philox4x32::block(ctr_, key_);
    ++ctr_[0];
    lane_ = 0;
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> ctr_;
  std::array<uint32_t, 4> buf_{};
  int lane_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// SplitMix64: used to mix run seeds with replica/draw indices into effective
// run seeds, never for the draws themselves.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ (a * 0x9E3779B97F4A7C15ull)) ^ b);
}

}  // namespace mfn

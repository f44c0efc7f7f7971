#pragma once

#include <array>
#include <cstdint>
#include <cmath>

namespace wotw {

// Philox4x32-10 counter-based generator.  Chosen because sampling commands
// hand out one independent stream per (seed, stream) pair and must reproduce
// byte-identically no matter how work is split up; a counter-based generator
// gives that without any shared mutable state.
struct Philox {
  std::array<std::uint32_t, 4> counter{0, 0, 0, 0};
  std::array<std::uint32_t, 2> key{0, 0};

  static void round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t m0 = std::uint64_t(0xD2511F53u) * c[0];
    const std::uint64_t m1 = std::uint64_t(0xCD9E8D57u) * c[2];
    const std::uint32_t hi0 = std::uint32_t(m0 >> 32), lo0 = std::uint32_t(m0);
    const std::uint32_t hi1 = std::uint32_t(m1 >> 32), lo1 = std::uint32_t(m1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c,
                                            std::array<std::uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
      round(c, k);
      if (r < 9) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
    }
    return c;
  }
};

// One stream of a seeded family.  Streams with the same seed but different
// stream ids never overlap: the stream id occupies the top counter words.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    key_ = {std::uint32_t(seed), std::uint32_t(seed >> 32)};
    base_ = {0, 0, std::uint32_t(stream), std::uint32_t(stream >> 32)};
  }

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return buf_[4 - have_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on (0,1); never returns an endpoint, so logs are safe.
  double next_double() {
    return (double(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double next_uniform(double a, double b) { return a + (b - a) * next_double(); }

  double next_gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return gauss_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    gauss_ = r * std::sin(t);
    have_gauss_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection from the top keeps the draw exactly uniform.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x < limit) return x % n;
    }
  }

 private:
  void refill() {
    std::array<std::uint32_t, 4> ctr = base_;
    ctr[0] = std::uint32_t(block_);
    ctr[1] = base_[1] + std::uint32_t(block_ >> 32);
    buf_ = Philox::block(ctr, key_);
    ++block_;
    have_ = 4;
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> base_{};
  std::array<std::uint32_t, 4> buf_{};
  std::uint64_t block_ = 0;
  int have_ = 0;
  bool have_gauss_ = false;
  double gauss_ = 0.0;
};

}  // namespace wotw

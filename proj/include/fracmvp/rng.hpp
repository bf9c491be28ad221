#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "vec.hpp"

namespace fracmvp {

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
/// A pure function of (key, counter), so each Monte Carlo path gets its own stream
/// without any shared state.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Random stream for one path: key = master seed, counter = (draw index, stream index).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        id_(stream_id) {}

  /// Uniform double in the open interval (0, 1) with 53 random bits.
  double uniform() {
    if (avail_ < 2) refill();
    const std::uint64_t hi = buf_[4 - avail_];
    const std::uint64_t lo = buf_[5 - avail_];
    avail_ -= 2;
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  /// Uniform direction on S^{n-1}.
  Vec direction(int n) {
    Vec v(n);
    if (n == 1) {
      v[0] = uniform() < 0.5 ? -1.0 : 1.0;
      return v;
    }
    if (n == 2) {
      const double a = 2.0 * std::numbers::pi * uniform();
      v[0] = std::cos(a);
      v[1] = std::sin(a);
      return v;
    }
    double l2 = 0.0;
    do {
      for (int i = 0; i < n; ++i) v[i] = normal();
      l2 = norm2(v);
    } while (l2 < 1e-300);
    return v / std::sqrt(l2);
  }

 private:
  void refill() {
    buf_ = philox4x32({static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32),
                       static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
                      key_);
    ++draw_;
    avail_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t id_;
  std::uint64_t draw_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int avail_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fracmvp

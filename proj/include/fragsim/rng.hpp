#pragma once

// Counter-based random streams. Every tree block owns a stream derived from
// (seed, block id), so a block's randomness is independent of traversal order,
// pruning and thread scheduling, and a tree can be re-walked bit-identically.

#include <cstdint>
#include <cmath>

namespace fragsim {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (bijective on 64-bit words).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  static Stream from(std::uint64_t seed, std::uint64_t id) {
    return Stream(mix64(seed ^ mix64(id ^ 0xd1b54a32d192ed03ULL)));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // in [0,1)
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }
  // in (0,1)
  double next_unit_open() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_exp() { return -std::log(next_unit_open()); }

  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = next_unit_open(), v = next_unit();
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Marsaglia-Tsang; valid for any shape > 0.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      double u = next_unit_open();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = next_unit_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t child_block_id(std::uint64_t parent, int index) {
  return mix64(parent + kGolden * std::uint64_t(index + 1));
}

inline std::uint64_t replica_block_id(std::uint64_t replica) {
  return mix64(replica ^ 0x8b72e1fca9de3c14ULL);
}

}  // namespace fragsim

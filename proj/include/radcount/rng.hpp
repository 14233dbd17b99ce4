// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

namespace radcount {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Derives an independent stream seed from a master seed and a stream tag,
/// so per-sample / per-tree / per-cell work is schedule-independent.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master ^ (0xA0761D6478BD642Full * (stream + 1));
  splitmix64(state);
  return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& tag) {
  return derive_seed(master, fnv1a64(tag));
}

/// mt19937_64 with hand-rolled distributions. The standard pins the engine's
/// output sequence; rolling uniform/normal here keeps generated datasets
/// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(u01() * static_cast<double>(n)) % n;
  }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Box-Muller, one cached value.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = u01();
    while (u1 <= 0.0) u1 = u01();
    const double u2 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace radcount

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>

namespace rfstrack {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Named, independently seeded random stream. Every stochastic draw in a run
/// flows from one master seed through a (stream name, counter) pair, so
/// individual components (truth, detections, clutter, gibbs chains) can be
/// replayed in isolation. Samplers are hand-rolled so that output depends
/// only on mt19937_64, not on library-specific distribution internals.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view stream_name, std::uint64_t counter = 0) {
    std::uint64_t s = master_seed;
    for (char c : stream_name) {
      s ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      (void)splitmix64(s);
    }
    s ^= counter;
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Knuth product method; fine for the desk-scale rates used here.
  int poisson(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("poisson: lambda must be >= 0");
    if (lambda == 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rfstrack

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fanet {

/// Deterministic random source. The engine (std::mt19937_64, fully specified
/// by the standard) and every transform below are pinned as algorithm
/// version 1: scenarios generated from a seed are bit-identical across runs
/// and platforms. Standard-library distributions are deliberately not used
/// because their output is implementation-defined.
class Rng {
 public:
  static constexpr int kAlgorithmVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const double u = uniform();
    const int span = hi - lo + 1;
    int v = lo + static_cast<int>(u * span);
    return v > hi ? hi : v;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Box-Muller without caching: one draw consumes two uniforms.
  double normal(double mu, double sigma) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    return mu + sigma * r * std::cos(theta);
  }

  double clipped_normal(double mu, double sigma, double lo, double hi) {
    const double v = normal(mu, sigma);
    return v < lo ? lo : (v > hi ? hi : v);
  }

  /// Knuth's product method; adequate for the small rates used here.
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
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
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
};

}  // namespace fanet

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lambdacore/mat.hpp"

namespace lambdacore {

// Deterministic pseudorandom stream. Identical seed, identical samples,
// independent of standard-library distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), gen_(seed) {}

  uint64_t seed() const { return seed_; }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller on 53-bit uniforms.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

  // Draw from a discrete distribution given by probabilities p (assumed to sum to 1).
  int categorical(const std::vector<double>& p) {
    double u = uniform();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;
  }

  Mat normal_mat(int rows, int cols) {
    Mat m(rows, cols);
    for (auto& v : m.d) v = normal();
    return m;
  }

  // Derive an independent stream; distinct labels give distinct streams.
  Rng split(uint64_t label) {
    uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL * (label + 1)) ^ gen_();
    return Rng(x);
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lambdacore

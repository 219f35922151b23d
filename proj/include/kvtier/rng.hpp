#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic sampling helpers. mt19937_64 output is specified
// bit-exactly by the standard; the distribution transforms live here
// because the <random> distribution objects are implementation-defined
// and would break seed-level reproducibility across toolchains.

namespace kvtier {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; draws two uniforms and keeps one value so the stream
  // advances by a fixed amount per call.
  double normal(double mean, double stddev) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * M_PI * u2);
  }

  // Rejection-sampled truncated normal on [lo, hi].
  double truncated_normal(double mean, double stddev, double lo, double hi) {
    if (stddev <= 0.0) {
      return std::min(std::max(mean, lo), hi);
    }
    for (;;) {
      const double x = normal(mean, stddev);
      if (x >= lo && x <= hi) return x;
    }
  }

  // Exponential inter-arrival gap for the given rate (events/second).
  double exponential(double rate) {
    double u = uniform01();
    return -std::log1p(-u) / rate;
  }

  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is ~n/2^64; irrelevant at simulation scales.
    return gen_() % n;
  }

 private:
  std::mt19937_64 gen_;
};

// Zipf sampler over ranks 0..n-1: P(rank i) proportional to (i+1)^-exponent.
// exponent 0 degenerates to the uniform distribution.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += std::pow(static_cast<double>(i + 1), -exponent);
      cdf_[i] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform01();
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  // Probability mass of a rank, for popularity-matched frequencies.
  double weight(std::size_t rank) const {
    return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace kvtier

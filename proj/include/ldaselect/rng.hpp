#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ldaselect/errors.hpp"

namespace ldaselect {

// SplitMix64 output step. Used only for seed mixing, never as a main stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream-splitting rule used throughout: every independent random stream gets
// the seed mix_seed(mix_seed(master, replication), slot), where slot 0 is
// corpus generation and slot K is the Gibbs chain with K topics. The derived
// seed is a pure function of (master, replication, slot), so results do not
// depend on scheduling or worker count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ULL + salt * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

// PCG-XSH-RR 64/32 (O'Neill). Fixed, portable output sequence; the standard
// library engines are portable too but their distributions are not, so all
// sampling below is hand-rolled on top of next_double().
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL)
      : state_(0), inc_((stream << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // 53-bit uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n).
  std::uint32_t next_below(std::uint32_t n) {
    std::uint32_t threshold = (-n) % n;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

inline double sample_standard_normal(Pcg32& rng) {
  // Box-Muller, cosine branch only; u1 in (0,1] keeps the log finite.
  double u1 = 1.0 - rng.next_double();
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

// Marsaglia-Tsang; shapes below one are boosted and rescaled.
inline double sample_gamma(Pcg32& rng, double shape) {
  if (!(shape > 0.0)) throw ValidationError("gamma shape must be positive");
  if (shape < 1.0) {
    double u = 1.0 - rng.next_double();
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_standard_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = 1.0 - rng.next_double();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

inline Eigen::VectorXd sample_dirichlet(Pcg32& rng, double concentration, int n) {
  if (n < 1) throw ValidationError("dirichlet dimension must be >= 1");
  Eigen::VectorXd draw(n);
  for (;;) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      draw[i] = sample_gamma(rng, concentration);
      total += draw[i];
    }
    if (total > 0.0) {
      draw /= total;
      return draw;
    }
    // every gamma draw underflowed to zero; redraw
  }
}

// Counts unit-exponential arrivals; O(mean) but free of the e^-mean underflow.
inline long sample_poisson(Pcg32& rng, double mean) {
  if (!(mean >= 0.0)) throw ValidationError("poisson mean must be non-negative");
  long count = 0;
  double acc = 0.0;
  for (;;) {
    acc += -std::log(1.0 - rng.next_double());
    if (acc >= mean) break;
    ++count;
  }
  return count;
}

// Cached-CDF inversion for repeated draws from one discrete distribution.
class CategoricalSampler {
 public:
  CategoricalSampler(const double* weights, int n) : cdf_(n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(weights[i] >= 0.0)) throw ValidationError("categorical weight must be non-negative");
      total += weights[i];
      cdf_[i] = total;
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw ValidationError("categorical weights must have positive finite total");
  }

  template <typename Derived>
  explicit CategoricalSampler(const Eigen::DenseBase<Derived>& probs)
      : CategoricalSampler(Eigen::VectorXd(probs.derived().template cast<double>()).data(),
                           static_cast<int>(probs.size())) {}

  int sample(Pcg32& rng) const {
    double u = rng.next_double() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace ldaselect

// Deterministic random number generation for the coincidence-count Monte
// Carlo. The generator is SplitMix64: 64-bit state advanced by the
// golden-ratio increment and finalized with a two-round avalanche mix. It is
// counter-based (the k-th output is a pure function of seed and k), trivially
// splittable, and passes the standard empirical randomness batteries at this
// output size. All samplers below are written out explicitly so that runs
// are reproducible bit-for-bit for a given seed, independent of the standard
// library implementation.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ftadsim {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1], safe as a log() argument.
  double next_double_open() { return 1.0 - next_double(); }

 private:
  std::uint64_t state_;
};

// Child seed for stream `index` of a run seeded with `seed`. Streams are
// derived by hashing (seed, index) through the SplitMix64 finalizer, so a
// sweep point's stream depends only on (seed, index), never on evaluation
// order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Poisson sampler: Knuth's product-of-uniforms inversion for small means,
// Hormann's PTRD transformed rejection for mean >= 10.
inline std::uint64_t sample_poisson(SplitMix64& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("sample_poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;

  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = rng.next_double_open();
    while (prod > limit) {
      ++k;
      prod *= rng.next_double_open();
    }
    return k;
  }

  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.next_double() - 0.5;
    const double v = rng.next_double_open();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::uint64_t>(kf);
    }
    if (kf < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

// Binomial sampler. Direct Bernoulli counting for small n, otherwise
// Devroye's geometric-skip ("second waiting time") method, which costs
// O(n*p) expected uniforms. p > 1/2 is handled by symmetry.
inline std::uint64_t sample_binomial(SplitMix64& rng, std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("sample_binomial: p must be in [0,1]");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - sample_binomial(rng, n, 1.0 - p);

  if (n <= 64) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (rng.next_double() < p) ++k;
    }
    return k;
  }

  const double log_q = std::log1p(-p);
  std::uint64_t count = 0;
  double position = 0.0;
  for (;;) {
    position += std::floor(std::log(rng.next_double_open()) / log_q) + 1.0;
    if (position > static_cast<double>(n)) break;
    ++count;
  }
  return count;
}

// Multinomial sampler via chained conditional binomials. Cells with exactly
// zero probability never receive counts. `probs` must sum to 1 within 1e-9.
inline std::vector<std::uint64_t> sample_multinomial(SplitMix64& rng, std::uint64_t n,
                                                     std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("sample_multinomial: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("sample_multinomial: probabilities must sum to 1");
  }

  std::vector<std::uint64_t> counts(probs.size(), 0);
  std::uint64_t remaining_n = n;
  double remaining_p = 1.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
  }

  for (std::size_t i = 0; i < probs.size() && remaining_n > 0; ++i) {
    if (probs[i] <= 0.0) continue;
    if (i == last_positive) {
      counts[i] = remaining_n;
      remaining_n = 0;
      break;
    }
    const double cond = std::min(1.0, probs[i] / remaining_p);
    const std::uint64_t x = sample_binomial(rng, remaining_n, cond);
    counts[i] = x;
    remaining_n -= x;
    remaining_p -= probs[i];
    if (remaining_p <= 0.0) break;
  }
  // Rounding in the conditional chain can strand a few counts; they belong
  // to the last cell with nonzero probability.
  if (remaining_n > 0) counts[last_positive] += remaining_n;
  return counts;
}

}  // namespace ftadsim

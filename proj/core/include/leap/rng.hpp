#pragma once

#include <cstdint>
#include <vector>

namespace leap {

// Deterministic RNG owned by this project. Standard-library distributions are
// implementation-defined, which would break the byte-identical-output
// contract, so sampling is implemented here on top of SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derive an independent stream, e.g. one per graph (run seed ^ graph index)
  // or one per named purpose.
  Rng stream(std::uint64_t salt) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);
  // Standard normal via Box-Muller (one spare cached).
  double normal();
  double normal(double mean, double stddev);
  // Bernoulli with probability p of true.
  bool bernoulli(double p);

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::size_t j = uniform_index(i + 1);
      std::swap(items[i], items[j]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace leap

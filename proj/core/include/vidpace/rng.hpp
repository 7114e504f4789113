#pragma once

#include <cstdint>
#include <vector>

namespace vidpace {

// SplitMix64 finalizer. Used both to expand seeds into generator state and
// as the mixing step of derive_seed.
uint64_t mix64(uint64_t x);

// Seed of the child stream identified by `key` under `seed`. Every stochastic
// component derives its stream through this function (e.g. (corpus seed,
// video index), (train seed, epoch, batch)), so outputs are independent of
// evaluation order and thread count.
uint64_t derive_seed(uint64_t seed, uint64_t key);

// xoshiro256** with SplitMix64 state expansion. The algorithm is pinned:
// golden corpora and checkpoints depend on this exact generator.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // 53-bit uniform double in [0, 1).
  double next_double();

  // Uniform integer in [0, n), n > 0. Rejection sampling, bias-free.
  uint64_t uniform_int(uint64_t n);

  double uniform_real(double lo, double hi);

  // Standard normal via Box-Muller with a cached spare.
  double normal();

  // In-place Fisher-Yates shuffle (descending).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace vidpace

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace surgrec {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

// Mixes a base seed with a label and optional indices into a child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t a = 0,
                          std::uint64_t b = 0);

// mt19937_64 with hand-written distributions, so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();                              // [0, 1)
  double uniform(double lo, double hi);          // [lo, hi)
  std::size_t uniform_index(std::size_t bound);  // [0, bound)
  double normal();                               // N(0, 1)
  bool coin() { return (next() >> 63) != 0; }

  template <typename Item>
  void shuffle(std::vector<Item>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace surgrec

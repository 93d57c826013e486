#ifndef TAGAD_RNG_HPP
#define TAGAD_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace tagad {

// SplitMix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(mix64(seed) ^ mix64(salt + 0x632be59bd9b4e019ULL));
}

// Seeded generator with distributions written out by hand. The standard
// library pins mt19937_64's output sequence but not the behavior of its
// distributions, so draws here are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling avoids modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform real in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Partial Fisher-Yates: the first k entries of `items` become a uniform
  // sample without replacement, in sampled order.
  template <typename T>
  void partial_shuffle(std::vector<T>& items, std::size_t k) {
    if (k > items.size()) k = items.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(items.size() - i);
      std::swap(items[i], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    partial_shuffle(items, items.size());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tagad

#endif  // TAGAD_RNG_HPP

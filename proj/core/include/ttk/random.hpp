#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace ttk {

/// splitmix64 step (Steele, Lea, Flood 2014): advances `state` by the golden
/// gamma 0x9E3779B97F4A7C15 and returns the mixed output
/// (multipliers 0xBF58476D1CE4E5B9, 0x94D049BB133111EB; shifts 30/27/31).
std::uint64_t splitmix64(std::uint64_t& state);

/// FNV-1a 64-bit (offset 0xCBF29CE484222325, prime 0x100000001B3).
std::uint64_t fnv1a64(std::string_view bytes);

/// Portable xorshift64* generator (Vigna 2016): shifts 12, 25, 27 and output
/// multiplier 0x2545F4914F6CDD1D. The state is initialised from one splitmix64
/// step of the seed, so every seed (including 0) gives a nonzero state.
///
/// Every derived draw below uses integer arithmetic or exactly rounded IEEE
/// operations only, so sequences are identical on every conforming platform.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Approximate standard normal: sum of 12 uniforms minus 6 (Irwin-Hall).
  /// Bounded to [-6, 6]; no transcendental functions involved.
  double normal();

  /// Fisher-Yates, walking from the back.
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  /// First k elements of a Fisher-Yates permutation of [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
};

}  // namespace ttk

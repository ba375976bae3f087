#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace cobb {

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output mix. Update equations:
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
///   z *= 0x94D049BB133111EB; z ^= z >> 31;
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// FNV-1a 64-bit hash; used to fold model names into seed derivations.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Deterministic 64-bit generator (SplitMix64). State update is the Weyl
/// sequence s += 0x9E3779B97F4A7C15; each output is mix64(s). All randomness
/// in the project flows through this generator so runs are reproducible
/// bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden64;
    return mix64(state_);
  }

  /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in the open interval (0, 1); safe for log().
  double next_uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  /// Uniform integer in [0, n) via the 128-bit multiply reduction
  /// floor(u * n / 2^64).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller: sqrt(-2 ln u1) * cos(2 pi u2).
  /// One uniform pair per variate; the sine branch is discarded.
  double next_normal() {
    const double u1 = next_uniform_open();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// In-place Fisher-Yates: for i = n-1 .. 1, swap(v[i], v[j]), j = below(i+1).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// First m entries of a Fisher-Yates pass over 0..n-1 (distinct draw
  /// without replacement).
  std::vector<int> sample_without_replacement(int n, int m) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < m; ++i) {
      const int j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(m));
    return idx;
  }

 private:
  std::uint64_t state_;
};

/// Ensemble member i runs on seed ^ ((i+1) * 0x9E3779B97F4A7C15), 64-bit
/// wrap-around, so parallel and sequential fits see identical streams.
inline std::uint64_t member_seed(std::uint64_t seed, std::uint64_t member) {
  return seed ^ ((member + 1) * kGolden64);
}

/// Per-(run, model, fold) seed:
///   mix64(mix64(seed ^ fnv1a64(model_name)) ^ (fold+1)*0x9E3779B97F4A7C15)
inline std::uint64_t fold_seed(std::uint64_t seed, std::string_view model_name,
                               std::uint64_t fold) {
  return mix64(mix64(seed ^ fnv1a64(model_name)) ^ (fold + 1) * kGolden64);
}

/// Per-participant generator seed for the synthetic data stream.
inline std::uint64_t participant_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ (index + 1) * kGolden64);
}

}  // namespace cobb

#pragma once

// Counter-based, splittable random streams.
//
// A stream is a (key, counter) pair; the i-th output is a SplitMix64 finalizer
// applied to key + i * golden. Independent streams are derived from a master
// seed by hashing (purpose, index) into the key, so every consumer of
// randomness in a run owns a stream that does not overlap with any other.
// Everything below is implemented on raw 64-bit words so results are
// bit-identical across standard libraries (std distributions are not).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace deepboot {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Purposes used to split a run's master seed. Fixed values: changing one
// changes every recorded trajectory.
enum class StreamPurpose : std::uint64_t {
  init = 1,
  trainset = 2,
  real_data = 3,
  ideal_data = 4,
  eval = 5,
  ideal_train_eval = 6,
  teacher = 7,
  pool = 8,
  real_augment = 9,
  ideal_augment = 10,
  generic = 99,
};

class RngStream {
 public:
  constexpr RngStream() = default;
  constexpr explicit RngStream(std::uint64_t key) : key_(key) {}

  // Derive an independent stream for (purpose, index) from a master seed.
  static constexpr RngStream derive(std::uint64_t master_seed, StreamPurpose purpose,
                                    std::uint64_t index = 0) noexcept {
    std::uint64_t k = detail::mix64(master_seed + detail::kGolden);
    k = detail::mix64(k ^ detail::mix64(static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL));
    k = detail::mix64(k ^ detail::mix64(index + 0x8CB92BA72F3D8DD7ULL));
    return RngStream(k);
  }

  // Child stream keyed off this stream's key; does not advance this stream.
  constexpr RngStream split(std::uint64_t index) const noexcept {
    return RngStream(detail::mix64(key_ ^ detail::mix64(index * detail::kGolden + 0x2545F4914F6CDD1DULL)));
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform01_open_low() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) (Lemire's multiply-and-reject). n must be > 0.
  __extension__ typedef unsigned __int128 u128;

  std::uint64_t below(std::uint64_t n) noexcept {
    std::uint64_t x = next_u64();
    u128 m = static_cast<u128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<u128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; consumes exactly two words per call.
  double normal() noexcept {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(std::span<std::size_t>(p));
    return p;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace deepboot

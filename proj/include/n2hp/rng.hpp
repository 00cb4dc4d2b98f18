#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace n2hp {

// Counter-based SplitMix64 stream. Draw k of stream (seed, stream) is
// mix(key + k * gamma), so a stream is fully determined by its seed and
// stream id and is identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream * kGamma + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next() { return mix(key_ + (++counter_) * kGamma); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    unsigned __int128 product =
        static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t draws() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream ids used across the library so independent consumers of one seed
// never share draws.
namespace rng_stream {
inline constexpr std::uint64_t kSplitShuffle = 1;
inline constexpr std::uint64_t kValNegatives = 2;
inline constexpr std::uint64_t kTestNegatives = 3;
inline constexpr std::uint64_t kWeightInit = 4;
inline constexpr std::uint64_t kGenerator = 5;
inline constexpr std::uint64_t kDiagnostics = 6;
}  // namespace rng_stream

}  // namespace n2hp

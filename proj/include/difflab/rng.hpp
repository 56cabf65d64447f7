#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace difflab {

/// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream` of run `run` under `master`. Distinct
/// (run, stream) pairs give unrelated seeds; the map is pure.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::uint64_t stream) noexcept;

// Stream ids reserved within a run. Node streams occupy [kNodeStreamBase, kNodeStreamBase + N).
inline constexpr std::uint64_t kTopologyStream = 0;
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kNodeStreamBase = 16;

/// A seeded random stream. Copying a Stream copies its full state, which is
/// how strategies share common random numbers.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return gauss_(engine_); }
  double uniform() { return unit_(engine_); }
  bool bernoulli(double p) { return unit_(engine_) < p; }
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  /// Uniform sign in {-1, +1}.
  double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace difflab

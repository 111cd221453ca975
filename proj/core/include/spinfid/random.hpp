#pragma once

#include <cstdint>
#include <limits>

namespace spinfid {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator, so it plugs into
/// the <random> distributions. Cheap to construct, which matters when every
/// ensemble member gets its own stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for (seed, domain, index). Same inputs give the same
/// stream on every run and every thread.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) noexcept {
  SplitMix64 mix(seed ^ (domain * 0xd1b54a32d192ed03ULL));
  const std::uint64_t a = mix();
  SplitMix64 mix2(a ^ (index * 0x8cb92ba72f3d8dd7ULL + 0x632be59bd9b4e019ULL));
  return SplitMix64(mix2());
}

// Stream domains.
inline constexpr std::uint64_t kStreamEnsemble = 1;
inline constexpr std::uint64_t kStreamTraceNoise = 2;
inline constexpr std::uint64_t kStreamShotNoise = 3;
inline constexpr std::uint64_t kStreamReplicate = 4;

}  // namespace spinfid

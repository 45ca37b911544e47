#pragma once

#include <cstdint>
#include <random>

namespace urnsa {

/// splitmix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of replication stream `stream` under `master_seed`.
///
/// stream_seed(s, r) = mix64(mix64(s) ^ mix64(r + 0x9E3779B97F4A7C15)).
/// Streams are addressed by index only, so any replication can be
/// regenerated on its own and workers never share generator state.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream) noexcept;

/// Per-replication random source: a 64-bit Mersenne twister seeded from the
/// derived stream seed.
class StreamRng {
 public:
  StreamRng(std::uint64_t master_seed, std::uint64_t stream);
  explicit StreamRng(std::uint64_t seed);

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open_closed() noexcept {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }
  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace urnsa

#include "urnsa/rng.hpp"

namespace urnsa {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream) noexcept {
  return mix64(mix64(master_seed) ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mix64(seed)),
                    static_cast<std::uint32_t>(mix64(seed) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

StreamRng::StreamRng(std::uint64_t master_seed, std::uint64_t stream)
    : engine_(seeded_engine(stream_seed(master_seed, stream))) {}

StreamRng::StreamRng(std::uint64_t seed) : engine_(seeded_engine(seed)) {}

}  // namespace urnsa

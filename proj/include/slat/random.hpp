#pragma once

#include <cstdint>
#include <random>

namespace slat {

/// Independent random streams derived from one user seed.
///
/// Every consumer draws from std::mt19937_64 seeded with
///   splitmix64(splitmix64(seed ^ stream_tag) + counter)
/// where `stream_tag` names the consumer and `counter` distinguishes
/// repeated uses (channel index, restart index, manifest row). Changing how
/// many numbers one consumer draws never shifts another consumer's stream.
enum class Stream : std::uint64_t {
  kGaussianNoise = 0x6761757373ULL,  // "gauss"
  kPoissonNoise = 0x706f6973ULL,     // "pois"
  kPixelLoss = 0x6c6f7373ULL,        // "loss"
  kKMeans = 0x6b6d65616eULL,         // "kmean"
  kExperiment = 0x65787074ULL,       // "expt"
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t counter = 0) {
  return splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(stream)) + counter);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t counter = 0) {
  return std::mt19937_64(derive_seed(seed, stream, counter));
}

}  // namespace slat

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "slat/image.hpp"
#include "slat/keyvalue.hpp"
#include "slat/linops.hpp"

namespace slat {

enum class NoiseKind { kNone, kGaussian, kPoisson };

/// One test corruption: blur, then noise, then pixel loss.
struct DegradationSpec {
  NoiseKind noise = NoiseKind::kNone;
  double mean = 0.0;       // gaussian
  double variance = 0.0;   // gaussian
  double peak = 255.0;     // poisson: intensities are stretched to [1, peak]
  double loss_fraction = 0.0;
  bool per_channel_loss = false;
  std::optional<LinearOperatorXd> blur;
  std::uint64_t seed = 0;

  void validate() const;

  /// Short human-readable tag, e.g. "blur10+gauss0.001+loss0.6".
  std::string label() const;

  KeyValues to_key_values() const;
  /// Reads the keys written by to_key_values; unknown keys are ignored so
  /// a manifest row can carry pipeline settings in the same block.
  static DegradationSpec from_key_values(const KeyValues& kv);
};

struct Degraded {
  Image image;
  Mask mask;
};

/// clamp(img + N(mean, variance), 0, 1), i.i.d. per sample.
Image add_gaussian(const Image& img, double mean, double variance, std::uint64_t seed);

/// Stretch to [1, peak], draw Poisson counts, stretch back to [0, 1] with a
/// single min-max over all samples.
Image add_poisson(const Image& img, double peak, std::uint64_t seed);

/// Clears exactly round(fraction * H * W) pixel sites per channel (the same
/// sites in every channel unless per_channel).
Degraded random_loss(const Image& img, double fraction, bool per_channel, std::uint64_t seed);

Degraded degrade(const Image& img, const DegradationSpec& spec);

}  // namespace slat

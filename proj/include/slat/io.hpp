#pragma once

#include <filesystem>
#include <string>

#include "slat/image.hpp"

namespace slat::io {

/// Read a binary 8-bit PGM (P5) or PPM (P6); samples become v/255.
Image load_image(const std::filesystem::path& path);

/// Write channels 1 or 3 as binary PGM/PPM with round-half-up quantization.
/// Values must lie in [0, 1].
void save_image(const Image& img, const std::filesystem::path& path);

/// 8-bit quantization used by save_image: floor(v * 255 + 0.5).
std::uint8_t quantize(double v);

/// Lossless container for real-valued images:
///   "SLAT" | u16 version=1 | u32 height | u32 width | u16 channels |
///   f64 samples, channel-planar row-major; all little-endian.
void save_raw(const Image& img, const std::filesystem::path& path);
Image load_raw(const std::filesystem::path& path);

inline constexpr std::uint16_t kRawVersion = 1;

/// Label maps travel as 8-bit PGM with label k stored as byte k.
void save_labels(const LabelMap& labels, const std::filesystem::path& path);

/// Reads a label PGM. K is taken as the largest label present unless
/// `phases` is positive.
LabelMap load_labels(const std::filesystem::path& path, int phases = 0);

/// Masks: PGM (shared across `channels`) or PPM (one plane per channel).
/// Nonzero bytes mark known pixels.
Mask load_mask(const std::filesystem::path& path, Index channels);
void save_mask(const Mask& mask, const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace slat::io

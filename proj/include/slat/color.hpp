#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "slat/image.hpp"

namespace slat {

/// Secondary color space used by the lifting stage.
enum class SecondarySpace { kLab, kHsv, kNone };

SecondarySpace parse_secondary_space(const std::string& name);
std::string to_string(SecondarySpace space);

namespace color {

/// CIE D65 reference white, Y normalized to 1.
inline constexpr std::array<double, 3> kD65White = {0.95047, 1.0, 1.08883};

/// Linear sRGB -> XYZ for the sRGB primaries (0.64, 0.33), (0.30, 0.60),
/// (0.15, 0.06), scaled so that each row sums to the D65 white above.
/// Recomputing from the primaries reproduces these to the last digit.
inline const Eigen::Matrix3d& srgb_to_xyz_matrix() {
  static const Eigen::Matrix3d m = (Eigen::Matrix3d() <<
      0.41245643908969226, 0.3575760776439089, 0.1804374832663989,
      0.21267285140562256, 0.7151521552878178, 0.07217499330655956,
      0.019333895582329303, 0.11919202588130294, 0.9503040785363677).finished();
  return m;
}

template <typename Scalar>
Scalar srgb_to_linear(Scalar c) {
  return c <= Scalar(0.04045) ? c / Scalar(12.92)
                              : std::pow((c + Scalar(0.055)) / Scalar(1.055), Scalar(2.4));
}

/// CIE companding: cube root above (6/29)^3, linear segment below.
template <typename Scalar>
Scalar lab_f(Scalar t) {
  constexpr Scalar delta = Scalar(6) / Scalar(29);
  return t > delta * delta * delta ? std::cbrt(t)
                                   : t / (Scalar(3) * delta * delta) + Scalar(4) / Scalar(29);
}

/// One sRGB pixel in [0,1]^3 to (L*, a*, b*).
template <typename Scalar>
std::array<Scalar, 3> srgb_to_lab(Scalar r, Scalar g, Scalar b) {
  const Eigen::Matrix<Scalar, 3, 1> lin(srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
  const Eigen::Matrix<Scalar, 3, 1> xyz = srgb_to_xyz_matrix().cast<Scalar>() * lin;
  const Scalar fx = lab_f(xyz(0) / Scalar(kD65White[0]));
  const Scalar fy = lab_f(xyz(1) / Scalar(kD65White[1]));
  const Scalar fz = lab_f(xyz(2) / Scalar(kD65White[2]));
  return {Scalar(116) * fy - Scalar(16), Scalar(500) * (fx - fy), Scalar(200) * (fy - fz)};
}

/// One sRGB pixel to (hue/360, saturation, value), all in [0,1].
template <typename Scalar>
std::array<Scalar, 3> srgb_to_hsv(Scalar r, Scalar g, Scalar b) {
  const Scalar mx = std::max({r, g, b});
  const Scalar mn = std::min({r, g, b});
  const Scalar chroma = mx - mn;
  Scalar hue = 0;
  if (chroma > Scalar(0)) {
    if (mx == r) {
      hue = std::fmod((g - b) / chroma + Scalar(6), Scalar(6));
    } else if (mx == g) {
      hue = (b - r) / chroma + Scalar(2);
    } else {
      hue = (r - g) / chroma + Scalar(4);
    }
    hue /= Scalar(6);
  }
  const Scalar sat = mx > Scalar(0) ? chroma / mx : Scalar(0);
  return {hue, sat, mx};
}

}  // namespace color

/// Per-pixel sRGB -> Lab in native units (L* in [0,100], a*/b* signed).
/// Input must be 3 channels in [0,1].
Image srgb_to_lab(const Image& rgb);

/// Per-pixel sRGB -> HSV with every component in [0,1].
Image srgb_to_hsv(const Image& rgb);

/// Transform to the secondary space (identity for kNone is not allowed here).
Image to_secondary(const Image& rgb, SecondarySpace space);

/// Dimension lifting: (g, rescale_to_unit(T(g))) as a 6-channel image, or
/// g unchanged (3 channels) when space is kNone.
Image lift(const Image& rgb, SecondarySpace space = SecondarySpace::kLab);

}  // namespace slat

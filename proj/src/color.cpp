#include "slat/color.hpp"

namespace slat {
namespace {

void check_rgb(const Image& rgb) {
  if (rgb.channels() != 3) throw ValidationError("color conversion needs 3 channels");
  for (const auto& p : rgb.planes())
    if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0)
      throw ValidationError("color conversion input must lie in [0,1]");
}

template <typename PixelFn>
Image map_pixels(const Image& rgb, PixelFn&& fn) {
  check_rgb(rgb);
  std::vector<PlaneXd> out(3, PlaneXd(rgb.height(), rgb.width()));
  const double* r = rgb.channel(0).data();
  const double* g = rgb.channel(1).data();
  const double* b = rgb.channel(2).data();
  for (Index i = 0; i < rgb.pixels(); ++i) {
    const auto v = fn(r[i], g[i], b[i]);
    for (std::size_t c = 0; c < 3; ++c) out[c].data()[i] = v[c];
  }
  return Image(std::move(out));
}

}  // namespace

SecondarySpace parse_secondary_space(const std::string& name) {
  if (name == "lab") return SecondarySpace::kLab;
  if (name == "hsv") return SecondarySpace::kHsv;
  if (name == "none") return SecondarySpace::kNone;
  throw ValidationError("secondary space must be lab, hsv or none");
}

std::string to_string(SecondarySpace space) {
  switch (space) {
    case SecondarySpace::kLab: return "lab";
    case SecondarySpace::kHsv: return "hsv";
    case SecondarySpace::kNone: return "none";
  }
  return "lab";
}

Image srgb_to_lab(const Image& rgb) {
  return map_pixels(rgb, [](double r, double g, double b) { return color::srgb_to_lab(r, g, b); });
}

Image srgb_to_hsv(const Image& rgb) {
  return map_pixels(rgb, [](double r, double g, double b) { return color::srgb_to_hsv(r, g, b); });
}

Image to_secondary(const Image& rgb, SecondarySpace space) {
  switch (space) {
    case SecondarySpace::kLab: return srgb_to_lab(rgb);
    case SecondarySpace::kHsv: return srgb_to_hsv(rgb);
    case SecondarySpace::kNone: break;
  }
  throw ValidationError("no secondary transform for space 'none'");
}

Image lift(const Image& rgb, SecondarySpace space) {
  check_rgb(rgb);
  if (space == SecondarySpace::kNone) return rgb;
  return stack_channels<double>({rgb, rescale_to_unit(to_secondary(rgb, space))});
}

}  // namespace slat

#include "slat/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace slat::synthetic {
namespace {

using Rgb = std::array<double, 3>;

Scene make_scene(std::string name, Index rows, Index cols, const std::vector<Rgb>& palette,
                 const LabelPlane& labels, const PlaneXd& illumination) {
  std::vector<PlaneXd> planes(3, PlaneXd(rows, cols));
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const Rgb& color = palette[static_cast<std::size_t>(labels(r, c) - 1)];
      for (std::size_t ch = 0; ch < 3; ++ch)
        planes[ch](r, c) = std::clamp(color[ch] * illumination(r, c), 0.0, 1.0);
    }
  const int k = static_cast<int>(palette.size());
  return {std::move(name), Image(std::move(planes)), LabelMap(labels, k)};
}

}  // namespace

Scene six_phase() {
  constexpr Index kSize = 100;
  struct Disk {
    double row, col, radius;
  };
  const std::vector<Rgb> palette = {
      {0.50, 0.50, 0.50},  // background
      {0.90, 0.10, 0.10},  // red
      {0.10, 0.80, 0.20},  // green
      {0.15, 0.20, 0.90},  // blue
      {0.95, 0.90, 0.10},  // yellow
      {0.85, 0.20, 0.85},  // magenta
  };
  const std::array<Disk, 5> disks = {{
      {35, 35, 22},
      {35, 65, 22},
      {62, 50, 24},
      {72, 28, 16},
      {72, 74, 16},
  }};
  LabelPlane labels = LabelPlane::Constant(kSize, kSize, 1);
  for (std::size_t d = 0; d < disks.size(); ++d)
    for (Index r = 0; r < kSize; ++r)
      for (Index c = 0; c < kSize; ++c) {
        const double dr = static_cast<double>(r) - disks[d].row;
        const double dc = static_cast<double>(c) - disks[d].col;
        if (dr * dr + dc * dc <= disks[d].radius * disks[d].radius)
          labels(r, c) = static_cast<int>(d) + 2;
      }
  return make_scene("six_phase", kSize, kSize, palette, labels, PlaneXd::Ones(kSize, kSize));
}

Scene four_phase() {
  constexpr Index kSize = 256;
  constexpr double kIllumFloor = 0.5;
  const std::vector<Rgb> palette = {
      {0.95, 0.55, 0.20},  // top-left: orange
      {0.30, 0.75, 0.35},  // top-right: green
      {0.35, 0.45, 0.95},  // bottom-left: blue
      {0.90, 0.85, 0.30},  // bottom-right: yellow
  };
  LabelPlane labels(kSize, kSize);
  PlaneXd illumination(kSize, kSize);
  const double span = static_cast<double>(kSize - 1);
  for (Index r = 0; r < kSize; ++r)
    for (Index c = 0; c < kSize; ++c) {
      const bool bottom = r >= kSize / 2;
      const bool right = c >= kSize / 2;
      labels(r, c) = 1 + (right ? 1 : 0) + (bottom ? 2 : 0);
      // Spotlight on the image center, falling off linearly to kIllumFloor
      // at the corners.
      const double dr = static_cast<double>(r) / span - 0.5;
      const double dc = static_cast<double>(c) / span - 0.5;
      const double t = std::min(1.0, std::hypot(dr, dc) / std::sqrt(0.5));
      illumination(r, c) = 1.0 - (1.0 - kIllumFloor) * t;
    }
  return make_scene("four_phase", kSize, kSize, palette, labels, illumination);
}

Scene pyramid() {
  constexpr Index kRows = 120;
  constexpr Index kCols = 180;
  constexpr Index kHorizon = 70;
  std::vector<PlaneXd> planes(3, PlaneXd(kRows, kCols));
  LabelPlane labels(kRows, kCols);
  const double apex_row = 20;
  const double apex_col = 95;
  const double half_base = 60;
  for (Index r = 0; r < kRows; ++r)
    for (Index c = 0; c < kCols; ++c) {
      const double y = static_cast<double>(r);
      const double x = static_cast<double>(c);
      Rgb color;
      int label = 2;
      const double rise = (y - apex_row) / (static_cast<double>(kHorizon) - apex_row);
      const bool in_pyramid = y >= apex_row && y < kHorizon && std::abs(x - apex_col) <= rise * half_base;
      if (in_pyramid) {
        // Sunlit left face, shaded right face.
        color = x <= apex_col ? Rgb{0.95, 0.74, 0.58} : Rgb{0.74, 0.54, 0.42};
      } else if (r < kHorizon) {
        label = 1;
        const double t = y / static_cast<double>(kHorizon);  // 0 at top, 1 at horizon
        // Hazy, slightly cyan sky; its blue overlaps the sand's.
        color = {0.55 + 0.33 * t, 0.70 + 0.22 * t, 0.76 + 0.14 * t};
      } else {
        const double t = (y - kHorizon) / static_cast<double>(kRows - kHorizon);
        const double shade = 0.5 + 0.5 * t;
        color = {1.00 * shade, 0.78 * shade, 0.62 * shade};
      }
      labels(r, c) = label;
      for (std::size_t ch = 0; ch < 3; ++ch) planes[ch](r, c) = std::clamp(color[ch], 0.0, 1.0);
    }
  return {"pyramid", Image(std::move(planes)), LabelMap(std::move(labels), 2)};
}

Scene by_name(const std::string& name) {
  if (name == "six_phase") return six_phase();
  if (name == "four_phase") return four_phase();
  if (name == "pyramid") return pyramid();
  throw ValidationError("unknown synthetic scene '" + name + "'");
}

std::vector<std::string> names() { return {"six_phase", "four_phase", "pyramid"}; }

}  // namespace slat::synthetic

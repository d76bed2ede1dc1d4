#pragma once

#include <string>
#include <vector>

#include "slat/image.hpp"

namespace slat::synthetic {

/// A procedurally generated color image with its ground-truth phases.
struct Scene {
  std::string name;
  Image image;
  LabelMap truth;
};

/// 100x100: five overlapping colored disks over a gray background, painted
/// back to front. Label 1 is the background, label k+1 the k-th disk.
Scene six_phase();

/// 256x256: four colored quadrants under a centered spotlight that falls
/// from full brightness at the center to half at the corners.
Scene four_phase();

/// 120x180 desert scene: a hazy sky that brightens toward the horizon above
/// shaded sand and a two-faced pyramid. Label 1 is sky, label 2 is sand and pyramid.
Scene pyramid();

/// Lookup by name: "six_phase", "four_phase" or "pyramid".
Scene by_name(const std::string& name);

std::vector<std::string> names();

}  // namespace slat::synthetic

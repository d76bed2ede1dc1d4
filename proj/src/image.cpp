#include "slat/image.hpp"

#include <string>

namespace slat {

Mask::Mask(std::vector<MaskPlane> planes) : planes_(std::move(planes)) {
  if (planes_.empty()) throw ValidationError("mask needs at least one channel");
  height_ = planes_.front().rows();
  width_ = planes_.front().cols();
  for (const auto& p : planes_)
    if (p.rows() != height_ || p.cols() != width_)
      throw ValidationError("mask channel planes differ in shape");
}

Mask Mask::full(Index height, Index width, Index channels) {
  if (height < 1 || width < 1 || channels < 1)
    throw ValidationError("mask dimensions must be positive");
  return Mask(std::vector<MaskPlane>(static_cast<std::size_t>(channels),
                                     MaskPlane::Constant(height, width, true)));
}

void Mask::check_matches(Index height, Index width, Index channels) const {
  if (height_ != height || width_ != width || this->channels() != channels)
    throw ValidationError("mask is " + std::to_string(height_) + "x" + std::to_string(width_) +
                          "x" + std::to_string(this->channels()) + ", image is " +
                          std::to_string(height) + "x" + std::to_string(width) + "x" +
                          std::to_string(channels));
}

bool Mask::operator==(const Mask& other) const {
  if (height_ != other.height_ || width_ != other.width_ || channels() != other.channels())
    return false;
  for (std::size_t c = 0; c < planes_.size(); ++c)
    if ((planes_[c] != other.planes_[c]).any()) return false;
  return true;
}

LabelMap::LabelMap(LabelPlane labels, int phases) : labels_(std::move(labels)), phases_(phases) {
  if (phases_ < 1) throw ValidationError("label map needs K >= 1");
  if (labels_.size() == 0) throw ValidationError("label map is empty");
  if (labels_.minCoeff() < 1 || labels_.maxCoeff() > phases_)
    throw ValidationError("labels must lie in 1..K");
}

std::vector<Index> LabelMap::histogram() const {
  std::vector<Index> counts(static_cast<std::size_t>(phases_) + 1, 0);
  for (Index i = 0; i < labels_.size(); ++i) ++counts[static_cast<std::size_t>(labels_.data()[i])];
  return counts;
}

PlaneXd rescale_to_unit(const PlaneXd& plane) {
  const double lo = plane.minCoeff();
  const double hi = plane.maxCoeff();
  if (!(hi > lo)) return PlaneXd::Zero(plane.rows(), plane.cols());
  // Clamp guards the last ulp so the [0,1] invariant holds exactly.
  return ((plane - lo) / (hi - lo)).min(1.0).max(0.0);
}

Image rescale_to_unit(const Image& img) {
  std::vector<PlaneXd> planes;
  planes.reserve(static_cast<std::size_t>(img.channels()));
  for (const auto& p : img.planes()) planes.push_back(rescale_to_unit(p));
  return Image(std::move(planes));
}

}  // namespace slat

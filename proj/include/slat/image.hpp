#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slat/error.hpp"

namespace slat {

using Index = Eigen::Index;

/// One image channel: row-major so that the flat layout of a BasicImage is
/// channel-planar, row-major.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneXd = Plane<double>;
using MaskPlane = Plane<bool>;
using LabelPlane = Plane<int>;

/// H x W x C array of real intensities, stored as C planes of H x W.
///
/// Every public constructor rejects mismatched plane shapes and non-finite
/// samples, so downstream code may assume a well-formed, finite image.
template <typename Scalar>
class BasicImage {
 public:
  using PlaneType = Plane<Scalar>;

  BasicImage() = default;

  /// Zero-filled image.
  BasicImage(Index height, Index width, Index channels)
      : height_(height), width_(width) {
    if (height < 1 || width < 1 || channels < 1)
      throw ValidationError("image dimensions must be positive");
    planes_.assign(static_cast<std::size_t>(channels), PlaneType::Zero(height, width));
  }

  explicit BasicImage(std::vector<PlaneType> planes) : planes_(std::move(planes)) {
    if (planes_.empty()) throw ValidationError("image needs at least one channel");
    height_ = planes_.front().rows();
    width_ = planes_.front().cols();
    if (height_ < 1 || width_ < 1) throw ValidationError("image dimensions must be positive");
    for (const auto& p : planes_) {
      if (p.rows() != height_ || p.cols() != width_)
        throw ValidationError("channel planes differ in shape");
      if (!p.allFinite()) throw ValidationError("image contains non-finite values");
    }
  }

  /// Build from a flat channel-planar, row-major buffer.
  static BasicImage from_planar(Index height, Index width, Index channels,
                                const std::vector<Scalar>& data) {
    if (height < 1 || width < 1 || channels < 1)
      throw ValidationError("image dimensions must be positive");
    if (static_cast<Index>(data.size()) != height * width * channels)
      throw ValidationError("buffer length does not match height*width*channels");
    std::vector<PlaneType> planes;
    planes.reserve(static_cast<std::size_t>(channels));
    for (Index c = 0; c < channels; ++c) {
      planes.push_back(Eigen::Map<const PlaneType>(data.data() + c * height * width, height, width));
    }
    return BasicImage(std::move(planes));
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index channels() const { return static_cast<Index>(planes_.size()); }
  Index pixels() const { return height_ * width_; }
  bool empty() const { return planes_.empty(); }

  const PlaneType& channel(Index c) const { return planes_.at(static_cast<std::size_t>(c)); }
  const std::vector<PlaneType>& planes() const { return planes_; }

  /// Replace one channel; same shape and finiteness rules as construction.
  void set_channel(Index c, PlaneType plane) {
    if (plane.rows() != height_ || plane.cols() != width_)
      throw ValidationError("channel plane has the wrong shape");
    if (!plane.allFinite()) throw ValidationError("image contains non-finite values");
    planes_.at(static_cast<std::size_t>(c)) = std::move(plane);
  }

  std::vector<Scalar> planar_data() const {
    std::vector<Scalar> out;
    out.reserve(static_cast<std::size_t>(pixels() * channels()));
    for (const auto& p : planes_) out.insert(out.end(), p.data(), p.data() + p.size());
    return out;
  }

  /// Channels [first, first+count) as a new image.
  BasicImage slice(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > channels())
      throw ValidationError("channel slice out of range");
    return BasicImage(std::vector<PlaneType>(planes_.begin() + first,
                                             planes_.begin() + first + count));
  }

  bool operator==(const BasicImage& other) const {
    if (height_ != other.height_ || width_ != other.width_ || channels() != other.channels())
      return false;
    for (std::size_t c = 0; c < planes_.size(); ++c)
      if ((planes_[c] != other.planes_[c]).any()) return false;
    return true;
  }

 private:
  Index height_ = 0;
  Index width_ = 0;
  std::vector<PlaneType> planes_;
};

using Image = BasicImage<double>;

/// Stack the channels of several images of equal size.
template <typename Scalar>
BasicImage<Scalar> stack_channels(const std::vector<BasicImage<Scalar>>& parts) {
  std::vector<Plane<Scalar>> planes;
  for (const auto& part : parts)
    for (const auto& p : part.planes()) planes.push_back(p);
  return BasicImage<Scalar>(std::move(planes));
}

/// Per-channel known-pixel indicator. A set bit marks a pixel whose value was
/// observed in that channel.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::vector<MaskPlane> planes);

  static Mask full(Index height, Index width, Index channels);

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index channels() const { return static_cast<Index>(planes_.size()); }
  bool empty() const { return planes_.empty(); }

  const MaskPlane& channel(Index c) const { return planes_.at(static_cast<std::size_t>(c)); }
  PlaneXd weights(Index c) const { return channel(c).cast<double>(); }
  Index count(Index c) const { return channel(c).count(); }

  /// Throws unless the mask has exactly the given shape.
  void check_matches(Index height, Index width, Index channels) const;

  bool operator==(const Mask& other) const;

 private:
  Index height_ = 0;
  Index width_ = 0;
  std::vector<MaskPlane> planes_;
};

/// Per-pixel phase labels in {1, ..., K}.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(LabelPlane labels, int phases);

  Index height() const { return labels_.rows(); }
  Index width() const { return labels_.cols(); }
  int phases() const { return phases_; }
  const LabelPlane& labels() const { return labels_; }
  int operator()(Index r, Index c) const { return labels_(r, c); }

  /// Pixel count per label; entry 0 is unused.
  std::vector<Index> histogram() const;

  bool operator==(const LabelMap& other) const {
    return phases_ == other.phases_ && labels_.rows() == other.labels_.rows() &&
           labels_.cols() == other.labels_.cols() && (labels_ == other.labels_).all();
  }

 private:
  LabelPlane labels_;
  int phases_ = 0;
};

/// Per-channel min-max normalization onto [0, 1]; constant channels map to 0.
Image rescale_to_unit(const Image& img);

/// Scalar-plane version of the same rule.
PlaneXd rescale_to_unit(const PlaneXd& plane);

}  // namespace slat

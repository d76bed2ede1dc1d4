#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "slat/image.hpp"

namespace slat {

/// Points are stored one per column: D x N.
using PointSet = Eigen::MatrixXd;

struct KMeansResult {
  Eigen::MatrixXd centroids;     // D x K
  std::vector<int> assignment;   // 0-based cluster per point
  double objective = 0.0;        // within-cluster sum of squared distances
  int effective_k = 0;           // clusters that own at least one point
  int iterations = 0;            // Lloyd iterations of the winning restart
  int best_restart = 0;
  std::vector<double> history;   // objective after each Lloyd half-step pair
};

/// K-means with k-means++ seeding and `restarts` independent runs; the run
/// with the lowest objective wins, ties to the lower restart index. Each run
/// iterates Lloyd steps to an assignment fixed point, then tries Hartigan
/// single-point transfers and goes back to Lloyd while they improve the
/// objective. A cluster that empties is reseeded at the point farthest from
/// its centroid.
KMeansResult kmeans(const PointSet& points, int k, int restarts, std::uint64_t seed);

/// Nearest-centroid label (1-based) under the Euclidean distance; ties go to
/// the smallest index. `centroids` is D x K with D == image channels.
LabelMap assign_phases(const Image& features, const Eigen::MatrixXd& centroids);

/// Replaces each pixel by the mean color of its phase over `source`.
Image render_phases(const LabelMap& labels, const Image& source);

struct Segmentation {
  LabelMap labels;
  Eigen::MatrixXd centroids;  // D x K
  int k = 0;
  int effective_k = 0;
  double objective = 0.0;
};

/// Stage 3 on a lifted image: kmeans, then assign_phases with the final
/// centroids.
Segmentation segment(const Image& features, int k, int restarts, std::uint64_t seed);

/// Pixels of an image as a D x N point set (column i is pixel i).
PointSet image_points(const Image& img);

}  // namespace slat

#pragma once

#include <vector>

#include "slat/image.hpp"

namespace slat {

struct AccuracyReport {
  double accuracy = 0.0;          // matched correct pixels / total pixels
  std::vector<int> matching;      // matching[p] = truth label for predicted label p; index 0 unused
  std::vector<double> per_phase;  // per_phase[t] = fraction of truth phase t recovered; index 0 unused
};

/// Pixel accuracy under the best one-to-one relabeling of `pred` onto
/// `truth`. Exhaustive over permutations when max(K_pred, K_truth) <= 8,
/// Hungarian assignment above that.
AccuracyReport accuracy(const LabelMap& pred, const LabelMap& truth);

/// Maximum-weight perfect matching on a square weight matrix; returns the
/// column assigned to each row.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

/// 10 log10(1 / MSE) over all samples; +infinity for identical images.
double psnr(const Image& a, const Image& b);

}  // namespace slat

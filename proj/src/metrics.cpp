#include "slat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace slat {

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  // Hungarian algorithm (shortest augmenting path, potentials) on costs
  // -weights. 1-based internally.
  const int n = static_cast<int>(weights.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

AccuracyReport accuracy(const LabelMap& pred, const LabelMap& truth) {
  if (pred.height() != truth.height() || pred.width() != truth.width())
    throw ValidationError("label maps differ in size");
  const int n = std::max(pred.phases(), truth.phases());

  // confusion[p][t]: pixels with predicted label p+1 and true label t+1.
  std::vector<std::vector<double>> confusion(n, std::vector<double>(n, 0.0));
  const Index total = pred.labels().size();
  for (Index i = 0; i < total; ++i)
    confusion[pred.labels().data()[i] - 1][truth.labels().data()[i] - 1] += 1.0;

  std::vector<int> best(n);
  std::iota(best.begin(), best.end(), 0);
  if (n <= 8) {
    std::vector<int> perm = best;
    double best_score = -1.0;
    do {
      double score = 0.0;
      for (int p = 0; p < n; ++p) score += confusion[p][perm[p]];
      if (score > best_score) {
        best_score = score;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best = max_weight_assignment(confusion);
  }

  AccuracyReport report;
  report.matching.assign(n + 1, 0);
  report.per_phase.assign(n + 1, 0.0);
  double correct = 0.0;
  std::vector<double> truth_sizes(n, 0.0);
  for (int p = 0; p < n; ++p)
    for (int t = 0; t < n; ++t) truth_sizes[t] += confusion[p][t];
  for (int p = 0; p < n; ++p) {
    report.matching[p + 1] = best[p] + 1;
    correct += confusion[p][best[p]];
    if (truth_sizes[best[p]] > 0.0) report.per_phase[best[p] + 1] = confusion[p][best[p]] / truth_sizes[best[p]];
  }
  report.accuracy = correct / static_cast<double>(total);
  return report;
}

double psnr(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels())
    throw ValidationError("psnr: image shapes differ");
  double sq = 0.0;
  for (Index c = 0; c < a.channels(); ++c) sq += (a.channel(c) - b.channel(c)).square().sum();
  const double mse = sq / static_cast<double>(a.pixels() * a.channels());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace slat

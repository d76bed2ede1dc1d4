#include "slat/thresholding.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <random>
#include <thread>

#include "slat/random.hpp"

namespace slat {
namespace {

// Counts distinct columns, stopping once `enough` have been seen.
int distinct_points_up_to(const PointSet& points, int enough) {
  std::vector<Index> reps;
  for (Index i = 0; i < points.cols() && static_cast<int>(reps.size()) < enough; ++i) {
    bool seen = false;
    for (Index r : reps) {
      if (points.col(r) == points.col(i)) {
        seen = true;
        break;
      }
    }
    if (!seen) reps.push_back(i);
  }
  return static_cast<int>(reps.size());
}

Index nearest(const PointSet& points, Index i, const Eigen::MatrixXd& centroids, double& dist) {
  const Index dim = points.rows();
  const double* x = points.col(i).data();
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < centroids.cols(); ++k) {
    const double* c = centroids.col(k).data();
    double d = 0.0;
    for (Index j = 0; j < dim; ++j) {
      const double t = x[j] - c[j];
      d += t * t;
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  dist = best_d;
  return best;
}

Eigen::MatrixXd kmeanspp_seed(const PointSet& points, int k, std::mt19937_64& engine) {
  const Index n = points.cols();
  Eigen::MatrixXd centroids(points.rows(), k);
  std::uniform_int_distribution<Index> first(0, n - 1);
  centroids.col(0) = points.col(first(engine));
  Eigen::VectorXd d2(n);
  for (Index i = 0; i < n; ++i) d2(i) = (points.col(i) - centroids.col(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(engine);
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target < 0.0) break;
      }
      // Rounding can leave `pick` on a zero-weight point; step back to one
      // that can be chosen.
      while (d2(pick) == 0.0 && pick > 0) --pick;
    }
    centroids.col(c) = points.col(pick);
    for (Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (points.col(i) - centroids.col(c)).squaredNorm());
  }
  return centroids;
}

// Lloyd steps from the current centroids to an assignment fixed point.
// Returns false if the iteration cap was hit first.
bool lloyd_steps(const PointSet& points, KMeansResult& out, Eigen::VectorXd& dist) {
  constexpr int kMaxIterations = 1000;
  const Index n = points.cols();
  const Index dim = points.rows();
  const int k = static_cast<int>(out.centroids.cols());
  for (int it = 0; it < kMaxIterations; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      double d = 0.0;
      const int a = static_cast<int>(nearest(points, i, out.centroids, d));
      dist(i) = d;
      if (a != out.assignment[static_cast<std::size_t>(i)]) {
        out.assignment[static_cast<std::size_t>(i)] = a;
        changed = true;
      }
    }
    out.history.push_back(dist.sum());
    if (!changed) return true;
    ++out.iterations;

    // Reseed empty clusters at the currently worst-fit point.
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int a : out.assignment) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] != 0) continue;
      Index far = 0;
      dist.maxCoeff(&far);
      --counts[static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(far)])];
      out.assignment[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist(far) = 0.0;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, k);
    for (Index i = 0; i < n; ++i) sums.col(out.assignment[static_cast<std::size_t>(i)]) += points.col(i);
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        out.centroids.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return false;
}

// One sweep of Hartigan single-point transfers: a point leaves its cluster
// when that lowers the objective, with both means updated on the spot.
// Returns the number of moves.
Index hartigan_sweep(const PointSet& points, KMeansResult& out) {
  const Index n = points.cols();
  const int k = static_cast<int>(out.centroids.cols());
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int a : out.assignment) counts[static_cast<std::size_t>(a)] += 1.0;
  Index moves = 0;
  for (Index i = 0; i < n; ++i) {
    const int a = out.assignment[static_cast<std::size_t>(i)];
    const double na = counts[static_cast<std::size_t>(a)];
    if (na <= 1.0) continue;
    const double leave = na / (na - 1.0) * (points.col(i) - out.centroids.col(a)).squaredNorm();
    int best = a;
    double best_gain = 0.0;
    for (int b = 0; b < k; ++b) {
      if (b == a) continue;
      const double nb = counts[static_cast<std::size_t>(b)];
      const double join = nb / (nb + 1.0) * (points.col(i) - out.centroids.col(b)).squaredNorm();
      // Relative margin keeps rounding noise from cycling points.
      const double gain = leave - join;
      if (gain > best_gain && gain > 1e-12 * leave) {
        best_gain = gain;
        best = b;
      }
    }
    if (best == a) continue;
    const double nb = counts[static_cast<std::size_t>(best)];
    out.centroids.col(a) = (out.centroids.col(a) * na - points.col(i)) / (na - 1.0);
    out.centroids.col(best) = (out.centroids.col(best) * nb + points.col(i)) / (nb + 1.0);
    counts[static_cast<std::size_t>(a)] -= 1.0;
    counts[static_cast<std::size_t>(best)] += 1.0;
    out.assignment[static_cast<std::size_t>(i)] = best;
    ++moves;
  }
  return moves;
}

KMeansResult lloyd(const PointSet& points, int k, std::mt19937_64& engine) {
  constexpr int kMaxRounds = 100;
  const Index n = points.cols();
  const Index dim = points.rows();
  KMeansResult out;
  out.centroids = kmeanspp_seed(points, k, engine);
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd dist(n);

  // Lloyd to a fixed point, then Hartigan transfers to escape it; repeat
  // until the transfers find nothing. The result is a Lloyd fixed point.
  for (int round = 0; round < kMaxRounds; ++round) {
    if (!lloyd_steps(points, out, dist)) break;
    if (hartigan_sweep(points, out) == 0) break;
    // Exact means again before the next Lloyd pass.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, k);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sums.col(out.assignment[static_cast<std::size_t>(i)]) += points.col(i);
      counts(out.assignment[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (counts(c) > 0) out.centroids.col(c) = sums.col(c) / counts(c);
  }

  out.objective = 0.0;
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (Index i = 0; i < n; ++i) {
    const int a = out.assignment[static_cast<std::size_t>(i)];
    used[static_cast<std::size_t>(a)] = true;
    out.objective += (points.col(i) - out.centroids.col(a)).squaredNorm();
  }
  out.effective_k = static_cast<int>(std::count(used.begin(), used.end(), true));
  return out;
}

}  // namespace

PointSet image_points(const Image& img) {
  PointSet points(img.channels(), img.pixels());
  for (Index c = 0; c < img.channels(); ++c)
    points.row(c) = Eigen::Map<const Eigen::RowVectorXd>(img.channel(c).data(), img.pixels());
  return points;
}

KMeansResult kmeans(const PointSet& points, int k, int restarts, std::uint64_t seed) {
  if (points.cols() == 0 || points.rows() == 0) throw ValidationError("k-means on an empty point set");
  if (k < 1) throw ValidationError("K must be >= 1");
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
  if (!points.allFinite()) throw ValidationError("k-means points must be finite");
  if (distinct_points_up_to(points, k) < k)
    throw ValidationError("K = " + std::to_string(k) + " exceeds the number of distinct points");

  std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
  auto run = [&](int r) {
    auto engine = make_engine(seed, Stream::kKMeans, static_cast<std::uint64_t>(r));
    runs[static_cast<std::size_t>(r)] = lloyd(points, k, engine);
  };
  const int workers = std::max(1, std::min<int>(restarts, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers > 1) {
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (int r = w; r < restarts; r += workers) run(r);
      }));
    for (auto& j : jobs) j.get();
  } else {
    for (int r = 0; r < restarts; ++r) run(r);
  }

  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (runs[static_cast<std::size_t>(r)].objective < runs[static_cast<std::size_t>(best)].objective) best = r;
  KMeansResult out = std::move(runs[static_cast<std::size_t>(best)]);
  out.best_restart = best;
  return out;
}

LabelMap assign_phases(const Image& features, const Eigen::MatrixXd& centroids) {
  if (centroids.cols() < 1) throw ValidationError("no centroids");
  if (centroids.rows() != features.channels())
    throw ValidationError("centroid dimension " + std::to_string(centroids.rows()) +
                          " does not match " + std::to_string(features.channels()) + " channels");
  const PointSet points = image_points(features);
  LabelPlane labels(features.height(), features.width());
  for (Index i = 0; i < points.cols(); ++i) {
    double d = 0.0;
    labels.data()[i] = static_cast<int>(nearest(points, i, centroids, d)) + 1;
  }
  return LabelMap(std::move(labels), static_cast<int>(centroids.cols()));
}

Image render_phases(const LabelMap& labels, const Image& source) {
  if (labels.height() != source.height() || labels.width() != source.width())
    throw ValidationError("label map and source image dimensions disagree");
  const int k = labels.phases();
  // Sums run over offsets from the first sample of each phase, so a
  // constant phase renders back to exactly its value.
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(source.channels(), k + 1);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(source.channels(), k + 1);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k + 1);
  const int* lab = labels.labels().data();
  for (Index i = 0; i < source.pixels(); ++i) {
    if (counts(lab[i]) == 0.0)
      for (Index c = 0; c < source.channels(); ++c) ref(c, lab[i]) = source.channel(c).data()[i];
    counts(lab[i]) += 1.0;
    for (Index c = 0; c < source.channels(); ++c) sums(c, lab[i]) += source.channel(c).data()[i] - ref(c, lab[i]);
  }
  std::vector<PlaneXd> planes(static_cast<std::size_t>(source.channels()),
                              PlaneXd(source.height(), source.width()));
  for (Index i = 0; i < source.pixels(); ++i)
    for (Index c = 0; c < source.channels(); ++c)
      planes[static_cast<std::size_t>(c)].data()[i] = ref(c, lab[i]) + sums(c, lab[i]) / counts(lab[i]);
  return Image(std::move(planes));
}

Segmentation segment(const Image& features, int k, int restarts, std::uint64_t seed) {
  const KMeansResult km = kmeans(image_points(features), k, restarts, seed);
  Segmentation seg;
  seg.labels = assign_phases(features, km.centroids);
  seg.centroids = km.centroids;
  seg.k = k;
  seg.effective_k = km.effective_k;
  seg.objective = km.objective;
  return seg;
}

}  // namespace slat

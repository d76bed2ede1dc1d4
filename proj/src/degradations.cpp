#include "slat/degradations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "slat/random.hpp"

namespace slat {
namespace {

void check_unit_range(const Image& img, const char* who) {
  for (const auto& p : img.planes())
    if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0)
      throw ValidationError(std::string(who) + ": input must lie in [0,1]");
}

std::string blur_to_string(const LinearOperatorXd& op) {
  if (op.is_identity()) return "none";
  const auto& k = op.kernel();
  const bool vertical_box = k.cols() == 1 && op.anchor_col() == 0 &&
                            op.anchor_row() == k.rows() / 2 &&
                            (k == 1.0 / static_cast<double>(k.rows())).all();
  if (vertical_box) return "vertical:" + std::to_string(k.rows());
  std::string s = "kernel:" + std::to_string(k.rows()) + "," + std::to_string(k.cols()) + "," +
                  std::to_string(op.anchor_row()) + "," + std::to_string(op.anchor_col()) + ":";
  for (Index i = 0; i < k.size(); ++i) s += (i ? "," : "") + format_double(k.data()[i]);
  return s;
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("bad number '" + item + "' in blur description");
    }
  }
  return out;
}

std::optional<LinearOperatorXd> blur_from_string(const std::string& s) {
  if (s.empty() || s == "none") return std::nullopt;
  if (s.rfind("vertical:", 0) == 0) {
    const auto len = split_numbers(s.substr(9));
    if (len.size() != 1) throw ValidationError("blur: expected vertical:<length>");
    return LinearOperatorXd::vertical_motion_blur(static_cast<Index>(len[0]));
  }
  if (s.rfind("kernel:", 0) == 0) {
    const auto colon = s.find(':', 7);
    if (colon == std::string::npos) throw ValidationError("blur: expected kernel:R,C,AR,AC:taps");
    const auto shape = split_numbers(s.substr(7, colon - 7));
    const auto taps = split_numbers(s.substr(colon + 1));
    if (shape.size() != 4) throw ValidationError("blur: kernel shape needs R,C,AR,AC");
    const auto rows = static_cast<Index>(shape[0]);
    const auto cols = static_cast<Index>(shape[1]);
    if (rows < 1 || cols < 1 || static_cast<Index>(taps.size()) != rows * cols)
      throw ValidationError("blur: kernel tap count does not match its shape");
    PlaneXd k = Eigen::Map<const PlaneXd>(taps.data(), rows, cols);
    return LinearOperatorXd::convolution(std::move(k), static_cast<Index>(shape[2]),
                                         static_cast<Index>(shape[3]));
  }
  throw ValidationError("blur: unknown description '" + s + "'");
}

}  // namespace

void DegradationSpec::validate() const {
  if (noise == NoiseKind::kGaussian && !(variance >= 0.0))
    throw ValidationError("gaussian variance must be >= 0");
  if (noise == NoiseKind::kPoisson && !(peak > 0.0)) throw ValidationError("poisson peak must be > 0");
  if (!(loss_fraction >= 0.0 && loss_fraction < 1.0))
    throw ValidationError("loss fraction must lie in [0,1)");
}

std::string DegradationSpec::label() const {
  std::vector<std::string> parts;
  if (blur && !blur->is_identity()) parts.push_back("blur" + std::to_string(blur->kernel().size()));
  if (noise == NoiseKind::kGaussian) parts.push_back("gauss" + format_double(variance));
  if (noise == NoiseKind::kPoisson) parts.push_back("poisson" + format_double(peak));
  if (loss_fraction > 0.0) parts.push_back("loss" + format_double(loss_fraction));
  if (parts.empty()) return "clean";
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out += "+" + parts[i];
  return out;
}

KeyValues DegradationSpec::to_key_values() const {
  KeyValues kv;
  switch (noise) {
    case NoiseKind::kNone: kv.set("noise", "none"); break;
    case NoiseKind::kGaussian:
      kv.set("noise", "gaussian");
      kv.set("mean", format_double(mean));
      kv.set("variance", format_double(variance));
      break;
    case NoiseKind::kPoisson:
      kv.set("noise", "poisson");
      kv.set("peak", format_double(peak));
      break;
  }
  kv.set("loss", format_double(loss_fraction));
  kv.set("per_channel_loss", per_channel_loss ? "true" : "false");
  kv.set("blur", blur ? blur_to_string(*blur) : "none");
  kv.set("seed", std::to_string(seed));
  return kv;
}

DegradationSpec DegradationSpec::from_key_values(const KeyValues& kv) {
  DegradationSpec spec;
  const std::string noise = kv.get("noise", "none");
  if (noise == "none") {
    spec.noise = NoiseKind::kNone;
  } else if (noise == "gaussian") {
    spec.noise = NoiseKind::kGaussian;
  } else if (noise == "poisson") {
    spec.noise = NoiseKind::kPoisson;
  } else {
    throw ValidationError("noise must be none, gaussian or poisson");
  }
  spec.mean = kv.get_double("mean", 0.0);
  spec.variance = kv.get_double("variance", 0.0);
  spec.peak = kv.get_double("peak", 255.0);
  spec.loss_fraction = kv.get_double("loss", 0.0);
  spec.per_channel_loss = kv.get_bool("per_channel_loss", false);
  spec.blur = blur_from_string(kv.get("blur", "none"));
  spec.seed = kv.get_u64("seed", 0);
  spec.validate();
  return spec;
}

Image add_gaussian(const Image& img, double mean, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0)) throw ValidationError("gaussian variance must be >= 0");
  check_unit_range(img, "add_gaussian");
  if (variance == 0.0 && mean == 0.0) return img;
  std::vector<PlaneXd> planes;
  const double sigma = std::sqrt(variance);
  for (Index c = 0; c < img.channels(); ++c) {
    auto engine = make_engine(seed, Stream::kGaussianNoise, static_cast<std::uint64_t>(c));
    std::normal_distribution<double> normal(mean, sigma);
    PlaneXd p = img.channel(c);
    for (Index i = 0; i < p.size(); ++i) {
      const double noise = sigma > 0.0 ? normal(engine) : mean;
      p.data()[i] = std::clamp(p.data()[i] + noise, 0.0, 1.0);
    }
    planes.push_back(std::move(p));
  }
  return Image(std::move(planes));
}

Image add_poisson(const Image& img, double peak, std::uint64_t seed) {
  if (!(peak > 0.0)) throw ValidationError("poisson peak must be > 0");
  check_unit_range(img, "add_poisson");
  std::vector<PlaneXd> counts;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index c = 0; c < img.channels(); ++c) {
    auto engine = make_engine(seed, Stream::kPoissonNoise, static_cast<std::uint64_t>(c));
    PlaneXd n(img.height(), img.width());
    for (Index i = 0; i < n.size(); ++i) {
      const double rate = 1.0 + img.channel(c).data()[i] * (peak - 1.0);
      std::poisson_distribution<long long> poisson(rate);
      n.data()[i] = static_cast<double>(poisson(engine));
    }
    lo = std::min(lo, n.minCoeff());
    hi = std::max(hi, n.maxCoeff());
    counts.push_back(std::move(n));
  }
  for (auto& n : counts) {
    if (hi > lo) {
      n = (n - lo) / (hi - lo);
    } else {
      n.setZero();
    }
  }
  return Image(std::move(counts));
}

Degraded random_loss(const Image& img, double fraction, bool per_channel, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError("loss fraction must lie in [0,1)");
  const Index sites = img.pixels();
  const auto cleared = static_cast<Index>(std::llround(fraction * static_cast<double>(sites)));
  if (cleared >= sites) throw ValidationError("loss fraction would clear every pixel");
  std::vector<PlaneXd> planes = img.planes();
  std::vector<MaskPlane> masks;
  MaskPlane shared;
  for (Index c = 0; c < img.channels(); ++c) {
    if (c == 0 || per_channel) {
      auto engine = make_engine(seed, Stream::kPixelLoss, per_channel ? static_cast<std::uint64_t>(c) : 0);
      std::vector<Index> order(static_cast<std::size_t>(sites));
      std::iota(order.begin(), order.end(), Index{0});
      // Partial Fisher-Yates: the first `cleared` entries are a uniform sample.
      for (Index i = 0; i < cleared; ++i) {
        std::uniform_int_distribution<Index> pick(i, sites - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(engine))]);
      }
      shared = MaskPlane::Constant(img.height(), img.width(), true);
      for (Index i = 0; i < cleared; ++i) shared.data()[order[static_cast<std::size_t>(i)]] = false;
    }
    planes[static_cast<std::size_t>(c)] = shared.select(planes[static_cast<std::size_t>(c)], 0.0);
    masks.push_back(shared);
  }
  return {Image(std::move(planes)), Mask(std::move(masks))};
}

Degraded degrade(const Image& img, const DegradationSpec& spec) {
  spec.validate();
  Image out = img;
  if (spec.blur && !spec.blur->is_identity()) {
    std::vector<PlaneXd> planes;
    // A normalized kernel keeps values in [0,1] up to rounding in the last ulp.
    for (const auto& p : img.planes()) planes.push_back(spec.blur->apply(p).min(1.0).max(0.0));
    out = Image(std::move(planes));
  }
  switch (spec.noise) {
    case NoiseKind::kNone: break;
    case NoiseKind::kGaussian: out = add_gaussian(out, spec.mean, spec.variance, spec.seed); break;
    case NoiseKind::kPoisson: out = add_poisson(out, spec.peak, spec.seed); break;
  }
  if (spec.loss_fraction > 0.0) return random_loss(out, spec.loss_fraction, spec.per_channel_loss, spec.seed);
  return {out, Mask::full(out.height(), out.width(), out.channels())};
}

}  // namespace slat

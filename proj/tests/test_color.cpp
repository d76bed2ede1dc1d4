#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "slat/color.hpp"
#include "slat/degradations.hpp"
#include "slat/smoothing.hpp"
#include "slat/synthetic.hpp"

using namespace slat;

namespace {

Image pixel(double r, double g, double b) {
  return Image({PlaneXd::Constant(1, 1, r), PlaneXd::Constant(1, 1, g), PlaneXd::Constant(1, 1, b)});
}

// For a neutral gray the XYZ/white ratios all equal the linear value, so L*
// depends only on the inverse gamma and the cube root.
double gray_lightness(double c) {
  const double lin = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  const double d = 6.0 / 29.0;
  const double f = lin > d * d * d ? std::cbrt(lin) : lin / (3 * d * d) + 4.0 / 29.0;
  return 116.0 * f - 16.0;
}

std::vector<double> plane_values(const PlaneXd& p) { return {p.data(), p.data() + p.size()}; }

}  // namespace

TEST_CASE("sRGB to XYZ rows sum to the D65 white") {
  const Eigen::Vector3d white = color::srgb_to_xyz_matrix().rowwise().sum();
  for (int i = 0; i < 3; ++i) CHECK(std::abs(white(i) - color::kD65White[static_cast<std::size_t>(i)]) <= 1e-12);
}

TEST_CASE("white maps to (100, 0, 0) and black to the origin") {
  const auto w = color::srgb_to_lab(1.0, 1.0, 1.0);
  CHECK(std::abs(w[0] - 100.0) <= 1e-9);
  CHECK(std::abs(w[1]) <= 1e-9);
  CHECK(std::abs(w[2]) <= 1e-9);
  const auto k = color::srgb_to_lab(0.0, 0.0, 0.0);
  CHECK(std::abs(k[0]) <= 1e-12);
  CHECK(std::abs(k[1]) <= 1e-12);
  CHECK(std::abs(k[2]) <= 1e-12);
}

TEST_CASE("mid-gray lightness matches an independent reference") {
  const double ref = gray_lightness(0.5);
  CHECK(ref == doctest::Approx(53.39).epsilon(0.001));
  const Image lab = srgb_to_lab(pixel(0.5, 0.5, 0.5));
  CHECK(std::abs(lab.channel(0)(0, 0) - ref) <= 0.05);
  CHECK(std::abs(lab.channel(1)(0, 0)) <= 0.05);
  CHECK(std::abs(lab.channel(2)(0, 0)) <= 0.05);
  for (double c : {0.01, 0.03, 0.2, 0.8}) {
    const auto v = color::srgb_to_lab(c, c, c);
    CHECK(std::abs(v[0] - gray_lightness(c)) <= 1e-9);
  }
}

TEST_CASE("primaries have the expected chroma signs") {
  const auto red = color::srgb_to_lab(1.0, 0.0, 0.0);
  const auto green = color::srgb_to_lab(0.0, 1.0, 0.0);
  const auto blue = color::srgb_to_lab(0.0, 0.0, 1.0);
  const auto yellow = color::srgb_to_lab(1.0, 1.0, 0.0);
  CHECK(red[1] > 50);
  CHECK(green[1] < -50);
  CHECK(blue[2] < -50);
  CHECK(yellow[2] > 50);
}

TEST_CASE("Lab conversion is injective on a 17^3 lattice") {
  std::set<std::array<double, 3>> seen;
  for (int r = 0; r <= 16; ++r)
    for (int g = 0; g <= 16; ++g)
      for (int b = 0; b <= 16; ++b) seen.insert(color::srgb_to_lab(r / 16.0, g / 16.0, b / 16.0));
  CHECK(seen.size() == 17 * 17 * 17);

  // Distinct outputs also stay apart by more than rounding noise.
  std::vector<std::array<double, 3>> v(seen.begin(), seen.end());
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < std::min(v.size(), i + 400); ++j) {
      const double d = std::hypot(v[i][0] - v[j][0], v[i][1] - v[j][1], v[i][2] - v[j][2]);
      closest = std::min(closest, d);
    }
  CHECK(closest > 1e-3);
}

TEST_CASE("HSV conversion") {
  auto near = [](std::array<double, 3> a, std::array<double, 3> b) {
    return std::abs(a[0] - b[0]) < 1e-12 && std::abs(a[1] - b[1]) < 1e-12 && std::abs(a[2] - b[2]) < 1e-12;
  };
  CHECK(near(color::srgb_to_hsv(1.0, 0.0, 0.0), {0.0, 1.0, 1.0}));
  CHECK(near(color::srgb_to_hsv(0.0, 1.0, 0.0), {1.0 / 3.0, 1.0, 1.0}));
  CHECK(near(color::srgb_to_hsv(0.0, 0.0, 0.5), {2.0 / 3.0, 1.0, 0.5}));
  CHECK(near(color::srgb_to_hsv(1.0, 0.0, 1.0), {5.0 / 6.0, 1.0, 1.0}));
  CHECK(near(color::srgb_to_hsv(0.3, 0.3, 0.3), {0.0, 0.0, 0.3}));
  CHECK(near(color::srgb_to_hsv(0.0, 0.0, 0.0), {0.0, 0.0, 0.0}));
}

TEST_CASE("conversions reject bad input") {
  CHECK_THROWS_AS(srgb_to_lab(Image(2, 2, 1)), ValidationError);
  CHECK_THROWS_AS(srgb_to_lab(pixel(1.2, 0, 0)), ValidationError);
  CHECK_THROWS_AS(lift(pixel(-0.1, 0, 0)), ValidationError);
  CHECK_THROWS_AS(to_secondary(pixel(0, 0, 0), SecondarySpace::kNone), ValidationError);
  CHECK_THROWS_AS(parse_secondary_space("luv"), ValidationError);
  for (auto s : {SecondarySpace::kLab, SecondarySpace::kHsv, SecondarySpace::kNone})
    CHECK(parse_secondary_space(to_string(s)) == s);
}

TEST_CASE("lift stacks the input with the rescaled transform") {
  std::mt19937_64 rng(1);
  const Image rgb({oracle::random_plane(9, 8, rng), oracle::random_plane(9, 8, rng), oracle::random_plane(9, 8, rng)});
  for (auto space : {SecondarySpace::kLab, SecondarySpace::kHsv}) {
    const Image lifted = lift(rgb, space);
    REQUIRE(lifted.channels() == 6);
    CHECK(lifted.slice(0, 3) == rgb);
    CHECK(lifted.slice(3, 3) == rescale_to_unit(to_secondary(rgb, space)));
    for (const auto& p : lifted.planes()) {
      CHECK(p.minCoeff() >= 0.0);
      CHECK(p.maxCoeff() <= 1.0);
    }
  }
  CHECK(lift(rgb, SecondarySpace::kNone) == rgb);

  const Image constant = lift(Image({PlaneXd::Constant(3, 3, 0.2), PlaneXd::Constant(3, 3, 0.7), PlaneXd::Constant(3, 3, 0.4)}));
  for (Index c = 3; c < 6; ++c) CHECK((constant.channel(c) == 0.0).all());
}

TEST_CASE("the a channel separates sky from sand better than any RGB channel") {
  const auto scene = synthetic::pyramid();
  DegradationSpec spec;
  spec.noise = NoiseKind::kGaussian;
  spec.variance = 0.001;
  const Degraded d = degrade(scene.image, spec);
  const auto out = smooth_all(d.image, d.mask, LinearOperatorXd::identity(), Fidelity::kL2, 50.0, 1.0, SolverConfig{});
  const Image lifted = lift(out.smoothed);
  const double a = oracle::otsu_separability(plane_values(lifted.channel(4)));
  for (Index c = 0; c < 3; ++c) {
    const double rgb = oracle::otsu_separability(plane_values(lifted.channel(c)));
    MESSAGE("channel " << c << " separability " << rgb << " vs a* " << a);
    CHECK(a > rgb);
  }
}

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "slat/degradations.hpp"
#include "slat/smoothing.hpp"
#include "slat/synthetic.hpp"

using namespace slat;

namespace {

SmoothingProblem random_problem(std::mt19937_64& rng, Fidelity fid, bool blur, Index n = 8) {
  SmoothingProblem p;
  p.f = oracle::random_plane(n, n, rng);
  std::bernoulli_distribution keep(0.6);
  p.mask = MaskPlane(n, n);
  for (Index i = 0; i < p.mask.size(); ++i) p.mask.data()[i] = keep(rng);
  p.mask(0, 0) = true;
  p.op = blur ? LinearOperatorXd::vertical_motion_blur(3) : LinearOperatorXd::identity();
  p.fidelity = fid;
  std::uniform_real_distribution<double> lam(0.5, 20.0), mu(0.1, 3.0);
  p.lambda = lam(rng);
  p.mu = mu(rng);
  return p;
}

PlaneXd row_plane(const std::vector<double>& v) {
  PlaneXd p(1, static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(0, static_cast<Index>(i)) = v[i];
  return p;
}

double rms(const PlaneXd& a, const PlaneXd& b) { return std::sqrt((a - b).square().mean()); }

}  // namespace

TEST_CASE("energy matches the term-by-term loop oracle") {
  std::mt19937_64 rng(20);
  for (int t = 0; t < 20; ++t) {
    for (Fidelity fid : {Fidelity::kL2, Fidelity::kPoisson}) {
      auto p = random_problem(rng, fid, t % 2 == 0, 6);
      const PlaneXd g = oracle::random_plane(6, 6, rng, 0.05, 1.0);
      const double e = energy(p, g);
      const double o = oracle::energy(p.f, p.mask, p.op, fid == Fidelity::kPoisson, p.lambda, p.mu, g);
      CHECK(std::abs(e - o) <= 1e-10 * std::max(1.0, std::abs(o)));
    }
  }
}

TEST_CASE("energy of the identity problem at g = f is the regularizer alone") {
  std::mt19937_64 rng(21);
  const PlaneXd f = oracle::random_plane(7, 5, rng);
  const auto p = SmoothingProblem::denoising(f, Fidelity::kL2, 3.0, 1.5);
  CHECK(energy(p, f) == doctest::Approx(0.75 * oracle::grad_sq(f) + oracle::tv(f)).epsilon(1e-12));
  const auto c = SmoothingProblem::denoising(PlaneXd::Constant(4, 4, 0.3), Fidelity::kL2, 3.0);
  CHECK(energy(c, PlaneXd::Constant(4, 4, 0.3)) == 0.0);
}

TEST_CASE("masked pixels contribute nothing to the fidelity") {
  std::mt19937_64 rng(22);
  for (Fidelity fid : {Fidelity::kL2, Fidelity::kPoisson}) {
    auto p = random_problem(rng, fid, true);
    const PlaneXd g = oracle::random_plane(8, 8, rng, 0.1, 1.0);
    const double before = energy(p, g);
    for (Index i = 0; i < p.f.size(); ++i)
      if (!p.mask.data()[i]) p.f.data()[i] += 0.37;
    CHECK(energy(p, g) == before);
  }
}

TEST_CASE("Poisson energy outside its domain raises a numerical error") {
  auto p = SmoothingProblem::denoising(PlaneXd::Constant(3, 3, 0.5), Fidelity::kPoisson, 2.0);
  PlaneXd g = PlaneXd::Constant(3, 3, 0.5);
  g(1, 1) = 0.0;
  CHECK_THROWS_AS(energy(p, g), NumericalError);
  g(1, 1) = -0.1;
  CHECK_THROWS_AS(energy(p, g), NumericalError);
}

TEST_CASE("convexity: midpoint inequality on random triples") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Fidelity fid : {Fidelity::kL2, Fidelity::kPoisson}) {
    for (int t = 0; t < 100; ++t) {
      const auto p = random_problem(rng, fid, t % 2 == 1, 6);
      const PlaneXd g1 = oracle::random_plane(6, 6, rng, 0.05, 1.5);
      const PlaneXd g2 = oracle::random_plane(6, 6, rng, 0.05, 1.5);
      const double s = unit(rng);
      const double lhs = energy(p, (s * g1 + (1.0 - s) * g2).eval());
      const double rhs = s * energy(p, g1) + (1.0 - s) * energy(p, g2);
      CHECK(lhs <= rhs + 1e-10);
    }
  }
}

TEST_CASE("problem and solver validation") {
  const PlaneXd f = PlaneXd::Constant(4, 4, 0.5);
  auto p = SmoothingProblem::denoising(f, Fidelity::kL2, 1.0);
  p.lambda = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.lambda = 1.0;
  p.mu = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.mu = 1.0;
  p.mask.setConstant(false);
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.mask.setConstant(true);
  p.fidelity = Fidelity::kPoisson;
  p.f(0, 0) = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  SolverConfig cfg;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.tol = 1e-4;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  auto q = SmoothingProblem::denoising(f, Fidelity::kL2, 1.0);
  CHECK_THROWS_AS(solve_poisson(q, SolverConfig{}), ValidationError);
  q.fidelity = Fidelity::kPoisson;
  CHECK_THROWS_AS(solve_l2(q, SolverConfig{}), ValidationError);
  SolverConfig bad_steps;
  bad_steps.tau = 1.0;
  bad_steps.sigma = 1.0;
  CHECK_THROWS_AS(solve_poisson(q, bad_steps), ValidationError);
}

TEST_CASE("constant data is a fixed point") {
  const PlaneXd f = PlaneXd::Constant(6, 6, 0.4);
  SolverConfig cfg;
  const auto l2 = solve_l2(SmoothingProblem::denoising(f, Fidelity::kL2, 5.0), cfg);
  CHECK((l2.g - f).abs().maxCoeff() <= 1e-9);
  CHECK(l2.converged);
  cfg.tol = 1e-8;
  cfg.max_iter = 2000;
  const auto po = solve_poisson(SmoothingProblem::denoising(f, Fidelity::kPoisson, 5.0), cfg);
  CHECK((po.g - f).abs().maxCoeff() <= 1e-5);
}

TEST_CASE("Poisson resolvent closed form") {
  CHECK(poisson_resolvent(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  // The resolvent r of t -> w (t - f log t) at x satisfies r - x + w (1 - f / r) = 0.
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int t = 0; t < 50; ++t) {
    const double x = u(rng) - 1.0, w = u(rng), f = u(rng);
    const double r = poisson_resolvent(x, w, f);
    CHECK(r > 0.0);
    CHECK(std::abs(r - x + w * (1.0 - f / r)) <= 1e-10);
  }
}

TEST_CASE("split Bregman matches the 1-D dual oracle on a noisy step") {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> f(32);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (i < 16 ? 0.2 : 0.8) + noise(rng);
  const double lambda = 10.0, mu = 1.0;
  const auto ref = oracle::solve_1d(f, false, lambda, mu, 1'000'000);
  REQUIRE(ref.energy - ref.dual <= 1e-9 * ref.energy);

  SolverConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iter = 5000;
  cfg.inner_tol = 1e-12;
  const auto res = solve_l2(SmoothingProblem::denoising(row_plane(f), Fidelity::kL2, lambda, mu), cfg);
  const double e = res.trace.back().energy;
  CHECK(std::abs(e - ref.energy) <= 1e-5 * ref.energy);
  CHECK(rms(res.g, row_plane(ref.g)) <= 1e-4);
}

TEST_CASE("primal-dual matches the 1-D dual oracle on a Poisson-noised ramp") {
  std::mt19937_64 rng(26);
  std::vector<double> f(32);
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::poisson_distribution<int> counts(20.0 + 2.0 * static_cast<double>(i));
    f[i] = std::max(1, counts(rng)) / 40.0;
  }
  const double lambda = 10.0, mu = 1.0;
  const auto ref = oracle::solve_1d(f, true, lambda, mu, 1'000'000);
  REQUIRE(ref.energy - ref.dual <= 1e-8 * std::abs(ref.energy));

  SolverConfig cfg;
  cfg.tol = 1e-11;
  cfg.max_iter = 100000;
  cfg.inner_tol = 1e-12;
  const auto res = solve_poisson(SmoothingProblem::denoising(row_plane(f), Fidelity::kPoisson, lambda, mu), cfg);
  const double e = res.trace.back().energy;
  CHECK(std::abs(e - ref.energy) <= 1e-5 * std::abs(ref.energy));
  CHECK(rms(res.g, row_plane(ref.g)) <= 1e-3);
}

TEST_CASE("split Bregman energy trace is nonincreasing on the shipped experiment rows") {
  // Split Bregman is not a descent method in general: other lambda values
  // on these same scenes show short energy oscillations. The property is
  // checked at the settings the experiment manifests use.
  struct Row {
    const char* scene;
    double variance, loss;
    Index blur;
    double lambda;
  };
  const Row rows[] = {{"six_phase", 0.1, 0.0, 0, 4.0},     {"six_phase", 0.001, 0.6, 0, 10.0},
                      {"six_phase", 0.001, 0.0, 10, 50.0}, {"four_phase", 0.001, 0.0, 0, 50.0},
                      {"four_phase", 0.001, 0.6, 0, 50.0}, {"four_phase", 0.001, 0.0, 10, 50.0},
                      {"pyramid", 0.001, 0.0, 0, 50.0}};
  for (const auto& row : rows) {
    const auto scene = synthetic::by_name(row.scene);
    DegradationSpec spec;
    spec.noise = NoiseKind::kGaussian;
    spec.variance = row.variance;
    spec.loss_fraction = row.loss;
    if (row.blur > 0) spec.blur = LinearOperatorXd::vertical_motion_blur(row.blur);
    const auto d = degrade(scene.image, spec);
    for (Index c = 0; c < 3; ++c) {
      SmoothingProblem p;
      p.f = d.image.channel(c);
      p.mask = d.mask.channel(c);
      p.op = spec.blur ? *spec.blur : LinearOperatorXd::identity();
      p.lambda = row.lambda;
      const auto res = solve_l2(p, SolverConfig{});
      INFO(row.scene, " ", spec.label(), " channel ", c);
      for (std::size_t k = 1; k < res.trace.size(); ++k)
        CHECK(res.trace[k].energy <= res.trace[k - 1].energy + 1e-8);
    }
  }
}

TEST_CASE("solutions do not depend on the initialization") {
  std::mt19937_64 rng(28);
  SolverConfig cfg;
  cfg.tol = 1e-6;
  cfg.max_iter = 20000;
  for (Fidelity fid : {Fidelity::kL2, Fidelity::kPoisson}) {
    for (int t = 0; t < 4; ++t) {
      const auto p = random_problem(rng, fid, t % 2 == 0, 16);
      const auto from_zero = solve(p, cfg, PlaneXd::Zero(16, 16).eval());
      const auto from_f = solve(p, cfg);
      CHECK(rms(from_zero.g, from_f.g) <= 1e-3);
      const PlaneXd start = p.mask.select(p.f, 0.0);
      CHECK(energy(p, from_f.g) <= energy(p, start) + 1e-9);
    }
  }
}

TEST_CASE("large lambda pulls the solution onto the data, monotonically") {
  std::mt19937_64 rng(29);
  const PlaneXd f = oracle::random_plane(10, 10, rng);
  SolverConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iter = 2000;
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
    const auto res = solve_l2(SmoothingProblem::denoising(f, Fidelity::kL2, lambda), cfg);
    const double d = rms(res.g, f);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("trace and counters") {
  std::mt19937_64 rng(30);
  const auto p = random_problem(rng, Fidelity::kL2, false);
  const auto calls = stage1_solver_calls();
  const auto iters = stage1_iterations();
  const auto res = solve_l2(p, SolverConfig{});
  CHECK(stage1_solver_calls() == calls + 1);
  CHECK(stage1_iterations() >= iters + static_cast<std::uint64_t>(res.iterations));
  REQUIRE(res.trace.size() == static_cast<std::size_t>(res.iterations));
  CHECK(res.trace.front().iteration == 1);
  CHECK(res.trace.back().relative_change < 1e-4);
}

TEST_CASE("max_iter caps the iterations and reports non-convergence") {
  std::mt19937_64 rng(31);
  const auto p = random_problem(rng, Fidelity::kPoisson, false);
  SolverConfig cfg;
  cfg.max_iter = 3;
  cfg.tol = 1e-12;
  const auto res = solve(p, cfg);
  CHECK(res.iterations == 3);
  CHECK_FALSE(res.converged);
}

TEST_CASE("smooth_all is deterministic and rescales each channel") {
  std::mt19937_64 rng(32);
  std::vector<PlaneXd> planes;
  for (int c = 0; c < 3; ++c) planes.push_back(oracle::random_plane(12, 12, rng));
  const Image f(planes);
  const Mask mask = Mask::full(12, 12, 3);
  const auto op = LinearOperatorXd::identity();
  const auto a = smooth_all(f, mask, op, Fidelity::kL2, 5.0, 1.0, SolverConfig{}, true);
  const auto b = smooth_all(f, mask, op, Fidelity::kL2, 5.0, 1.0, SolverConfig{}, false);
  CHECK(a.smoothed == b.smoothed);
  for (Index c = 0; c < 3; ++c) {
    CHECK(a.smoothed.channel(c).minCoeff() == 0.0);
    CHECK(a.smoothed.channel(c).maxCoeff() == 1.0);
    CHECK((a.smoothed.channel(c) == rescale_to_unit(a.channels[static_cast<std::size_t>(c)].g)).all());
  }
}

TEST_CASE("smooth_all reports the failing channel") {
  std::vector<PlaneXd> planes(3, PlaneXd::Constant(4, 4, 0.5));
  planes[1](0, 0) = -0.5;  // invalid for the Poisson fidelity
  const Image f(planes);
  try {
    smooth_all(f, Mask::full(4, 4, 3), LinearOperatorXd::identity(), Fidelity::kPoisson, 1.0, 1.0,
               SolverConfig{});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("channel 1") != std::string::npos);
  }
}

TEST_CASE("a degenerate masked operator is rejected") {
  auto p = SmoothingProblem::denoising(PlaneXd::Constant(4, 4, 0.5), Fidelity::kL2, 1.0);
  p.mask.setConstant(false);
  CHECK_THROWS_AS(solve(p, SolverConfig{}), ValidationError);
}

TEST_CASE("non-finite data are rejected before solving") {
  PlaneXd f = PlaneXd::Constant(4, 4, 0.5);
  f(2, 2) = std::numeric_limits<double>::infinity();
  auto p = SmoothingProblem::denoising(f, Fidelity::kL2, 1.0);
  CHECK_THROWS_AS(solve(p, SolverConfig{}), ValidationError);
}

#include "slat/smoothing.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <future>
#include <limits>
#include <string>

#include "slat/cg.hpp"

namespace slat {
namespace {

std::atomic<std::uint64_t> g_solver_calls{0};
std::atomic<std::uint64_t> g_iterations{0};

constexpr double kLogFloor = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(const PlaneXd& x) { return std::sqrt(x.square().sum()); }

double relative_change(const PlaneXd& prev, const PlaneXd& next) {
  const double diff = norm(next - prev);
  const double base = norm(next);
  if (base == 0.0) return diff == 0.0 ? 0.0 : kInf;
  return diff / base;
}

// Energy for the trace: the Poisson energy is undefined while an iterate
// has (A g) <= 0 on the mask, which first-order primal iterates may visit.
double trace_energy(const SmoothingProblem& p, const PlaneXd& g) {
  try {
    return energy(p, g);
  } catch (const NumericalError&) {
    return kInf;
  }
}

PlaneXd start_point(const SmoothingProblem& p, const std::optional<PlaneXd>& initial) {
  if (!initial) return p.mask.select(p.f, 0.0);
  if (initial->rows() != p.f.rows() || initial->cols() != p.f.cols())
    throw ValidationError("initial guess has the wrong shape");
  return *initial;
}

// Records one iteration and applies the divergence and finiteness guards.
void record(SolveResult& out, const SmoothingProblem& p, const PlaneXd& g, int iteration,
            double change) {
  if (!g.allFinite())
    throw NumericalError("non-finite iterate at iteration " + std::to_string(iteration));
  out.trace.push_back({iteration, trace_energy(p, g), change});
  ++g_iterations;
  const auto n = out.trace.size();
  if (n > 10) {
    const double then = out.trace[n - 11].energy;
    const double now = out.trace[n - 1].energy;
    if (std::isfinite(then) && std::isfinite(now) && then > 0.0 && now > 10.0 * then)
      throw NumericalError("energy grew more than tenfold over 10 iterations (divergence)");
  }
}

GradientFieldXd shrink(const GradientFieldXd& s, double threshold) {
  const PlaneXd mag = (s.gx.square() + s.gy.square()).sqrt();
  const PlaneXd scale = (mag > threshold).select((mag - threshold) / mag, 0.0);
  return {s.gx * scale, s.gy * scale};
}

}  // namespace

SmoothingProblem SmoothingProblem::denoising(PlaneXd f, Fidelity fidelity, double lambda, double mu) {
  SmoothingProblem p;
  p.mask = MaskPlane::Constant(f.rows(), f.cols(), true);
  p.f = std::move(f);
  p.fidelity = fidelity;
  p.lambda = lambda;
  p.mu = mu;
  return p;
}

void SmoothingProblem::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be > 0");
  if (f.size() == 0) throw ValidationError("empty channel");
  if (!f.allFinite()) throw ValidationError("channel data are not finite");
  if (mask.rows() != f.rows() || mask.cols() != f.cols())
    throw ValidationError("mask and channel dimensions disagree");
  if (!mask.any()) throw ValidationError("mask channel has no known pixels");
  if (fidelity == Fidelity::kPoisson && (mask && (f < 0.0)).any())
    throw ValidationError("Poisson fidelity needs f >= 0 on known pixels");
  // Ker(wA) must not contain the constants.
  const PlaneXd a_one = masked_apply(op, mask, PlaneXd::Ones(f.rows(), f.cols()).eval());
  if (!(a_one.abs().maxCoeff() > 0.0))
    throw ValidationError("degenerate problem: the masked operator annihilates constant images");
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (rho < 0.0 || tau < 0.0 || sigma < 0.0) throw ValidationError("step parameters must be >= 0");
  if (!(inner_tol > 0.0) || inner_max < 1) throw ValidationError("bad inner solver controls");
}

double fidelity_term(const SmoothingProblem& p, const PlaneXd& g) {
  const PlaneXd ag = p.op.apply(g);
  if (p.fidelity == Fidelity::kL2) return p.mask.select((p.f - ag).square(), 0.0).sum();
  double sum = 0.0;
  for (Index j = 0; j < ag.size(); ++j) {
    if (!p.mask.data()[j]) continue;
    const double t = ag.data()[j];
    const double fj = p.f.data()[j];
    if (fj > 0.0 ? t < kLogFloor : t < 0.0)
      throw NumericalError("Poisson energy undefined: (A g) = " + std::to_string(t) + " at pixel " +
                           std::to_string(j));
    sum += fj > 0.0 ? t - fj * std::log(t) : t;
  }
  return sum;
}

double energy(const SmoothingProblem& p, const PlaneXd& g) {
  const GradientFieldXd dg = grad(g);
  return 0.5 * p.lambda * fidelity_term(p, g) + 0.5 * p.mu * frobenius_sq(dg) + tv_norm(dg);
}

double poisson_resolvent(double x, double step_weight, double f) {
  const double shifted = x - step_weight;
  return 0.5 * (shifted + std::sqrt(shifted * shifted + 4.0 * step_weight * f));
}

SolveResult solve_l2(const SmoothingProblem& p, const SolverConfig& cfg,
                     const std::optional<PlaneXd>& initial) {
  if (p.fidelity != Fidelity::kL2) throw ValidationError("solve_l2 needs the L2 fidelity");
  p.validate();
  cfg.validate();
  ++g_solver_calls;

  const double lambda = p.lambda;
  const double rho = cfg.rho > 0.0 ? cfg.rho : lambda;
  const double quad = p.mu + rho;
  const Index rows = p.f.rows();
  const Index cols = p.f.cols();

  // (lambda A^T w A + (mu + rho) grad^T grad) g
  auto system = [&](const PlaneXd& x) -> PlaneXd {
    return lambda * masked_adjoint(p.op, p.mask, masked_apply(p.op, p.mask, x)) +
           quad * neumann_laplacian(x);
  };
  const PlaneXd data_rhs = lambda * masked_adjoint(p.op, p.mask, p.f);

  SolveResult out;
  PlaneXd g = start_point(p, initial);
  auto d = GradientFieldXd::Zero(rows, cols);
  auto b = GradientFieldXd::Zero(rows, cols);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const GradientFieldXd db{d.gx - b.gx, d.gy - b.gy};
    const PlaneXd rhs = data_rhs - rho * div(db);
    PlaneXd next = g;
    conjugate_gradient<double>(system, rhs, next, cfg.inner_tol, cfg.inner_max);

    const GradientFieldXd dg = grad(next);
    const GradientFieldXd s{dg.gx + b.gx, dg.gy + b.gy};
    d = shrink(s, 1.0 / rho);
    b = {s.gx - d.gx, s.gy - d.gy};

    const double change = relative_change(g, next);
    g = std::move(next);
    record(out, p, g, k, change);
    out.iterations = k;
    if (change < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.g = std::move(g);
  return out;
}

SolveResult solve_poisson(const SmoothingProblem& p, const SolverConfig& cfg,
                          const std::optional<PlaneXd>& initial) {
  if (p.fidelity != Fidelity::kPoisson) throw ValidationError("solve_poisson needs the Poisson fidelity");
  p.validate();
  cfg.validate();
  ++g_solver_calls;

  const Index rows = p.f.rows();
  const Index cols = p.f.cols();
  const double a_norm = p.op.norm_estimate(rows, cols);
  const double k_norm_sq = 8.0 + a_norm * a_norm;
  const double default_step = 1.0 / std::sqrt(k_norm_sq);
  const double tau = cfg.tau > 0.0 ? cfg.tau : default_step;
  const double sigma = cfg.sigma > 0.0 ? cfg.sigma : default_step;
  if (tau * sigma * k_norm_sq > 1.0 + 1e-12)
    throw ValidationError("primal-dual steps violate tau*sigma*||K||^2 <= 1");

  // The data term carries lambda/2 in front of Psi.
  const double weight = 0.5 * p.lambda;
  const double mu_tau = p.mu * tau;
  auto prox_system = [&](const PlaneXd& x) -> PlaneXd { return x + mu_tau * neumann_laplacian(x); };

  SolveResult out;
  PlaneXd g = start_point(p, initial);
  PlaneXd g_bar = g;
  auto dual_tv = GradientFieldXd::Zero(rows, cols);
  PlaneXd dual_fid = PlaneXd::Zero(rows, cols);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    // TV dual: projection onto the pointwise unit ball.
    const GradientFieldXd dg = grad(g_bar);
    dual_tv.gx += sigma * dg.gx;
    dual_tv.gy += sigma * dg.gy;
    const PlaneXd mag = (dual_tv.gx.square() + dual_tv.gy.square()).sqrt().max(1.0);
    dual_tv.gx /= mag;
    dual_tv.gy /= mag;

    // Fidelity dual via Moreau: y - sigma * prox_{F/sigma}(y / sigma).
    const PlaneXd y = dual_fid + sigma * masked_apply(p.op, p.mask, g_bar);
    for (Index j = 0; j < y.size(); ++j) {
      if (!p.mask.data()[j]) {
        dual_fid.data()[j] = 0.0;
        continue;
      }
      const double yj = y.data()[j];
      dual_fid.data()[j] = yj - sigma * poisson_resolvent(yj / sigma, weight / sigma, p.f.data()[j]);
    }

    // Primal step, then the mu-quadratic proximal map (I + tau mu grad^T grad)^{-1}.
    const PlaneXd x = g - tau * (-div(dual_tv) + masked_adjoint(p.op, p.mask, dual_fid));
    PlaneXd next = g;
    conjugate_gradient<double>(prox_system, x, next, cfg.inner_tol, cfg.inner_max);

    g_bar = 2.0 * next - g;
    const double change = relative_change(g, next);
    g = std::move(next);
    record(out, p, g, k, change);
    out.iterations = k;
    if (change < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.g = std::move(g);
  return out;
}

SolveResult solve(const SmoothingProblem& p, const SolverConfig& cfg,
                  const std::optional<PlaneXd>& initial) {
  return p.fidelity == Fidelity::kL2 ? solve_l2(p, cfg, initial) : solve_poisson(p, cfg, initial);
}

SmoothingOutput smooth_all(const Image& f, const Mask& mask, const LinearOperatorXd& op,
                           Fidelity fidelity, double lambda, double mu, const SolverConfig& cfg,
                           bool parallel) {
  mask.check_matches(f.height(), f.width(), f.channels());
  const auto channels = static_cast<std::size_t>(f.channels());

  auto solve_channel = [&](std::size_t c) {
    SmoothingProblem p;
    p.f = f.channel(static_cast<Index>(c));
    p.mask = mask.channel(static_cast<Index>(c));
    p.op = op;
    p.fidelity = fidelity;
    p.lambda = lambda;
    p.mu = mu;
    return solve(p, cfg);
  };

  std::vector<SolveResult> results(channels);
  std::vector<std::exception_ptr> errors(channels);
  auto guarded = [&](std::size_t c) {
    try {
      results[c] = solve_channel(c);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (parallel && channels > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t c = 0; c < channels; ++c) jobs.push_back(std::async(std::launch::async, guarded, c));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t c = 0; c < channels; ++c) guarded(c);
  }

  for (std::size_t c = 0; c < channels; ++c) {
    if (!errors[c]) continue;
    const std::string prefix = "channel " + std::to_string(c) + ": ";
    try {
      std::rethrow_exception(errors[c]);
    } catch (const ValidationError& e) {
      throw ValidationError(prefix + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(prefix + e.what());
    }
  }

  std::vector<PlaneXd> planes;
  planes.reserve(channels);
  for (const auto& r : results) planes.push_back(rescale_to_unit(r.g));
  return {Image(std::move(planes)), std::move(results)};
}

std::uint64_t stage1_solver_calls() { return g_solver_calls.load(); }
std::uint64_t stage1_iterations() { return g_iterations.load(); }

}  // namespace slat

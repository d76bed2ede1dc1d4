#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slat/image.hpp"
#include "slat/linops.hpp"

namespace slat {

enum class Fidelity { kL2, kPoisson };

/// One channel of the convex restoration problem
///
///   E(g) = lambda/2 * Psi(f, g) + mu/2 * ||grad g||_F^2 + ||grad g||_{2,1}
///
/// with Psi = sum_j w_j (f_j - (A g)_j)^2            (kL2)
///   or Psi = sum_j w_j ((A g)_j - f_j log (A g)_j)   (kPoisson)
/// and w the known-pixel mask.
struct SmoothingProblem {
  PlaneXd f;
  MaskPlane mask;
  LinearOperatorXd op;
  Fidelity fidelity = Fidelity::kL2;
  double lambda = 1.0;
  double mu = 1.0;

  /// Full mask, identity operator.
  static SmoothingProblem denoising(PlaneXd f, Fidelity fidelity, double lambda, double mu = 1.0);

  /// Throws ValidationError on bad parameters, shape mismatches, an empty
  /// mask, negative Poisson data, or when (w A) annihilates constants.
  void validate() const;
};

struct SolverConfig {
  double tol = 1e-4;  // stop when ||g_k - g_{k+1}|| / ||g_{k+1}|| < tol
  int max_iter = 200;
  double rho = 0.0;    // split-Bregman penalty; 0 selects rho = lambda
  double tau = 0.0;    // primal-dual steps; 0 selects 1/sqrt(8 + ||A||^2)
  double sigma = 0.0;
  double inner_tol = 1e-6;  // CG relative residual for the quadratic subproblems
  int inner_max = 100;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double energy = 0.0;  // +inf where the Poisson energy is undefined
  double relative_change = 0.0;
};

struct SolveResult {
  PlaneXd g;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
};

/// Data term Psi alone (not scaled by lambda/2).
double fidelity_term(const SmoothingProblem& p, const PlaneXd& g);

/// Full discrete energy. For Poisson fidelity throws NumericalError when
/// (A g)_j < 1e-12 at a known pixel with f_j > 0 (or < 0 where f_j = 0).
double energy(const SmoothingProblem& p, const PlaneXd& g);

/// Resolvent of t -> weight * (t - f log t) at x with step `step`:
///   (x - step*weight + sqrt((x - step*weight)^2 + 4 step*weight f)) / 2.
double poisson_resolvent(double x, double step_weight, double f);

/// Split-Bregman solver for the L2 fidelity. The start point defaults to
/// w * f.
SolveResult solve_l2(const SmoothingProblem& p, const SolverConfig& cfg,
                     const std::optional<PlaneXd>& initial = std::nullopt);

/// First-order primal-dual solver for the Poisson fidelity.
SolveResult solve_poisson(const SmoothingProblem& p, const SolverConfig& cfg,
                          const std::optional<PlaneXd>& initial = std::nullopt);

/// Dispatches on p.fidelity.
SolveResult solve(const SmoothingProblem& p, const SolverConfig& cfg,
                  const std::optional<PlaneXd>& initial = std::nullopt);

struct SmoothingOutput {
  Image smoothed;                     // per-channel minimizers rescaled to [0,1]
  std::vector<SolveResult> channels;  // raw minimizers and traces
};

/// Solves every channel independently (on worker threads when `parallel`),
/// then rescales each result onto [0, 1]. Errors are rethrown with the
/// channel index prepended.
SmoothingOutput smooth_all(const Image& f, const Mask& mask, const LinearOperatorXd& op,
                           Fidelity fidelity, double lambda, double mu, const SolverConfig& cfg,
                           bool parallel = true);

/// Process-wide instrumentation: number of channel solves started and
/// outer iterations performed since start-up.
std::uint64_t stage1_solver_calls();
std::uint64_t stage1_iterations();

}  // namespace slat

#pragma once

#include <cmath>

#include "slat/image.hpp"

namespace slat {

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Matrix-free conjugate gradient for a symmetric positive definite operator
/// acting on planes. `x` holds the warm start on entry and the solution on
/// exit. Stops when ||b - A x|| <= tol * ||b||.
template <typename Scalar, typename ApplyFn>
CgResult conjugate_gradient(ApplyFn&& apply, const Plane<Scalar>& b, Plane<Scalar>& x,
                            Scalar tol, int max_iter) {
  CgResult result;
  const Scalar b_norm = std::sqrt(b.square().sum());
  if (b_norm == Scalar(0)) {
    x.setZero();
    return result;
  }
  Plane<Scalar> r = b - apply(x);
  Scalar rr = r.square().sum();
  const Scalar stop = tol * tol * b_norm * b_norm;
  Plane<Scalar> p = r;
  int it = 0;
  while (rr > stop && it < max_iter) {
    const Plane<Scalar> ap = apply(p);
    const Scalar pap = (p * ap).sum();
    if (!(pap > Scalar(0))) break;
    const Scalar alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const Scalar rr_next = r.square().sum();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    ++it;
  }
  result.iterations = it;
  result.relative_residual = static_cast<double>(std::sqrt(rr) / b_norm);
  return result;
}

}  // namespace slat

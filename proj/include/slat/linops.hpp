#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "slat/error.hpp"
#include "slat/image.hpp"

namespace slat {

/// Discrete gradient of a plane: backward differences, zero on the leading
/// column (gx) and leading row (gy).
template <typename Scalar>
struct GradientField {
  Plane<Scalar> gx;
  Plane<Scalar> gy;

  static GradientField Zero(Index rows, Index cols) {
    return {Plane<Scalar>::Zero(rows, cols), Plane<Scalar>::Zero(rows, cols)};
  }
  Index rows() const { return gx.rows(); }
  Index cols() const { return gx.cols(); }
};

using GradientFieldXd = GradientField<double>;

template <typename Scalar>
GradientField<Scalar> grad(const Plane<Scalar>& u) {
  const Index rows = u.rows();
  const Index cols = u.cols();
  auto p = GradientField<Scalar>::Zero(rows, cols);
  if (cols > 1) p.gx.rightCols(cols - 1) = u.rightCols(cols - 1) - u.leftCols(cols - 1);
  if (rows > 1) p.gy.bottomRows(rows - 1) = u.bottomRows(rows - 1) - u.topRows(rows - 1);
  return p;
}

/// Negative adjoint of grad: <grad u, p> = -<u, div p>.
template <typename Scalar>
Plane<Scalar> div(const GradientField<Scalar>& p) {
  const Index rows = p.rows();
  const Index cols = p.cols();
  Plane<Scalar> d = Plane<Scalar>::Zero(rows, cols);
  if (cols > 1) {
    // Column j receives gx(j+1) - gx(j); gx(0) is never read.
    d.leftCols(cols - 1) += p.gx.rightCols(cols - 1);
    d.rightCols(cols - 1) -= p.gx.rightCols(cols - 1);
  }
  if (rows > 1) {
    d.topRows(rows - 1) += p.gy.bottomRows(rows - 1);
    d.bottomRows(rows - 1) -= p.gy.bottomRows(rows - 1);
  }
  return d;
}

/// Isotropic TV: sum over pixels of |(gx, gy)|.
template <typename Scalar>
Scalar tv_norm(const GradientField<Scalar>& p) {
  return (p.gx.square() + p.gy.square()).sqrt().sum();
}

/// Squared Frobenius norm of the field.
template <typename Scalar>
Scalar frobenius_sq(const GradientField<Scalar>& p) {
  return p.gx.square().sum() + p.gy.square().sum();
}

/// grad^T grad u = -div(grad u): 5-point Laplacian with Neumann boundary.
template <typename Scalar>
Plane<Scalar> neumann_laplacian(const Plane<Scalar>& u) {
  return -div(grad(u));
}

template <typename Scalar>
Scalar inner(const GradientField<Scalar>& a, const GradientField<Scalar>& b) {
  return (a.gx * b.gx).sum() + (a.gy * b.gy).sum();
}

/// Half-sample symmetric reflection into [0, n): -1 -> 0, n -> n-1.
inline Index reflect_index(Index i, Index n) {
  const Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

/// The degradation operator: identity or a small 2-D kernel applied with
/// symmetric boundary extension.
///
/// For a kernel with anchor (ar, ac), output pixel (r, c) is
///   sum_{a,b} kernel(a, b) * u(reflect(r + a - ar), reflect(c + b - ac)).
/// The adjoint scatters through the same index map, so it is the exact
/// matrix transpose including the boundary rows.
template <typename Scalar>
class LinearOperator {
 public:
  enum class Kind { kIdentity, kConvolution };

  LinearOperator() = default;

  static LinearOperator identity() { return LinearOperator(); }

  static LinearOperator convolution(Plane<Scalar> kernel, Index anchor_row, Index anchor_col) {
    if (kernel.size() == 0) throw ValidationError("blur kernel is empty");
    if (!kernel.allFinite()) throw ValidationError("blur kernel has non-finite taps");
    if (anchor_row < 0 || anchor_row >= kernel.rows() || anchor_col < 0 || anchor_col >= kernel.cols())
      throw ValidationError("kernel anchor outside the kernel");
    if (std::abs(kernel.sum() - Scalar(1)) > Scalar(1e-12))
      throw ValidationError("blur kernel taps must sum to 1");
    LinearOperator op;
    op.kind_ = Kind::kConvolution;
    op.kernel_ = std::move(kernel);
    op.anchor_row_ = anchor_row;
    op.anchor_col_ = anchor_col;
    return op;
  }

  /// Odd-sized kernel anchored at its center.
  static LinearOperator centered(Plane<Scalar> kernel) {
    if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0)
      throw ValidationError("centered kernels must have odd size; give an explicit anchor");
    const Index ar = kernel.rows() / 2;
    const Index ac = kernel.cols() / 2;
    return convolution(std::move(kernel), ar, ac);
  }

  /// Vertical box of `length` taps 1/length; output row k averages rows
  /// k - length/2 ... k - length/2 + length - 1.
  static LinearOperator vertical_motion_blur(Index length) {
    if (length < 1) throw ValidationError("motion blur length must be positive");
    Plane<Scalar> k = Plane<Scalar>::Constant(length, 1, Scalar(1) / static_cast<Scalar>(length));
    return convolution(std::move(k), length / 2, 0);
  }

  Kind kind() const { return kind_; }
  bool is_identity() const { return kind_ == Kind::kIdentity; }
  const Plane<Scalar>& kernel() const { return kernel_; }
  Index anchor_row() const { return anchor_row_; }
  Index anchor_col() const { return anchor_col_; }

  Plane<Scalar> apply(const Plane<Scalar>& u) const {
    if (is_identity()) return u;
    check_fits(u);
    const Index rows = u.rows();
    const Index cols = u.cols();
    Plane<Scalar> out = Plane<Scalar>::Zero(rows, cols);
    for (Index a = 0; a < kernel_.rows(); ++a) {
      for (Index b = 0; b < kernel_.cols(); ++b) {
        const Scalar w = kernel_(a, b);
        if (w == Scalar(0)) continue;
        const auto col_map = shifted_indices(b - anchor_col_, cols);
        for (Index r = 0; r < rows; ++r) {
          const Index sr = reflect_index(r + a - anchor_row_, rows);
          for (Index c = 0; c < cols; ++c) out(r, c) += w * u(sr, col_map[c]);
        }
      }
    }
    return out;
  }

  Plane<Scalar> adjoint(const Plane<Scalar>& v) const {
    if (is_identity()) return v;
    check_fits(v);
    const Index rows = v.rows();
    const Index cols = v.cols();
    Plane<Scalar> out = Plane<Scalar>::Zero(rows, cols);
    for (Index a = 0; a < kernel_.rows(); ++a) {
      for (Index b = 0; b < kernel_.cols(); ++b) {
        const Scalar w = kernel_(a, b);
        if (w == Scalar(0)) continue;
        const auto col_map = shifted_indices(b - anchor_col_, cols);
        for (Index r = 0; r < rows; ++r) {
          const Index sr = reflect_index(r + a - anchor_row_, rows);
          for (Index c = 0; c < cols; ++c) out(sr, col_map[c]) += w * v(r, c);
        }
      }
    }
    return out;
  }

  /// Estimate of the spectral norm by power iteration on A^T A.
  Scalar norm_estimate(Index rows, Index cols, int iterations = 20) const {
    if (is_identity()) return Scalar(1);
    Plane<Scalar> x(rows, cols);
    // Deterministic, non-constant start so the iteration is not trapped in
    // a symmetric subspace.
    for (Index i = 0; i < x.size(); ++i)
      x.data()[i] = Scalar(1) + Scalar(0.5) * std::sin(Scalar(0.37) * static_cast<Scalar>(i));
    Scalar estimate = 0;
    for (int it = 0; it < iterations; ++it) {
      const Scalar nx = std::sqrt(x.square().sum());
      if (nx == Scalar(0)) return Scalar(0);
      x /= nx;
      x = adjoint(apply(x));
      estimate = std::sqrt(std::sqrt(x.square().sum()));
    }
    return estimate;
  }

 private:
  static std::vector<Index> shifted_indices(Index shift, Index n) {
    std::vector<Index> map(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) map[static_cast<std::size_t>(i)] = reflect_index(i + shift, n);
    return map;
  }

  void check_fits(const Plane<Scalar>& u) const {
    if (kernel_.rows() > u.rows() || kernel_.cols() > u.cols())
      throw ValidationError("kernel " + std::to_string(kernel_.rows()) + "x" +
                            std::to_string(kernel_.cols()) + " is larger than the image " +
                            std::to_string(u.rows()) + "x" + std::to_string(u.cols()));
  }

  Kind kind_ = Kind::kIdentity;
  Plane<Scalar> kernel_;
  Index anchor_row_ = 0;
  Index anchor_col_ = 0;
};

using LinearOperatorXd = LinearOperator<double>;

/// (omega A) u: A u zeroed wherever the mask bit is clear.
template <typename Scalar>
Plane<Scalar> masked_apply(const LinearOperator<Scalar>& op, const MaskPlane& mask,
                           const Plane<Scalar>& u) {
  if (mask.rows() != u.rows() || mask.cols() != u.cols())
    throw ValidationError("mask and image dimensions disagree");
  if (!mask.any()) throw ValidationError("mask channel has no known pixels");
  return mask.select(op.apply(u), Scalar(0));
}

/// (omega A)^T v = A^T (omega v).
template <typename Scalar>
Plane<Scalar> masked_adjoint(const LinearOperator<Scalar>& op, const MaskPlane& mask,
                             const Plane<Scalar>& v) {
  if (mask.rows() != v.rows() || mask.cols() != v.cols())
    throw ValidationError("mask and image dimensions disagree");
  if (!mask.any()) throw ValidationError("mask channel has no known pixels");
  return op.adjoint(mask.select(v, Scalar(0)));
}

}  // namespace slat

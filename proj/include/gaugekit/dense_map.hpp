// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <Eigen/Dense>

#include "gaugekit/errors.hpp"

namespace gaugekit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Power-method estimate of the largest singular value of a, using the
/// Rayleigh quotient of a^T a. The start vector is a fixed pseudo-random
/// positive vector, so repeated calls are deterministic, and the Rayleigh
/// sequence is nondecreasing in the iteration count.
inline double estimate_operator_norm(const Mat& a, int iters = 200) {
  require_param(iters > 0, "operator norm iterations must be positive");
  if (a.size() == 0) return 0.0;

  Vec v(a.cols());
  std::uint64_t x = 0x9e3779b97f4a7c15ULL;
  for (int i = 0; i < v.size(); ++i) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    v[i] = 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;  // in [0.5, 1.5)
  }
  v.normalize();

  double rayleigh = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec av = a * v;
    rayleigh = av.squaredNorm();  // v is unit, so this is v^T (A^T A) v
    Vec w = a.transpose() * av;
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;  // v fell in the null space; ||A v|| was 0 too
    v = w / wn;
  }
  return std::sqrt(std::max(rayleigh, 0.0));
}

/// Dense linear operator with its adjoint and a cached operator-norm
/// estimate. All solver code routes matrix products through this type so
/// that dimension errors surface at the call site.
class DenseMap {
 public:
  DenseMap() = default;
  explicit DenseMap(Mat a) : a_(std::move(a)) {}

  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }
  const Mat& matrix() const { return a_; }

  Vec apply(const Vec& x) const {
    require_dim(x.size() == a_.cols(), "DenseMap::apply: size mismatch");
    return a_ * x;
  }

  Vec apply_adjoint(const Vec& y) const {
    require_dim(y.size() == a_.rows(), "DenseMap::apply_adjoint: size mismatch");
    return a_.transpose() * y;
  }

  /// Cached largest-singular-value estimate; recomputed only when a
  /// different iteration count is requested.
  double operator_norm(int iters = 200) const {
    if (cached_norm_ < 0.0 || cached_iters_ != iters) {
      cached_norm_ = estimate_operator_norm(a_, iters);
      cached_iters_ = iters;
    }
    return cached_norm_;
  }

 private:
  Mat a_;
  mutable double cached_norm_ = -1.0;
  mutable int cached_iters_ = 0;
};

}  // namespace gaugekit

// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <vector>

#include "gaugekit/dense_map.hpp"

namespace gaugekit {

/*  Lawson-Hanson active-set method for
 *
 *      minimize_{lambda >= 0}  || V lambda - x ||_2 .
 *
 *  Sized for desk-scale problems: every passive-set change pays one dense
 *  least-squares solve. Used for membership in finitely generated cones,
 *  projection onto polyhedral cones (through the polar decomposition), and
 *  convex-hull weight fitting in primal recovery.
 */
inline Vec nonnegative_least_squares(const Mat& v, const Vec& x,
                                     double tol = 1e-12,
                                     int max_iters = 0) {
  require_dim(v.rows() == x.size(), "nonnegative_least_squares: size mismatch");
  const int p = static_cast<int>(v.cols());
  if (max_iters <= 0) max_iters = 3 * std::max(p, 10);

  Vec lambda = Vec::Zero(p);
  std::vector<bool> passive(p, false);
  const double scale = 1.0 + x.norm();

  auto solve_passive = [&](const std::vector<bool>& mask) -> Vec {
    std::vector<int> idx;
    for (int j = 0; j < p; ++j)
      if (mask[j]) idx.push_back(j);
    Vec full = Vec::Zero(p);
    if (idx.empty()) return full;
    Mat sub(v.rows(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = v.col(idx[c]);
    Vec sol = sub.colPivHouseholderQr().solve(x);
    for (std::size_t c = 0; c < idx.size(); ++c) full[idx[c]] = sol[c];
    return full;
  };

  for (int outer = 0; outer < max_iters; ++outer) {
    Vec grad = v.transpose() * (x - v * lambda);
    int best = -1;
    double best_val = tol * scale;
    for (int j = 0; j < p; ++j) {
      if (!passive[j] && grad[j] > best_val) {
        best = j;
        best_val = grad[j];
      }
    }
    if (best < 0) break;  // KKT satisfied
    passive[best] = true;

    Vec trial = solve_passive(passive);
    // Walk back along the segment while the trial leaves the orthant.
    for (int inner = 0; inner < max_iters; ++inner) {
      bool ok = true;
      for (int j = 0; j < p; ++j)
        if (passive[j] && trial[j] <= 0.0) ok = false;
      if (ok) break;
      double alpha = 1.0;
      for (int j = 0; j < p; ++j) {
        if (passive[j] && trial[j] <= 0.0) {
          const double denom = lambda[j] - trial[j];
          if (denom > 0.0) alpha = std::min(alpha, lambda[j] / denom);
        }
      }
      lambda += alpha * (trial - lambda);
      for (int j = 0; j < p; ++j) {
        if (passive[j] && lambda[j] <= tol * scale) {
          lambda[j] = 0.0;
          passive[j] = false;
        }
      }
      trial = solve_passive(passive);
    }
    lambda = trial;
  }
  return lambda.cwiseMax(0.0);
}

}  // namespace gaugekit

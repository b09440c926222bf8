// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include "gaugekit/errors.hpp"

namespace gaugekit {

/// Numeric tolerances shared across feasibility checks, optimality
/// certificates, and scalar root finding.
struct ToleranceConfig {
  double feas_tol = 1e-8;    ///< constraint satisfaction slack
  double opt_tol = 1e-6;     ///< optimality residual threshold
  double bisect_tol = 1e-10; ///< scalar bisection interval width
  int max_inner_iters = 5000;

  void validate() const {
    require_param(feas_tol > 0 && opt_tol > 0 && bisect_tol > 0,
                  "tolerances must be positive");
    require_param(max_inner_iters > 0, "max_inner_iters must be positive");
  }
};

}  // namespace gaugekit

#pragma once

#include <cstddef>

#include "momnet/datafit.hpp"

namespace momnet {

struct PowerIterationResult {
  double eigenvalue = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Leading eigenvalue of the PSD operator A^T W A by power iteration from a
/// fixed deterministic start; stops when successive estimates agree to
/// `rel_tol` relative.
PowerIterationResult power_iteration(const QuadraticDataFit& f, std::size_t max_iters = 100,
                                     double rel_tol = 1e-8);

/// sigma_max - sigma_min of a diagonal majorizer (exact).
double spectral_spread(const DiagonalMajorizer& m);
/// sigma_max - sigma_min of a raw (possibly zero-containing) diagonal.
double spectral_spread(const Vec& diag);
/// Spread of A^T W A: sigma_max by power iteration, sigma_min taken as 0.
double spectral_spread(const QuadraticDataFit& f);

}  // namespace momnet

#include "momnet/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "momnet/error.hpp"

namespace momnet {

PowerIterationResult power_iteration(const QuadraticDataFit& f, std::size_t max_iters, double rel_tol) {
  const LinearOperator& a = f.op();
  const std::size_t n = a.cols();
  // Non-constant start so it is not orthogonal to common leading vectors.
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  double nv = norm(v);
  for (double& x : v) x /= nv;

  Vec av(a.rows());
  Vec next(n);
  PowerIterationResult result;
  double previous = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    a.apply(v, av);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] *= f.weights()[i];
    a.apply_adjoint(av, next);
    const double rayleigh = dot(v, next);
    result.eigenvalue = rayleigh;
    result.iterations = it + 1;
    const double nn = norm(next);
    if (nn == 0.0) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / nn;
    if (it > 0 && std::abs(rayleigh - previous) <= rel_tol * std::abs(rayleigh)) {
      result.converged = true;
      break;
    }
    previous = rayleigh;
  }
  return result;
}

double spectral_spread(const Vec& diag) {
  if (diag.empty()) throw ConfigError("spectral_spread: empty diagonal");
  if (!all_finite(diag)) throw NumericError("spectral_spread: non-finite diagonal");
  const auto [lo, hi] = std::minmax_element(diag.begin(), diag.end());
  return *hi - *lo;
}

double spectral_spread(const DiagonalMajorizer& m) { return spectral_spread(m.diag()); }

double spectral_spread(const QuadraticDataFit& f) {
  if (f.image_size() == 0) throw ConfigError("spectral_spread: empty operator");
  return power_iteration(f, 100, 1e-8).eigenvalue;
}

}  // namespace momnet

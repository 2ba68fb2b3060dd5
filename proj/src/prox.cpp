#include "momnet/prox.hpp"

#include "momnet/error.hpp"

namespace momnet {

Vec soft_threshold(std::span<const double> u, double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("soft_threshold: alpha must be >= 0");
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = soft_threshold(u[i], alpha);
  return out;
}

ImageVector prox_indicator(const ImageVector& v, const DiagonalMajorizer& m, const FeasibleSet& set) {
  require_dims(m.size(), v.size(), "prox_indicator");
  ImageVector out = v;
  for (double& x : out.data()) x = set.project(x);
  return out;
}

Vec prox_l1_metric(std::span<const double> z, const DiagonalMajorizer& m, double beta) {
  require_dims(m.size(), z.size(), "prox_l1_metric");
  if (!(beta >= 0.0)) throw ConfigError("prox_l1_metric: beta must be >= 0");
  const DiagonalMajorizer mt = m.scaled();
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = soft_threshold(z[i], beta / mt.diag()[i]);
  return out;
}

}  // namespace momnet
